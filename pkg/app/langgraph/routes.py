import logging

from fastapi import APIRouter, Depends, status

from app.engine import QAEngine, get_engine
from app.models import BaseResponse

from .models import AskRequest, FinalAnswer

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/ask", response_model=BaseResponse[FinalAnswer])
def ask(request: AskRequest, engine: QAEngine = Depends(get_engine)):
    """Answer a health question: retrieve, generate five candidates, select through the KG."""
    logger.info(f"[ASK API] Question received: {request.question[:100]}")
    options = engine.default_options(**request.model_dump(exclude={"question"}, exclude_unset=True))
    answer = engine.ask(request.question, options)
    logger.info(f"[ASK API] Answered with mode {answer.mode.value}, rank {answer.chosen_rank}")
    return BaseResponse[FinalAnswer](
        status=status.HTTP_200_OK,
        message="Answer selected",
        data=answer,
    )
