import logging
from typing import Optional

from fastapi import APIRouter, Depends, Query, status

from app.engine import QAEngine, get_engine
from app.exception.exception import CustomHTTPException
from app.kg_embedding.models import TripletAnswer, TripletRequest
from app.models import BaseResponse

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/triplet", response_model=BaseResponse[TripletAnswer])
def triplet(request: TripletRequest, engine: QAEngine = Depends(get_engine)):
    """Translate a question into a triplet pattern and answer it from the graph."""
    logger.info(f"[KNOWLEDGE API] Triplet query: {request.question[:100]}")
    return BaseResponse[TripletAnswer](
        status=status.HTTP_200_OK,
        message="Triplet query answered",
        data=engine.triplet(request.question),
    )


@router.get("/subgraph", response_model=BaseResponse[dict])
def subgraph(
        disease: str = Query(..., min_length=1),
        relation: Optional[str] = Query(None),
        engine: QAEngine = Depends(get_engine),
):
    """Subgraph-text of a disease, for one relation or all of them."""
    logger.info(f"[KNOWLEDGE API] Subgraph requested: {disease} / {relation or '*'}")
    result = engine.subgraph(disease, relation)
    if result is None:
        raise CustomHTTPException(
            status_code=404,
            error_code="DISEASE_NOT_FOUND",
            message=f"No disease matches '{disease}'",
        )
    return BaseResponse[dict](status=status.HTTP_200_OK, message="Subgraph extracted", data=result)
