from fastapi import APIRouter

from app.models import StatusResponse

from .knowledge.routes import router as knowledge_router
from .langgraph.routes import router as ask_router

api_router = APIRouter()


@api_router.get("/health", response_model=StatusResponse)
def health():
    return StatusResponse(status="ok", message="kgqa is running")


api_router.include_router(ask_router, tags=["ask"])
api_router.include_router(knowledge_router, prefix="/knowledge", tags=["knowledge"])
