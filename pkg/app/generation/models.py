from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

from app.config import GenerationParams


class GenerationRequest(BaseModel):
    question: str
    context: str
    params: GenerationParams = Field(default_factory=GenerationParams)

    def to_payload(self) -> Dict[str, Any]:
        """Wire form: the question, the context and all four decoding params."""
        return {"question": self.question, "context": self.context, **self.params.model_dump()}


class Candidate(BaseModel):
    question_id: str
    context_id: str
    rank_in_retrieval: int = Field(ge=0, le=4)
    answer_text: str = Field(min_length=1)
    rerank_score: Optional[float] = None
