from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field

from app.generation.models import Candidate


class DiseaseMatch(BaseModel):
    entity_id: int
    label: str
    match_ratio: float = Field(ge=0.0, le=1.0)


class QuestionParse(BaseModel):
    raw_question: str
    disease: Optional[DiseaseMatch] = None
    relation: Optional[str] = None


class AnswerMode(str, Enum):
    JOINT_REASONING = "JointReasoning"
    FALLBACK_FIRST_CANDIDATE = "FallbackFirstCandidate"


class FinalAnswer(BaseModel):
    answer_text: str
    chosen_rank: int
    rerank_scores: List[float]
    parse: QuestionParse
    mode: AnswerMode
    subgraph_text: str = ""
    candidates: List[Candidate] = Field(default_factory=list)


class AskOptions(BaseModel):
    """Per-question switches of the pipeline (CLI flags / request body)."""

    k: int = Field(default=5, ge=1, le=5)
    no_joint_reasoning: bool = False
    no_vdb: bool = False
    fuzzy_threshold: float = Field(default=0.85, ge=0.0, le=1.0)
    all_relations_when_unmatched: bool = True
    synonym_expansion: bool = True
    question_id: Optional[str] = None


class AskRequest(AskOptions):
    question: str = Field(min_length=1)
