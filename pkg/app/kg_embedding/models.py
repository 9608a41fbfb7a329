from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from app.graph.models import Triple


class TripleSplit(BaseModel):
    train: List[Triple]
    valid: List[Triple]
    test: List[Triple]
    seed: int
    # entity ids are the graph's ids, so the embedding table spans all of them
    entity_count: int = Field(ge=1)
    relations: List[str]
    moved_to_train: int = 0


class RankReport(BaseModel):
    hits1: float = Field(ge=0.0, le=1.0)
    hits10: float = Field(ge=0.0, le=1.0)
    hits100: float = Field(ge=0.0, le=1.0)
    mrr: float = Field(ge=0.0, le=1.0)
    rankings: int = 0

    @model_validator(mode="after")
    def _monotone(self):
        if not (self.hits1 <= self.hits10 <= self.hits100 and self.hits1 <= self.mrr + 1e-12):
            raise ValueError("rank report violates hits1 <= hits10 <= hits100 and hits1 <= mrr")
        return self


class TripletPattern(str, Enum):
    HEAD_RELATION = "<h,r,?>"
    RELATION_TAIL = "<?,r,t>"
    HEAD_TAIL = "<h,?,t>"


class TripletRequest(BaseModel):
    question: str = Field(min_length=1)


class TripletAnswer(BaseModel):
    pattern: str
    head: Optional[str] = None
    relation: Optional[str] = None
    tail: Optional[str] = None
    answers: List[str] = Field(default_factory=list)
