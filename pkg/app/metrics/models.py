from typing import List

from pydantic import BaseModel, Field, computed_field, model_validator


class RougeScore(BaseModel):
    precision: float = Field(ge=0.0, le=1.0)
    recall: float = Field(ge=0.0, le=1.0)
    f1: float = Field(ge=0.0, le=1.0)

    @classmethod
    def from_counts(cls, overlap: float, candidate_size: float, reference_size: float) -> "RougeScore":
        if candidate_size == 0 or reference_size == 0 or overlap == 0:
            return cls(precision=0.0, recall=0.0, f1=0.0)
        precision = overlap / candidate_size
        recall = overlap / reference_size
        return cls.from_precision_recall(precision, recall)

    @classmethod
    def from_precision_recall(cls, precision: float, recall: float) -> "RougeScore":
        precision = min(max(precision, 0.0), 1.0)
        recall = min(max(recall, 0.0), 1.0)
        f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)
        return cls(precision=precision, recall=recall, f1=f1)


class NLIProbabilities(BaseModel):
    positive: float = Field(ge=0.0, le=1.0)
    neutral: float = Field(ge=0.0, le=1.0)
    negative: float = Field(ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _sums_to_one(self):
        if abs(self.positive + self.neutral + self.negative - 1.0) > 1e-6:
            raise ValueError("entailment probabilities must sum to 1")
        return self


class FlaggedPair(BaseModel):
    answer_sentence_idx: int
    gold_sentence_idx: int
    negative_prob: float


class EntailmentVerdict(BaseModel):
    flagged_pairs: List[FlaggedPair] = Field(default_factory=list)

    @computed_field
    @property
    def contradicted(self) -> bool:
        return bool(self.flagged_pairs)


class WelchResult(BaseModel):
    t: float
    p: float = Field(ge=0.0, le=1.0)
    df: float
