from enum import Enum
from typing import List, Literal, Optional

from pydantic import BaseModel, Field


class Category(str, Enum):
    ABOUT_DISEASE = "about_disease"
    AT_RISK = "at_risk"
    CAUSE = "cause"
    DIAGNOSIS_AND_TEST = "diagnosis_and_test"
    SYMPTOM = "symptom"
    TREATMENT = "treatment"
    OTHER = "other"


class TestQuestion(BaseModel):
    __test__ = False

    id: str = Field(min_length=1)
    question: str
    category: Category
    gold_answer: str = Field(min_length=1)


class EvalRecord(BaseModel):
    question_id: str
    system: str
    metric: str
    value: float
    category: Optional[Category] = None


class SummaryCell(BaseModel):
    group: str
    system: str
    metric: str
    n: int = Field(ge=1)
    min: float
    max: float
    median: float
    mean: float
    std: Optional[float] = Field(default=None, ge=0.0)
    p_value: Optional[float] = Field(default=None, ge=0.0, le=1.0)


class SummaryTable(BaseModel):
    grouping: Literal["overall", "category"]
    reference_system: Optional[str] = None
    cells: List[SummaryCell] = Field(default_factory=list)

    def cell(self, group: str, system: str, metric: str) -> Optional[SummaryCell]:
        for cell in self.cells:
            if (cell.group, cell.system, cell.metric) == (group, system, metric):
                return cell
        return None

    @property
    def groups(self) -> List[str]:
        return list(dict.fromkeys(c.group for c in self.cells))

    @property
    def systems(self) -> List[str]:
        return list(dict.fromkeys(c.system for c in self.cells))

    @property
    def metrics(self) -> List[str]:
        return list(dict.fromkeys(c.metric for c in self.cells))
