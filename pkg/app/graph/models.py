from enum import Enum

from pydantic import BaseModel, ConfigDict

HAS_CUI = "has_cui"
# Sentinel relation: union of every non-CUI relation of a disease.
ALL_RELATIONS = "*"


class EntityKind(str, Enum):
    DISEASE = "Disease"
    TERM = "Term"
    CUI = "Cui"


class Entity(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: int
    label: str
    kind: EntityKind
    norm_label: str


class Triple(BaseModel):
    model_config = ConfigDict(frozen=True)

    head: int
    relation: str
    tail: int
