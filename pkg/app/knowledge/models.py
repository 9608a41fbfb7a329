from typing import List

from pydantic import BaseModel, model_validator


class EmbeddingVector(BaseModel):
    id: str
    dim: int
    values: List[float]

    @model_validator(mode="after")
    def _check_dim(self):
        if len(self.values) != self.dim:
            raise ValueError(f"vector has {len(self.values)} values, expected {self.dim}")
        return self
