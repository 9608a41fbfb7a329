from pydantic import BaseModel, ConfigDict, Field


class Document(BaseModel):
    """One disease-page section: the atom of the corpus."""
    model_config = ConfigDict(frozen=True)

    id: str
    disease: str
    section: str
    text: str
    source: str = ""


class Paragraph(BaseModel):
    """A chunk of a document small enough for the question generator."""
    model_config = ConfigDict(frozen=True)

    doc_id: str
    ordinal: int = Field(ge=0)
    text: str
    token_count: int = Field(ge=0)


class QAPair(BaseModel):
    """Synthetic question/answer pair produced from a paragraph."""
    question: str = Field(min_length=1)
    answer: str = Field(min_length=1)
    source: str = ""
