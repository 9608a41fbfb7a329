from typing import List, Optional, Tuple

from typing_extensions import TypedDict

from app.generation.models import Candidate

from .models import FinalAnswer, QuestionParse


class JointState(TypedDict, total=False):
    question: str
    question_id: str
    # (doc-id, text) in retrieval order
    contexts: List[Tuple[str, str]]
    candidates: List[Candidate]
    parse: Optional[QuestionParse]
    use_kg: bool
    subgraph_text: str
    final: FinalAnswer
