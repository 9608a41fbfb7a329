import logging
from typing import List, Optional, Sequence, Tuple

from langchain_core.runnables import RunnableLambda

from app.config import GenerationParams
from app.exception.exception import KGQAException, ProviderError
from app.text import slugify

from .models import Candidate, GenerationRequest
from .providers import AnswerGenerator

logger = logging.getLogger(__name__)

MAX_CONTEXTS = 5
NO_VDB_CONTEXT_ID = "no-vdb"


def generate_candidates(
        question: str,
        contexts: Sequence[Tuple[str, str]],
        params: GenerationParams,
        provider: AnswerGenerator,
        question_id: Optional[str] = None,
        max_concurrency: int = MAX_CONTEXTS,
) -> List[Candidate]:
    """One candidate per (doc-id, text) context, in retrieval order.

    Provider calls run concurrently; a failure on any context fails the whole
    question.
    """
    if not 1 <= len(contexts) <= MAX_CONTEXTS:
        raise ValueError(f"expected 1..{MAX_CONTEXTS} contexts, got {len(contexts)}")
    question_id = question_id or slugify(question)
    logger.info(f"[GENERATION] Generating {len(contexts)} candidates for {question_id}")

    def _generate(item: Tuple[int, str, str]) -> Candidate:
        rank, context_id, text = item
        request = GenerationRequest(question=question, context=text, params=params)
        answer = provider.generate(question_id, context_id, request)
        return Candidate(
            question_id=question_id,
            context_id=context_id,
            rank_in_retrieval=rank,
            answer_text=answer,
        )

    items = [(rank, doc_id, text) for rank, (doc_id, text) in enumerate(contexts)]
    try:
        candidates = RunnableLambda(_generate).batch(items, config={"max_concurrency": max_concurrency})
    except KGQAException:
        raise
    except Exception as e:
        raise ProviderError(f"Generation failed for {question_id}: {e}")
    return sorted(candidates, key=lambda c: c.rank_in_retrieval)


def generate_without_context(
        question: str,
        params: GenerationParams,
        provider: AnswerGenerator,
        question_id: Optional[str] = None,
) -> List[Candidate]:
    """No-VDB ablation: a single request whose context is the empty string."""
    return generate_candidates(question, [(NO_VDB_CONTEXT_ID, "")], params, provider, question_id)
