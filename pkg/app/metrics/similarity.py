import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from langchain_core.embeddings import Embeddings

from app.config import MetricsSettings
from app.exception.exception import ConfigError, DimensionMismatchError, MetricError, ProviderError, RecordError
from app.jsonl import read_jsonl
from app.knowledge.embeddings import embed_text
from app.providers.transport import HttpTransport, JsonTransport, SubprocessTransport
from app.text import tokenize

from .models import RougeScore

logger = logging.getLogger(__name__)

TokenVector = Tuple[str, Sequence[float]]


def _unit_rows(pairs: Sequence[TokenVector], side: str) -> np.ndarray:
    if not pairs:
        raise MetricError(f"BERTScore {side} side is empty")
    try:
        matrix = np.asarray([vector for _, vector in pairs], dtype=np.float64)
    except ValueError:
        raise DimensionMismatchError(f"BERTScore {side} vectors do not share one dimension")
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"BERTScore {side} vectors do not share one dimension")
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise MetricError(f"BERTScore {side} side has a zero vector")
    return matrix / norms


def bertscore_greedy(candidate: Sequence[TokenVector], reference: Sequence[TokenVector]) -> RougeScore:
    """Greedy-matching BERTScore without IDF weighting or baseline rescaling.

    Each side is a list of (token, vector) pairs; recall averages, over reference
    tokens, the best cosine to any candidate token, and precision the reverse.
    """
    cand = _unit_rows(candidate, "candidate")
    ref = _unit_rows(reference, "reference")
    if cand.shape[1] != ref.shape[1]:
        raise DimensionMismatchError(f"BERTScore dims differ: {cand.shape[1]} vs {ref.shape[1]}")
    similarity = np.clip(cand @ ref.T, -1.0, 1.0)
    precision = float(similarity.max(axis=1).mean())
    recall = float(similarity.max(axis=0).mean())
    return RougeScore.from_precision_recall(precision, recall)


def token_vectors(tokens: Sequence[str], embeddings: Embeddings) -> List[TokenVector]:
    if not tokens:
        return []
    vectors = embeddings.embed_documents(list(tokens))
    return list(zip(tokens, vectors))


def load_token_vectors(path: Union[str, Path]) -> Dict[str, List[float]]:
    """Token-embedding fixture: one {"token","vector"} record per line."""
    table: Dict[str, List[float]] = {}
    for line_number, record in read_jsonl(path):
        if "token" not in record or not isinstance(record.get("vector"), list):
            raise RecordError("expected {\"token\", \"vector\"}", line_number, str(path))
        table[str(record["token"])] = [float(v) for v in record["vector"]]
    return table


def bertscore_text(answer: str, gold: str, embeddings: Embeddings) -> RougeScore:
    return bertscore_greedy(
        token_vectors(tokenize(answer), embeddings),
        token_vectors(tokenize(gold), embeddings),
    )


class StsProvider(ABC):
    @abstractmethod
    def score(self, answer: str, gold: str) -> float:
        ...


class EmbeddingSts(StsProvider):
    """Fallback STS: five times the cosine of the two text embeddings, unclamped."""

    def __init__(self, embeddings: Embeddings):
        self.embeddings = embeddings

    def score(self, answer: str, gold: str) -> float:
        a = np.asarray(embed_text(answer, self.embeddings).values)
        b = np.asarray(embed_text(gold, self.embeddings).values)
        return 5.0 * float(np.clip(a @ b, -1.0, 1.0))


class TransportSts(StsProvider):
    """External cross-encoder: {"sentence1","sentence2"} -> {"score"}."""

    def __init__(self, transport: JsonTransport):
        self.transport = transport

    def score(self, answer: str, gold: str) -> float:
        response = self.transport.request({"sentence1": answer, "sentence2": gold})
        try:
            return float(response["score"])
        except (KeyError, TypeError, ValueError):
            raise ProviderError("STS provider response is missing a numeric 'score'")


def sts_score(answer: str, gold: str, provider: StsProvider) -> float:
    return provider.score(answer, gold)


def make_sts_provider(settings: MetricsSettings, embeddings: Embeddings) -> StsProvider:
    if settings.sts_provider == "fallback":
        return EmbeddingSts(embeddings)
    if settings.sts_provider == "subprocess":
        if not settings.sts_command:
            raise ConfigError("metrics.sts_command is required for the subprocess STS provider")
        return TransportSts(SubprocessTransport(settings.sts_command))
    if not settings.sts_url:
        raise ConfigError("metrics.sts_url is required for the http STS provider")
    return TransportSts(HttpTransport(settings.sts_url))
