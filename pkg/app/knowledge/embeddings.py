import hashlib
import logging
import math
from collections import Counter
from typing import List, Optional

import numpy as np
from langchain_core.embeddings import Embeddings

from app.config import RetrievalSettings
from app.exception.exception import ConfigError, DimensionMismatchError, ProviderError
from app.providers.transport import JsonTransport, SocketTransport, SubprocessTransport
from app.text import tokenize

from .models import EmbeddingVector

logger = logging.getLogger(__name__)

VECTOR_SIZE = 768


class HashingEmbeddings(Embeddings):
    """Reference encoder: signed hashed term frequencies, L2-normalized.

    Buckets come from a keyed BLAKE2 digest of each token so vectors are
    identical across processes and platforms.
    """

    def __init__(self, dim: int = VECTOR_SIZE):
        if dim < 1:
            raise ConfigError("Embedding dimension must be >= 1")
        self.dim = dim

    def _bucket(self, token: str):
        digest = int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "big")
        sign = 1.0 if (digest >> 63) & 1 == 0 else -1.0
        return digest % self.dim, sign

    def _embed(self, text: str) -> List[float]:
        vector = np.zeros(self.dim, dtype=np.float64)
        for token, count in sorted(Counter(tokenize(text)).items()):
            bucket, sign = self._bucket(token)
            vector[bucket] += sign * count
        norm = np.linalg.norm(vector)
        if norm > 0:
            vector /= norm
        return vector.tolist()

    def embed_documents(self, texts: List[str]) -> List[List[float]]:
        return [self._embed(t) for t in texts]

    def embed_query(self, text: str) -> List[float]:
        return self._embed(text)


class TransportEmbeddings(Embeddings):
    """External encoder: request {"text"}, response {"vector": [...]}."""

    def __init__(self, transport: JsonTransport, dim: Optional[int] = None):
        self.transport = transport
        self.dim = dim

    def embed_query(self, text: str) -> List[float]:
        response = self.transport.request({"text": text})
        vector = response.get("vector")
        if not isinstance(vector, list) or not vector:
            raise ProviderError("Embedding provider response is missing 'vector'")
        if self.dim is not None and len(vector) != self.dim:
            raise DimensionMismatchError(f"Embedding provider returned dim {len(vector)}, expected {self.dim}")
        return [float(v) for v in vector]

    def embed_documents(self, texts: List[str]) -> List[List[float]]:
        return [self.embed_query(t) for t in texts]


def make_text_encoder(settings: RetrievalSettings) -> Embeddings:
    """Create an embedding model based on configuration."""
    if settings.embedding_provider == "reference":
        return HashingEmbeddings(settings.dim)
    if settings.embedding_provider == "subprocess":
        if not settings.command:
            raise ConfigError("retrieval.command is required for the subprocess embedding provider")
        return TransportEmbeddings(SubprocessTransport(settings.command), settings.dim)
    if settings.port is None:
        raise ConfigError("retrieval.port is required for the socket embedding provider")
    return TransportEmbeddings(SocketTransport(settings.host, settings.port), settings.dim)


def normalize_vector(values: List[float]) -> np.ndarray:
    vector = np.asarray(values, dtype=np.float64)
    if vector.ndim != 1 or not np.all(np.isfinite(vector)):
        raise ProviderError("Embedding is not a finite 1-D vector")
    norm = float(np.linalg.norm(vector))
    if norm == 0.0 or not math.isfinite(norm):
        raise ProviderError("Embedding has zero norm (text has no indexable tokens?)")
    return vector / norm


def embed_text(text: str, provider: Embeddings, text_id: str = "query", dim: Optional[int] = None) -> EmbeddingVector:
    if not text or not text.strip():
        raise ProviderError("Cannot embed empty text")
    try:
        raw = provider.embed_query(text)
    except ProviderError:
        raise
    except Exception as e:
        raise ProviderError(f"Embedding provider failed: {e}")
    vector = normalize_vector(raw)
    if dim is not None and vector.shape[0] != dim:
        raise DimensionMismatchError(f"Embedding has dim {vector.shape[0]}, expected {dim}")
    return EmbeddingVector(id=text_id, dim=int(vector.shape[0]), values=vector.tolist())
