import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from langchain_core.documents import Document as ContextDocument
from langchain_core.embeddings import Embeddings

from app.corpus.models import Document
from app.exception.exception import DimensionMismatchError, EmptyCorpusError, KGQAException, LoadError, RecordError

from .embeddings import embed_text
from .models import EmbeddingVector

logger = logging.getLogger(__name__)

INDEX_FILE = "vectors.jsonl"


class VectorIndex:
    """Immutable exact cosine index. Rows are kept sorted by id."""

    def __init__(self, dim: int, ids: Sequence[str], matrix: np.ndarray, doc_texts: Dict[str, str]):
        if len(set(ids)) != len(ids):
            raise LoadError("Vector index ids must be unique")
        matrix = np.asarray(matrix, dtype=np.float64).reshape(len(ids), dim)
        order = sorted(range(len(ids)), key=lambda i: ids[i])
        self.dim = dim
        self.ids: List[str] = [ids[i] for i in order]
        self.matrix = matrix[order] if len(ids) else matrix
        self.matrix.setflags(write=False)
        self.doc_texts = dict(doc_texts)

    @classmethod
    def from_vectors(cls, vectors: Sequence[EmbeddingVector], doc_texts: Dict[str, str]) -> "VectorIndex":
        if not vectors:
            raise EmptyCorpusError("empty corpus")
        dim = vectors[0].dim
        for vector in vectors:
            if vector.dim != dim:
                raise DimensionMismatchError(f"Vector {vector.id} has dim {vector.dim}, index dim is {dim}")
        return cls(dim, [v.id for v in vectors], np.array([v.values for v in vectors]), doc_texts)

    def __len__(self) -> int:
        return len(self.ids)

    def vector(self, doc_id: str) -> EmbeddingVector:
        position = self.ids.index(doc_id)
        return EmbeddingVector(id=doc_id, dim=self.dim, values=self.matrix[position].tolist())


def build_index(docs: List[Document], provider: Embeddings, strict: bool = True) -> VectorIndex:
    """Embed one entry per document."""
    if not docs:
        raise EmptyCorpusError("empty corpus")
    logger.info(f"[VECTORDB] Embedding {len(docs)} documents")
    vectors: List[EmbeddingVector] = []
    texts: Dict[str, str] = {}
    for doc in docs:
        try:
            vector = embed_text(doc.text, provider, text_id=doc.id)
        except KGQAException as e:
            if strict:
                raise
            logger.warning(f"[VECTORDB] Skipping document {doc.id}: {e.message}")
            continue
        vectors.append(vector)
        texts[doc.id] = doc.text
    index = VectorIndex.from_vectors(vectors, texts)
    logger.info(f"[VECTORDB] Built index of {len(index)} entries (dim={index.dim})")
    return index


def top_k(index: VectorIndex, query_vec: EmbeddingVector, k: int = 5) -> List[Tuple[str, float]]:
    if k < 1:
        raise ValueError("k must be >= 1")
    if query_vec.dim != index.dim:
        raise DimensionMismatchError(f"Query has dim {query_vec.dim}, index dim is {index.dim}")
    scores = np.clip(index.matrix @ np.asarray(query_vec.values, dtype=np.float64), -1.0, 1.0)
    # stable sort over id-sorted rows gives the lexicographic tie-break
    order = np.argsort(-scores, kind="stable")[:k]
    return [(index.ids[i], float(scores[i])) for i in order]


def query_knowledge_base(
        index: VectorIndex,
        query: str,
        provider: Embeddings,
        k: int = 5,
) -> List[ContextDocument]:
    """Query the knowledge base for the most similar answer contexts."""
    logger.info(f"[VECTORDB] Querying knowledge base with: {query[:50]}...")
    query_vec = embed_text(query, provider, dim=index.dim)
    results = []
    for rank, (doc_id, score) in enumerate(top_k(index, query_vec, k)):
        logger.debug(f"[VECTORDB] Result {rank + 1}: {doc_id} score={score:.4f}")
        results.append(ContextDocument(
            page_content=index.doc_texts.get(doc_id, ""),
            metadata={"doc_id": doc_id, "score": score, "rank": rank},
        ))
    logger.info(f"[VECTORDB] Found {len(results)} results")
    return results


def persist_index(index: VectorIndex, path: Union[str, Path]) -> Path:
    path = Path(path)
    if path.is_dir() or path.suffix == "":
        path = path / INDEX_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps({"dim": index.dim, "count": len(index)}) + "\n")
        for doc_id, row in zip(index.ids, index.matrix):
            record = {"id": doc_id, "vector": row.tolist(), "text": index.doc_texts.get(doc_id, "")}
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    logger.info(f"[VECTORDB] Persisted {len(index)} vectors to {path}")
    return path


def load_index(path: Union[str, Path]) -> VectorIndex:
    path = Path(path)
    if path.is_dir():
        path = path / INDEX_FILE
    if not path.exists():
        raise LoadError(f"Index file not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        lines = [line for line in handle if line.strip()]
    if not lines:
        raise EmptyCorpusError(f"empty corpus: {path}")
    try:
        header = json.loads(lines[0])
        dim, count = int(header["dim"]), int(header["count"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError):
        raise RecordError("first line must be {\"dim\", \"count\"}", 1, str(path))
    ids, rows, texts = [], [], {}
    for line_number, line in enumerate(lines[1:], start=2):
        try:
            record = json.loads(line)
            doc_id, vector = record["id"], record["vector"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise RecordError("expected {\"id\", \"vector\"}", line_number, str(path))
        if len(vector) != dim:
            raise DimensionMismatchError(f"{path}:{line_number}: vector has dim {len(vector)}, header says {dim}")
        ids.append(doc_id)
        rows.append(vector)
        texts[doc_id] = record.get("text", "")
    if len(ids) != count:
        raise LoadError(f"{path}: header declares {count} vectors, found {len(ids)}")
    if not ids:
        raise EmptyCorpusError(f"empty corpus: {path}")
    return VectorIndex(dim, ids, np.array(rows, dtype=np.float64), texts)
