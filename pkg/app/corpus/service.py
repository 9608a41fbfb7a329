import logging
import re
from pathlib import Path
from typing import Iterable, List, Optional, Union

from app.exception.exception import ConfigError, LoadError, RecordError
from app.jsonl import read_jsonl, write_jsonl
from app.text import count_tokens, normalize_whitespace

from .abbreviations import expand_abbreviations
from .coreference import CoreferenceProvider, resolve_coreferences
from .models import Document, Paragraph, QAPair

logger = logging.getLogger(__name__)

DOCUMENT_FIELDS = ("id", "disease", "section", "text", "source")
QA_FIELDS = ("question", "answer", "source")

_BLOCK_RE = re.compile(r"\n\s*\n")
_SENTENCE_BOUNDARY_RE = re.compile(r"(?<=[.?!])\s+")
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _missing_fields(record: dict, fields: Iterable[str]) -> List[str]:
    return [f for f in fields if not isinstance(record.get(f), str)]


def load_documents(path: Union[str, Path], strict: bool = True) -> List[Document]:
    """Load a documents file; lenient mode skips bad records with a warning."""
    source_path = str(path)
    documents: List[Document] = []
    seen_ids = set()
    skipped = 0
    for line_number, record in read_jsonl(path):
        missing = _missing_fields(record, DOCUMENT_FIELDS)
        problem = None
        if missing:
            problem = f"missing required field(s): {', '.join(missing)}"
        elif not record["text"].strip():
            problem = "text is empty"
        elif not _TOKEN_RE.search(record["disease"]):
            problem = "disease has no tokens"
        if problem:
            if strict:
                raise RecordError(problem, line_number, source_path)
            logger.warning(f"[CORPUS] Skipping {source_path}:{line_number}: {problem}")
            skipped += 1
            continue
        if record["id"] in seen_ids:
            raise LoadError(f"Duplicate document id '{record['id']}' at {source_path}:{line_number}")
        seen_ids.add(record["id"])
        documents.append(Document(**{f: record[f] for f in DOCUMENT_FIELDS}))

    logger.info(f"[CORPUS] Loaded {len(documents)} documents from {source_path} ({skipped} skipped)")
    return documents


def load_qa_pairs(path: Union[str, Path], strict: bool = True) -> List[QAPair]:
    pairs: List[QAPair] = []
    for line_number, record in read_jsonl(path):
        missing = [f for f in ("question", "answer") if not str(record.get(f) or "").strip()]
        if missing:
            if strict:
                raise RecordError(f"missing required field(s): {', '.join(missing)}", line_number, str(path))
            logger.warning(f"[CORPUS] Skipping QA pair at {path}:{line_number}")
            continue
        pairs.append(QAPair(question=record["question"], answer=record["answer"], source=str(record.get("source", ""))))
    logger.info(f"[CORPUS] Loaded {len(pairs)} QA pairs from {path}")
    return pairs


def preprocess_documents(
        docs: List[Document],
        coref_provider: Optional[CoreferenceProvider] = None,
) -> List[Document]:
    """Abbreviation expansion, then coreference resolution against each document's disease."""
    processed = []
    expanded_total = 0
    for doc in docs:
        text, mapping = expand_abbreviations(doc.text)
        expanded_total += len(mapping)
        if text.strip():
            text = resolve_coreferences(text, doc.disease, coref_provider)
        processed.append(doc.model_copy(update={"text": text}))
    logger.info(f"[CORPUS] Pre-processed {len(docs)} documents ({expanded_total} abbreviation definitions)")
    return processed


def _split_word(word: str, max_tokens: int) -> List[str]:
    tokens = list(_TOKEN_RE.finditer(word))
    pieces = []
    start = 0
    for i in range(max_tokens, len(tokens), max_tokens):
        cut = tokens[i].start()
        pieces.append(word[start:cut])
        start = cut
    pieces.append(word[start:])
    return pieces


def _units(block: str, max_tokens: int) -> List[str]:
    units = []
    for sentence in _SENTENCE_BOUNDARY_RE.split(block):
        if count_tokens(sentence) <= max_tokens:
            units.append(sentence)
            continue
        for word in sentence.split():
            if count_tokens(word) <= max_tokens:
                units.append(word)
            else:
                units.extend(_split_word(word, max_tokens))
    return units


def _split_block(block: str, max_tokens: int) -> List[str]:
    if count_tokens(block) <= max_tokens:
        return [block]
    chunks = []
    current: List[str] = []
    current_tokens = 0
    for unit in _units(block, max_tokens):
        unit_tokens = count_tokens(unit)
        if current and current_tokens + unit_tokens > max_tokens:
            chunks.append(" ".join(current))
            current, current_tokens = [], 0
        current.append(unit)
        current_tokens += unit_tokens
    if current:
        chunks.append(" ".join(current))
    return chunks


def chunk_paragraphs(docs: List[Document], max_tokens: int) -> List[Paragraph]:
    """Split on blank lines, then greedily re-split oversize blocks at sentence boundaries."""
    if max_tokens < 1:
        raise ConfigError("max_tokens must be >= 1")
    paragraphs: List[Paragraph] = []
    for doc in docs:
        ordinal = 0
        for raw_block in _BLOCK_RE.split(doc.text):
            block = normalize_whitespace(raw_block)
            if not block:
                continue
            for chunk in _split_block(block, max_tokens):
                paragraphs.append(Paragraph(
                    doc_id=doc.id,
                    ordinal=ordinal,
                    text=chunk,
                    token_count=count_tokens(chunk),
                ))
                ordinal += 1
    logger.info(f"[CORPUS] Chunked {len(docs)} documents into {len(paragraphs)} paragraphs (cap {max_tokens})")
    return paragraphs


def write_paragraphs(paragraphs: List[Paragraph], path: Union[str, Path]) -> int:
    return write_jsonl(path, (p.model_dump() for p in paragraphs))
