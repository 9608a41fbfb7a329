"""Text primitives shared by every module.

One tokenizer is used everywhere (retrieval, ROUGE-L, matching, token caps) so
that scores computed in different places agree with each other.
"""
import re
from typing import List

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_SENTENCE_END_RE = re.compile(r"(?<=[.?!])(?:\s+|$)")
_WHITESPACE_RE = re.compile(r"\s+")


def tokenize(text: str) -> List[str]:
    """Lowercase and split on every non-alphanumeric run."""
    return _TOKEN_RE.findall(text.lower())


def count_tokens(text: str) -> int:
    return len(tokenize(text))


def normalize(text: str) -> str:
    """Tokenized-lowercase key used for entity identity and fuzzy matching."""
    return " ".join(tokenize(text))


def normalize_whitespace(text: str) -> str:
    return _WHITESPACE_RE.sub(" ", text).strip()


def split_sentences(text: str) -> List[str]:
    """Split on '.', '?' or '!' followed by whitespace or end of text."""
    return [s.strip() for s in _SENTENCE_END_RE.split(text) if s and s.strip()]


def word_count(text: str) -> int:
    return count_tokens(text)


def slugify(text: str) -> str:
    return "-".join(tokenize(text))
