import re

from app.exception.exception import MetricError
from app.text import split_sentences, tokenize

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")


def count_syllables(word: str) -> int:
    """Vowel groups, minus a silent final 'e' (but not '-le'), at least one."""
    word = word.lower()
    count = len(_VOWEL_GROUP_RE.findall(word))
    if word.endswith("e") and not word.endswith("le"):
        count -= 1
    return max(count, 1)


def flesch_reading_ease_raw(text: str) -> float:
    words = tokenize(text)
    if not words:
        raise MetricError("Flesch reading ease needs at least one word")
    sentences = max(len(split_sentences(text)), 1)
    syllables = sum(count_syllables(w) for w in words)
    return 206.835 - 1.015 * (len(words) / sentences) - 84.6 * (syllables / len(words))


def flesch_reading_ease(text: str) -> float:
    """Reading ease on the 0-100 scale; use the raw variant for unclamped values."""
    return min(max(flesch_reading_ease_raw(text), 0.0), 100.0)
