from typing import Sequence

from app.text import tokenize

from .models import RougeScore


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest common subsequence length, O(|a|·|b|) time, O(|b|) memory."""
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Whole-text ROUGE-L over shared-tokenizer tokens (no stemming, no stopwords)."""
    candidate_tokens = tokenize(candidate)
    reference_tokens = tokenize(reference)
    overlap = lcs_length(candidate_tokens, reference_tokens)
    return RougeScore.from_counts(overlap, len(candidate_tokens), len(reference_tokens))
