"""Question to (disease, relation) matching.

Diseases are matched fuzzily over question n-grams with a Levenshtein ratio;
relations by contiguous token match against an alias table.
"""
import logging
from typing import Dict, List, Optional, Tuple

from Levenshtein import distance

from app.graph.knowledge_graph import KnowledgeGraph
from app.graph.models import EntityKind
from app.text import normalize, tokenize

from .models import DiseaseMatch

logger = logging.getLogger(__name__)


def similarity_ratio(a: str, b: str) -> float:
    """1 - levenshtein(a, b) / max(|a|, |b|)."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - distance(a, b) / longest


def _ngrams(tokens: List[str], max_n: int) -> List[str]:
    grams = []
    for n in range(1, min(max_n, len(tokens)) + 1):
        for start in range(len(tokens) - n + 1):
            grams.append(" ".join(tokens[start:start + n]))
    return grams


def match_entity(question: str, candidates: Dict[int, str], threshold: float) -> Optional[Tuple[int, float]]:
    """Best fuzzy match of question n-grams against normalized labels keyed by id.

    Ties go to the longer label, then the lexicographically smaller one.
    """
    if not candidates:
        return None
    tokens = tokenize(question)
    max_n = max(len(label.split()) for label in candidates.values())
    grams = set(_ngrams(tokens, max_n))
    if not grams:
        return None
    scored = []
    for entity_id, label in candidates.items():
        ratio = max(similarity_ratio(g, label) for g in grams)
        if ratio >= threshold:
            scored.append((-ratio, -len(label), label, entity_id))
    if not scored:
        return None
    best = min(scored)
    return best[3], -best[0]


def match_disease(question: str, kg: KnowledgeGraph, threshold: float = 0.85) -> Optional[DiseaseMatch]:
    diseases = {e.id: e.norm_label for e in kg.entities_of_kind(EntityKind.DISEASE)}
    if not diseases:
        logger.warning("[JOINT] Knowledge graph has no disease entities")
        return None
    matched = match_entity(question, diseases, threshold)
    if matched is None:
        return None
    entity_id, ratio = matched
    return DiseaseMatch(entity_id=entity_id, label=kg.entity(entity_id).label, match_ratio=ratio)


def _relation_phrases(alias_map: Dict[str, str]) -> Dict[str, str]:
    phrases: Dict[str, str] = {}
    for alias, relation in alias_map.items():
        phrases.setdefault(normalize(alias), relation)
    for relation in sorted(set(alias_map.values())):
        name = normalize(relation.replace("_", " "))
        variants = [name, name[:-1] if name.endswith("s") else name + "s"]
        for variant in variants:
            if variant:
                phrases.setdefault(variant, relation)
    phrases.pop("", None)
    return phrases


def _find(tokens: List[str], phrase: List[str]) -> int:
    n = len(phrase)
    for start in range(len(tokens) - n + 1):
        if tokens[start:start + n] == phrase:
            return start
    return -1


def match_relation(question: str, alias_map: Dict[str, str]) -> Optional[str]:
    """Relation of the longest alias phrase appearing contiguously in the question."""
    tokens = tokenize(question)
    hits = []
    for phrase, relation in _relation_phrases(alias_map).items():
        phrase_tokens = phrase.split()
        position = _find(tokens, phrase_tokens)
        if position >= 0:
            hits.append((-len(phrase_tokens), -len(phrase), position, relation, phrase))
    if not hits:
        return None
    hits.sort()
    winner = hits[0]
    alternatives = sorted({h[3] for h in hits[1:] if h[3] != winner[3]})
    if alternatives:
        logger.warning(f"[JOINT] Relation '{winner[3]}' (via '{winner[4]}') chosen over {alternatives}")
    return winner[3]
