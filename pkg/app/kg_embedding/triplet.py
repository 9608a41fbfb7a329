"""Question to triplet-pattern translation, answered by direct KG lookup."""
import logging
import re
from typing import Dict, Optional

from app.exception.exception import UnresolvablePatternError
from app.graph.knowledge_graph import KnowledgeGraph
from app.graph.models import EntityKind
from app.langgraph.matching import match_disease, match_entity, match_relation
from app.text import normalize

from .models import TripletAnswer, TripletPattern

logger = logging.getLogger(__name__)

# "which diseases ...", "what conditions ..." ask for the head
_REVERSE_CUE_RE = re.compile(r"\b(which|what)\s+(disease|diseases|condition|conditions|illness|illnesses)\b")


def match_term(question: str, kg: KnowledgeGraph, threshold: float, exclude: Optional[str] = None):
    terms = {e.id: e.norm_label for e in kg.entities_of_kind(EntityKind.TERM) if e.norm_label != exclude}
    matched = match_entity(question, terms, threshold)
    return None if matched is None else kg.entity(matched[0])


def triplet_query(
        question: str,
        kg: KnowledgeGraph,
        relation_aliases: Dict[str, str],
        threshold: float = 0.85,
) -> TripletAnswer:
    disease = match_disease(question, kg, threshold)
    relation = match_relation(question, relation_aliases)
    head_label = disease.label if disease else None
    term = match_term(question, kg, threshold, exclude=normalize(head_label) if head_label else None)
    reverse = bool(_REVERSE_CUE_RE.search(normalize(question)))

    if relation and term and (reverse or disease is None):
        heads = [kg.entity(h) for h in kg.heads(relation, term.id)]
        answers = [e.label for e in heads if e.kind == EntityKind.DISEASE]
        result = TripletAnswer(pattern=TripletPattern.RELATION_TAIL.value, relation=relation,
                               tail=term.label, answers=answers)
    elif disease and relation:
        answers = [kg.entity(t).label for t in kg.tails(disease.entity_id, relation)]
        result = TripletAnswer(pattern=TripletPattern.HEAD_RELATION.value, head=disease.label,
                               relation=relation, answers=answers)
    elif disease and term:
        answers = [r for r in kg.relations_of(disease.entity_id) if term.id in kg.tails(disease.entity_id, r)]
        result = TripletAnswer(pattern=TripletPattern.HEAD_TAIL.value, head=disease.label,
                               tail=term.label, answers=answers)
    else:
        raise UnresolvablePatternError(
            f"unresolvable pattern: could not identify two of (head, relation, tail) in {question!r}",
            data={"head": head_label, "relation": relation, "tail": term.label if term else None},
        )
    logger.info(f"[TRANSE] Triplet {result.pattern} -> {len(result.answers)} answers")
    return result
