import logging
from typing import Dict, List

from app.text import normalize

from .knowledge_graph import KnowledgeGraph
from .models import ALL_RELATIONS, HAS_CUI, Entity, EntityKind

logger = logging.getLogger(__name__)


def _relations_for(kg: KnowledgeGraph, disease: int, relation: str) -> List[str]:
    if relation == ALL_RELATIONS:
        return [r for r in kg.relations_of(disease) if r != HAS_CUI]
    return [relation]


def extract_subgraph(
        kg: KnowledgeGraph,
        disease: int,
        relation: str,
        synonym_expansion: bool = True,
) -> List[Entity]:
    """Tails of (disease, relation, *), then tails reached through synonymous diseases."""
    if kg.entity(disease).kind != EntityKind.DISEASE:
        raise ValueError(f"Entity {disease} is not a disease")

    collected: Dict[int, None] = {}
    for rel in _relations_for(kg, disease, relation):
        for tail in kg.tails(disease, rel):
            collected.setdefault(tail, None)

    if synonym_expansion:
        for synonym in kg.synonyms(disease):
            for rel in _relations_for(kg, synonym, relation):
                for tail in kg.tails(synonym, rel):
                    collected.setdefault(tail, None)

    return [kg.entity(i) for i in collected]


def subgraph_text(nodes: List[Entity]) -> str:
    seen = set()
    labels = []
    for node in nodes:
        key = node.norm_label or normalize(node.label)
        if key in seen:
            continue
        seen.add(key)
        labels.append(node.label)
    return ", ".join(labels)
