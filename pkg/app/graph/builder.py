import logging
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

from app.corpus.models import Document
from app.exception.exception import LoadError, RecordError
from app.jsonl import read_jsonl
from app.text import count_tokens, normalize_whitespace

from .knowledge_graph import KnowledgeGraph
from .models import HAS_CUI, EntityKind

logger = logging.getLogger(__name__)

# Section bodies are lists: one node per item.
_PHRASE_SPLIT_RE = re.compile(r"[\n;,•·▪●◦‣]")
_PHRASE_STRIP = " \t\r-*.:–—"


def split_phrases(text: str, max_tokens: int = 12) -> List[str]:
    """List items of a section; long prose sentences are not items and are dropped."""
    phrases = []
    for raw in _PHRASE_SPLIT_RE.split(text):
        phrase = normalize_whitespace(raw).strip(_PHRASE_STRIP)
        tokens = count_tokens(phrase)
        if tokens == 0 or tokens > max_tokens:
            continue
        phrases.append(phrase)
    return phrases


def build_graph(
        docs: List[Document],
        relation_set: Iterable[str],
        phrase_max_tokens: int = 12,
        prose_sections: Iterable[str] = ("overview",),
        strict: bool = False,
) -> KnowledgeGraph:
    """Disease nodes, shared term nodes, and one (disease, section, term) triple per phrase."""
    relations = set(relation_set)
    prose = set(prose_sections)
    kg = KnowledgeGraph()
    skipped = 0
    for doc in docs:
        if doc.section not in relations:
            message = f"Document '{doc.id}' has section '{doc.section}' outside the relation set"
            if strict:
                raise LoadError(message)
            logger.warning(f"[KG] {message}; skipped")
            skipped += 1
            continue
        disease = kg.add_entity(doc.disease, EntityKind.DISEASE)
        if doc.section in prose:
            continue
        for phrase in split_phrases(doc.text, phrase_max_tokens):
            term = kg.add_entity(phrase, EntityKind.TERM)
            kg.add_triple(disease.id, doc.section, term.id)

    logger.info(
        f"[KG] Built graph: {len(kg.entities_of_kind(EntityKind.DISEASE))} diseases, "
        f"{len(kg)} entities, {len(kg.triples)} triples ({skipped} documents skipped)"
    )
    return kg


def link_synonyms(kg: KnowledgeGraph, cui_map: Dict[str, str]) -> KnowledgeGraph:
    """Return a copy of the graph with one CUI node per concept id and has_cui edges."""
    linked = kg.copy()
    applied = 0
    for disease_label, cui in cui_map.items():
        disease = linked.find(EntityKind.DISEASE, disease_label)
        if disease is None:
            logger.warning(f"[KG] CUI map names unknown disease '{disease_label}'; link skipped")
            continue
        cui_entity = linked.add_entity(cui, EntityKind.CUI)
        if linked.add_triple(disease.id, HAS_CUI, cui_entity.id):
            applied += 1
    logger.info(f"[KG] Linked {applied} diseases to CUI nodes")
    return linked


def load_cui_map(path: Union[str, Path]) -> Dict[str, str]:
    cui_map: Dict[str, str] = {}
    for line_number, record in read_jsonl(path):
        disease: Optional[str] = record.get("disease")
        cui: Optional[str] = record.get("cui")
        if not isinstance(disease, str) or not isinstance(cui, str) or not disease or not cui:
            raise RecordError("cui map record needs 'disease' and 'cui'", line_number, str(path))
        cui_map[disease] = cui
    return cui_map
