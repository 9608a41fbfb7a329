"""Graph files: ``triples.tsv`` (head, relation, tail labels) plus ``entities.jsonl``."""
import json
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

from app.exception.exception import GraphParseError, LoadError
from app.jsonl import read_jsonl

from .knowledge_graph import KnowledgeGraph
from .models import HAS_CUI, Entity, EntityKind

logger = logging.getLogger(__name__)

TRIPLES_FILE = "triples.tsv"
ENTITIES_FILE = "entities.jsonl"

_HEAD_KINDS = (EntityKind.DISEASE, EntityKind.TERM, EntityKind.CUI)
_TAIL_KINDS = (EntityKind.TERM, EntityKind.DISEASE, EntityKind.CUI)
_CUI_TAIL_KINDS = (EntityKind.CUI,)


def persist_graph(kg: KnowledgeGraph, path: Union[str, Path]) -> Path:
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / ENTITIES_FILE).open("w", encoding="utf-8", newline="\n") as handle:
        for entity in kg.entities:
            handle.write(json.dumps({"label": entity.label, "kind": entity.kind.value}, ensure_ascii=False) + "\n")
    with (directory / TRIPLES_FILE).open("w", encoding="utf-8", newline="\n") as handle:
        for head, relation, tail in kg.iter_triples():
            handle.write(f"{head.label}\t{relation}\t{tail.label}\n")
    logger.info(f"[KG] Persisted {len(kg)} entities and {len(kg.triples)} triples to {directory}")
    return directory


def _resolve(kg: KnowledgeGraph, label: str, kinds: Sequence[EntityKind]) -> Optional[Entity]:
    for kind in kinds:
        entity = kg.find(kind, label)
        if entity is not None:
            return entity
    return None


def load_graph(path: Union[str, Path]) -> KnowledgeGraph:
    directory = Path(path)
    entities_path = directory / ENTITIES_FILE
    triples_path = directory / TRIPLES_FILE
    if not entities_path.exists() or not triples_path.exists():
        raise LoadError(f"Graph directory {directory} needs {ENTITIES_FILE} and {TRIPLES_FILE}")

    kg = KnowledgeGraph()
    for line_number, record in read_jsonl(entities_path):
        try:
            kind = EntityKind(record.get("kind"))
            label = record["label"]
        except (KeyError, ValueError):
            raise GraphParseError("entity record needs 'label' and a valid 'kind'", line_number, str(entities_path))
        before = len(kg)
        try:
            kg.add_entity(label, kind)
        except ValueError as e:
            raise GraphParseError(str(e), line_number, str(entities_path))
        if len(kg) == before:
            raise GraphParseError(f"duplicate {kind.value} entity '{label}'", line_number, str(entities_path))

    with triples_path.open("r", encoding="utf-8") as handle:
        for line_number, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise GraphParseError(f"expected 3 tab-separated fields, got {len(fields)}", line_number, str(triples_path))
            head_label, relation, tail_label = fields
            head = _resolve(kg, head_label, _HEAD_KINDS)
            tail = _resolve(kg, tail_label, _CUI_TAIL_KINDS if relation == HAS_CUI else _TAIL_KINDS)
            if head is None or tail is None:
                missing = head_label if head is None else tail_label
                raise GraphParseError(f"unknown entity '{missing}'", line_number, str(triples_path))
            kg.add_triple(head.id, relation, tail.id)

    logger.info(f"[KG] Loaded {len(kg)} entities and {len(kg.triples)} triples from {directory}")
    return kg
