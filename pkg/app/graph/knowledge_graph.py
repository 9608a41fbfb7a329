from typing import Dict, Iterator, List, Optional, Tuple

import networkx as nx

from app.text import normalize, normalize_whitespace

from .models import HAS_CUI, Entity, EntityKind, Triple


class KnowledgeGraph:
    """Entities and typed triples over a networkx MultiDiGraph.

    Edge keys are relation names, so (head, relation, tail) is unique by
    construction. A separate head -> relation -> tails index keeps insertion
    order per relation.
    """

    def __init__(self):
        self.graph = nx.MultiDiGraph()
        self._entities: List[Entity] = []
        self._keys: Dict[Tuple[EntityKind, str], int] = {}
        self._triples: List[Triple] = []
        self._adjacency: Dict[int, Dict[str, List[int]]] = {}

    def __len__(self) -> int:
        return len(self._entities)

    @property
    def entities(self) -> List[Entity]:
        return list(self._entities)

    @property
    def triples(self) -> List[Triple]:
        return list(self._triples)

    @property
    def adjacency(self) -> Dict[int, Dict[str, List[int]]]:
        return {h: {r: list(ts) for r, ts in rels.items()} for h, rels in self._adjacency.items()}

    def entity(self, entity_id: int) -> Entity:
        return self._entities[entity_id]

    def find(self, kind: EntityKind, label: str) -> Optional[Entity]:
        entity_id = self._keys.get((kind, normalize(label)))
        return None if entity_id is None else self._entities[entity_id]

    def entities_of_kind(self, kind: EntityKind) -> List[Entity]:
        return [e for e in self._entities if e.kind == kind]

    def add_entity(self, label: str, kind: EntityKind) -> Entity:
        """Get or create the entity keyed by (kind, norm_label); first casing wins."""
        label = normalize_whitespace(label)
        norm_label = normalize(label)
        if not norm_label:
            raise ValueError(f"Entity label has no tokens: {label!r}")
        existing = self._keys.get((kind, norm_label))
        if existing is not None:
            return self._entities[existing]
        entity = Entity(id=len(self._entities), label=label, kind=kind, norm_label=norm_label)
        self._entities.append(entity)
        self._keys[(kind, norm_label)] = entity.id
        self.graph.add_node(entity.id, label=label, kind=kind.value)
        return entity

    def add_triple(self, head: int, relation: str, tail: int) -> bool:
        if head >= len(self._entities) or tail >= len(self._entities):
            raise ValueError(f"Triple endpoint does not resolve: ({head}, {relation}, {tail})")
        if self.graph.has_edge(head, tail, key=relation):
            return False
        self.graph.add_edge(head, tail, key=relation)
        self._triples.append(Triple(head=head, relation=relation, tail=tail))
        self._adjacency.setdefault(head, {}).setdefault(relation, []).append(tail)
        return True

    def relations_of(self, head: int) -> List[str]:
        return list(self._adjacency.get(head, {}))

    def relations(self) -> List[str]:
        seen: Dict[str, None] = {}
        for triple in self._triples:
            seen.setdefault(triple.relation, None)
        return list(seen)

    def tails(self, head: int, relation: str) -> List[int]:
        return list(self._adjacency.get(head, {}).get(relation, []))

    def heads(self, relation: str, tail: int) -> List[int]:
        return [h for h in self.graph.predecessors(tail) if self.graph.has_edge(h, tail, key=relation)]

    def synonyms(self, disease: int) -> List[int]:
        """Diseases two hops away through a shared CUI node."""
        found: Dict[int, None] = {}
        for cui in self.tails(disease, HAS_CUI):
            for other in self.heads(HAS_CUI, cui):
                if other != disease:
                    found.setdefault(other, None)
        return list(found)

    def iter_triples(self) -> Iterator[Tuple[Entity, str, Entity]]:
        for t in self._triples:
            yield self._entities[t.head], t.relation, self._entities[t.tail]

    def copy(self) -> "KnowledgeGraph":
        clone = KnowledgeGraph()
        for entity in self._entities:
            clone.add_entity(entity.label, entity.kind)
        for t in self._triples:
            clone.add_triple(t.head, t.relation, t.tail)
        return clone
