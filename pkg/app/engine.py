"""Runtime bundle of everything one question needs: graph, index, encoder, generator."""
import logging
import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

from langchain_core.embeddings import Embeddings

from app.config import Settings, load_settings
from app.exception.exception import ConfigError
from app.generation.providers import AnswerGenerator, make_generator
from app.graph.knowledge_graph import KnowledgeGraph
from app.graph.models import ALL_RELATIONS
from app.graph.query import extract_subgraph, subgraph_text
from app.graph.store import load_graph
from app.kg_embedding.models import TripletAnswer
from app.kg_embedding.triplet import triplet_query
from app.knowledge.embeddings import make_text_encoder
from app.knowledge.vectordb import VectorIndex, load_index
from app.langgraph.agent import answer_question
from app.langgraph.matching import match_disease
from app.langgraph.models import AskOptions, FinalAnswer

logger = logging.getLogger(__name__)

KG_DIR_ENV = "KGQA_KG_DIR"
INDEX_PATH_ENV = "KGQA_INDEX_PATH"


@dataclass
class QAEngine:
    settings: Settings
    kg: KnowledgeGraph
    index: Optional[VectorIndex]
    embeddings: Embeddings
    generator: AnswerGenerator

    @classmethod
    def from_paths(
            cls,
            settings: Settings,
            kg_dir: Union[str, Path],
            index_path: Optional[Union[str, Path]],
            provider: Optional[str] = None,
    ) -> "QAEngine":
        kg = load_graph(kg_dir)
        index = load_index(index_path) if index_path else None
        logger.info(f"[ENGINE] Loaded graph with {len(kg)} entities from {kg_dir}")
        return cls(
            settings=settings,
            kg=kg,
            index=index,
            embeddings=make_text_encoder(settings.retrieval),
            generator=make_generator(settings.generation, provider),
        )

    def default_options(self, **overrides) -> AskOptions:
        reasoning = self.settings.reasoning
        values = {
            "k": self.settings.retrieval.k,
            "fuzzy_threshold": reasoning.fuzzy_threshold,
            "all_relations_when_unmatched": reasoning.all_relations_when_unmatched,
            "synonym_expansion": self.settings.graph.synonym_expansion,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return AskOptions(**values)

    def ask(self, question: str, options: Optional[AskOptions] = None) -> FinalAnswer:
        options = options or self.default_options()
        if self.index is None and not options.no_vdb:
            raise ConfigError("A vector index is required unless no_vdb is set")
        return answer_question(
            question,
            self.kg,
            self.index,
            self.generator,
            self.settings.generation.params,
            self.embeddings,
            self.settings.reasoning.relation_aliases,
            options,
            max_concurrency=self.settings.generation.max_concurrency,
        )

    def triplet(self, question: str) -> TripletAnswer:
        return triplet_query(
            question, self.kg, self.settings.reasoning.relation_aliases, self.settings.reasoning.fuzzy_threshold
        )

    def subgraph(self, disease: str, relation: Optional[str] = None) -> Optional[dict]:
        matched = match_disease(disease, self.kg, self.settings.reasoning.fuzzy_threshold)
        if matched is None:
            return None
        relation = relation or ALL_RELATIONS
        nodes = extract_subgraph(self.kg, matched.entity_id, relation, self.settings.graph.synonym_expansion)
        return {
            "disease": matched.label,
            "relation": relation,
            "nodes": [n.label for n in nodes],
            "subgraph_text": subgraph_text(nodes),
        }


@lru_cache(maxsize=1)
def get_engine() -> QAEngine:
    """Engine for the HTTP surface, configured through the environment."""
    settings = load_settings()
    kg_dir = os.environ.get(KG_DIR_ENV)
    if not kg_dir:
        raise ConfigError(f"{KG_DIR_ENV} must point at a persisted knowledge graph")
    return QAEngine.from_paths(settings, kg_dir, os.environ.get(INDEX_PATH_ENV))
