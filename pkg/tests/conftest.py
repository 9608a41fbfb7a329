import math
from pathlib import Path

import pytest

from app.config import DEFAULT_RELATION_SET, Settings
from app.corpus.models import Document
from app.corpus.service import load_documents
from app.generation.providers import FixtureGenerator
from app.graph.builder import build_graph, link_synonyms, load_cui_map
from app.knowledge.embeddings import HashingEmbeddings
from app.knowledge.models import EmbeddingVector
from app.knowledge.vectordb import VectorIndex, build_index

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "data" / "fixtures"

# Five contexts at 0, 10, ..., 40 degrees from the query direction (1, 0).
CONTEXT_IDS = ["ctx-0", "ctx-1", "ctx-2", "ctx-3", "ctx-4"]
QUERY_VECTOR = [1.0, 0.0]


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def fixture_docs():
    return load_documents(FIXTURES / "documents.jsonl")


@pytest.fixture
def fixture_kg(fixture_docs):
    kg = build_graph(fixture_docs, DEFAULT_RELATION_SET)
    return link_synonyms(kg, load_cui_map(FIXTURES / "cui_map.jsonl"))


@pytest.fixture
def fixture_index(fixture_docs):
    return build_index(fixture_docs, HashingEmbeddings())


@pytest.fixture
def fixture_generator():
    return FixtureGenerator.from_file(FIXTURES / "generator_answers.jsonl")


@pytest.fixture
def fixture_engine(fixture_kg, fixture_index, fixture_generator):
    from app.engine import QAEngine

    return QAEngine(
        settings=Settings(),
        kg=fixture_kg,
        index=fixture_index,
        embeddings=HashingEmbeddings(),
        generator=fixture_generator,
    )


@pytest.fixture
def ranked_index() -> VectorIndex:
    """Index whose retrieval order for QUERY_VECTOR is ctx-0 .. ctx-4."""
    vectors = []
    for i, doc_id in enumerate(CONTEXT_IDS):
        angle = math.radians(10 * i)
        vectors.append(EmbeddingVector(id=doc_id, dim=2, values=[math.cos(angle), math.sin(angle)]))
    return VectorIndex.from_vectors(vectors, {doc_id: f"context text {doc_id}" for doc_id in CONTEXT_IDS})


@pytest.fixture
def mouth_cancer_kg():
    docs = [
        Document(id="mc-symptoms", disease="Mouth cancer", section="symptoms",
                 text="Mouth pain; Ear pain; Loose teeth"),
        Document(id="mc-causes", disease="Mouth cancer", section="causes",
                 text="Tobacco use; Heavy alcohol use"),
    ]
    return build_graph(docs, DEFAULT_RELATION_SET)


def hub_kg():
    """60 entities, 5 relations, 300 triples.

    Items 0..29 fall in three classes (item mod 3). For each relation an item points
    at the two hubs reserved for its class, so every tail is a translation of the
    class point.
    """
    from app.graph.knowledge_graph import KnowledgeGraph
    from app.graph.models import EntityKind

    kg = KnowledgeGraph()
    for h in range(30):
        kg.add_entity(f"item {h}", EntityKind.DISEASE)
    for j in range(30):
        kg.add_entity(f"hub {j}", EntityKind.TERM)
    for r in range(5):
        for h in range(30):
            first = 30 + 6 * r + 2 * (h % 3)
            kg.add_triple(h, f"r{r}", first)
            kg.add_triple(h, f"r{r}", first + 1)
    return kg
