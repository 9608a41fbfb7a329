import logging
from typing import Any, Dict, List, Optional

from langchain_core.embeddings import Embeddings
from langchain_core.runnables import RunnableConfig
from langgraph.graph import END, StateGraph

from app.config import GenerationParams
from app.exception.exception import NoCandidatesError
from app.generation.models import Candidate
from app.generation.providers import AnswerGenerator
from app.generation.service import generate_candidates, generate_without_context
from app.graph.knowledge_graph import KnowledgeGraph
from app.graph.models import ALL_RELATIONS
from app.graph.query import extract_subgraph, subgraph_text
from app.knowledge.vectordb import VectorIndex, query_knowledge_base
from app.metrics.rouge import rouge_l
from app.text import slugify

from .matching import match_disease, match_relation
from .models import AnswerMode, AskOptions, FinalAnswer, QuestionParse
from .state import JointState

logger = logging.getLogger(__name__)


def rerank_candidates(candidates: List[Candidate], subgraph_text: str) -> List[Candidate]:
    """Fill each candidate's ROUGE-L F1 against the subgraph-text; order is kept."""
    return [
        c.model_copy(update={"rerank_score": rouge_l(c.answer_text, subgraph_text).f1})
        for c in candidates
    ]


def select_candidate(candidates: List[Candidate]) -> Candidate:
    """Highest rerank score; equal scores go to the lowest retrieval rank."""
    if not candidates:
        raise NoCandidatesError("No candidate answers to select from")
    return max(candidates, key=lambda c: (c.rerank_score or 0.0, -c.rank_in_retrieval))


def _configurable(config: RunnableConfig) -> Dict[str, Any]:
    return config.get("configurable", {})


def retrieve_contexts(state: JointState, config: RunnableConfig) -> Dict:
    conf = _configurable(config)
    options: AskOptions = conf["options"]
    if options.no_vdb:
        logger.info("[JOINT] No-VDB mode: skipping retrieval")
        return {"contexts": []}
    docs = query_knowledge_base(conf["index"], state["question"], conf["embeddings"], k=options.k)
    return {"contexts": [(d.metadata["doc_id"], d.page_content) for d in docs]}


def generate_answers(state: JointState, config: RunnableConfig) -> Dict:
    conf = _configurable(config)
    options: AskOptions = conf["options"]
    params: GenerationParams = conf["params"]
    generator: AnswerGenerator = conf["generator"]
    if options.no_vdb:
        candidates = generate_without_context(state["question"], params, generator, state["question_id"])
    else:
        if not state["contexts"]:
            raise NoCandidatesError("Retrieval returned no contexts")
        candidates = generate_candidates(
            state["question"], state["contexts"], params, generator,
            question_id=state["question_id"], max_concurrency=conf.get("max_concurrency", 5),
        )
    if not candidates:
        raise NoCandidatesError(f"No candidates generated for {state['question_id']}")
    return {"candidates": candidates}


def parse_question(state: JointState, config: RunnableConfig) -> Dict:
    conf = _configurable(config)
    options: AskOptions = conf["options"]
    disease = match_disease(state["question"], conf["kg"], options.fuzzy_threshold)
    relation = match_relation(state["question"], conf["relation_aliases"])
    parse = QuestionParse(raw_question=state["question"], disease=disease, relation=relation)
    logger.info(
        f"[JOINT] Parsed question: disease={disease.label if disease else None} relation={relation}"
    )
    use_kg = not options.no_joint_reasoning and disease is not None and (
            relation is not None or options.all_relations_when_unmatched)
    return {"parse": parse, "use_kg": use_kg}


def route_after_parse(state: JointState) -> str:
    return "subgraph" if state.get("use_kg") else "fallback"


def build_subgraph_text(state: JointState, config: RunnableConfig) -> Dict:
    conf = _configurable(config)
    options: AskOptions = conf["options"]
    parse = state["parse"]
    relation = parse.relation or ALL_RELATIONS
    nodes = extract_subgraph(conf["kg"], parse.disease.entity_id, relation, options.synonym_expansion)
    text = subgraph_text(nodes)
    logger.info(f"[JOINT] Subgraph for ({parse.disease.label}, {relation}): {len(nodes)} nodes")
    return {"subgraph_text": text}


def rerank(state: JointState) -> Dict:
    return {"candidates": rerank_candidates(state["candidates"], state.get("subgraph_text", ""))}


def select_answer(state: JointState) -> Dict:
    candidates = state["candidates"]
    chosen = select_candidate(candidates)
    logger.info(f"[JOINT] Selected candidate rank {chosen.rank_in_retrieval} (score={chosen.rerank_score:.4f})")
    return {"final": FinalAnswer(
        answer_text=chosen.answer_text,
        chosen_rank=chosen.rank_in_retrieval,
        rerank_scores=[c.rerank_score for c in candidates],
        parse=state["parse"],
        mode=AnswerMode.JOINT_REASONING,
        subgraph_text=state.get("subgraph_text", ""),
        candidates=candidates,
    )}


def fallback_first_candidate(state: JointState) -> Dict:
    candidates = rerank_candidates(state["candidates"], "")
    first = min(candidates, key=lambda c: c.rank_in_retrieval)
    logger.info("[JOINT] Falling back to the first retrieved candidate")
    return {"final": FinalAnswer(
        answer_text=first.answer_text,
        chosen_rank=first.rank_in_retrieval,
        rerank_scores=[c.rerank_score for c in candidates],
        parse=state["parse"],
        mode=AnswerMode.FALLBACK_FIRST_CANDIDATE,
        candidates=candidates,
    )}


workflow = StateGraph(JointState)

workflow.add_node("retrieve", retrieve_contexts)
workflow.add_node("generate", generate_answers)
workflow.add_node("parse_question", parse_question)
workflow.add_node("subgraph", build_subgraph_text)
workflow.add_node("rerank", rerank)
workflow.add_node("select", select_answer)
workflow.add_node("fallback", fallback_first_candidate)

workflow.set_entry_point("retrieve")
workflow.add_edge("retrieve", "generate")
workflow.add_edge("generate", "parse_question")
workflow.add_conditional_edges(
    "parse_question",
    route_after_parse,
    {
        "subgraph": "subgraph",
        "fallback": "fallback",
    }
)
workflow.add_edge("subgraph", "rerank")
workflow.add_edge("rerank", "select")
workflow.add_edge("select", END)
workflow.add_edge("fallback", END)

joint_reasoning_graph = workflow.compile()


def answer_question(
        question: str,
        kg: KnowledgeGraph,
        index: Optional[VectorIndex],
        provider: AnswerGenerator,
        params: GenerationParams,
        embeddings: Embeddings,
        relation_aliases: Dict[str, str],
        options: Optional[AskOptions] = None,
        max_concurrency: int = 5,
) -> FinalAnswer:
    """Retrieve, generate, parse, then pick the candidate closest to the KG subgraph."""
    options = options or AskOptions()
    question_id = options.question_id or slugify(question)
    logger.info(f"[JOINT] Answering {question_id}: {question[:50]}")
    state = joint_reasoning_graph.invoke(
        {"question": question, "question_id": question_id},
        config={"configurable": {
            "kg": kg,
            "index": index,
            "embeddings": embeddings,
            "generator": provider,
            "params": params,
            "relation_aliases": relation_aliases,
            "options": options,
            "max_concurrency": max_concurrency,
        }},
    )
    return state["final"]
