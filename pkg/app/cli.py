"""Command-line surface: build-kg, index, ask, eval, kg-embed, genq-chunk."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from app.config import Settings, load_settings
from app.exception.exception import ConfigError, KGQAException

logger = logging.getLogger(__name__)


def _print_json(payload) -> None:
    print(json.dumps(payload, indent=2, ensure_ascii=False, sort_keys=True))


def _coref_provider(settings: Settings):
    from app.corpus.coreference import CoreferenceProvider
    from app.providers.transport import SubprocessTransport

    if not settings.corpus.coref_command:
        return None
    return CoreferenceProvider(SubprocessTransport(settings.corpus.coref_command))


def _load_corpus(args, settings: Settings):
    from app.corpus.service import load_documents, preprocess_documents

    docs = load_documents(args.documents, strict=settings.corpus.strict and not args.lenient)
    if args.preprocess:
        docs = preprocess_documents(docs, _coref_provider(settings))
    return docs


def cmd_build_kg(args, settings: Settings) -> int:
    from app.graph.builder import build_graph, link_synonyms, load_cui_map
    from app.graph.store import persist_graph

    graph = settings.graph
    kg = build_graph(
        _load_corpus(args, settings),
        graph.relation_set,
        graph.phrase_max_tokens,
        graph.prose_sections,
        strict=graph.strict,
    )
    if args.cui_map:
        kg = link_synonyms(kg, load_cui_map(args.cui_map))
    persist_graph(kg, args.out)
    _print_json({"entities": len(kg), "triples": len(kg.triples), "out": str(args.out)})
    return 0


def cmd_index(args, settings: Settings) -> int:
    from app.knowledge.embeddings import make_text_encoder
    from app.knowledge.vectordb import build_index, persist_index

    strict = settings.retrieval.strict and not args.lenient
    index = build_index(_load_corpus(args, settings), make_text_encoder(settings.retrieval), strict=strict)
    path = persist_index(index, args.out)
    _print_json({"entries": len(index), "dim": index.dim, "out": str(path)})
    return 0


def cmd_ask(args, settings: Settings) -> int:
    from app.engine import QAEngine

    if args.fuzzy_threshold is not None:
        settings.reasoning.fuzzy_threshold = args.fuzzy_threshold
    engine = QAEngine.from_paths(settings, args.kg, None if args.no_vdb else args.index, args.provider)
    options = engine.default_options(
        k=args.k,
        no_joint_reasoning=args.no_joint_reasoning,
        no_vdb=args.no_vdb,
        question_id=args.question_id,
    )
    answer = engine.ask(args.question, options)
    _print_json({
        "answer": answer.answer_text,
        "mode": answer.mode.value,
        "chosen_rank": answer.chosen_rank,
        "parse": answer.parse.model_dump(mode="json"),
        "subgraph_text": answer.subgraph_text,
        "candidates": [
            {"rank": c.rank_in_retrieval, "context_id": c.context_id, "score": c.rerank_score}
            for c in answer.candidates
        ],
    })
    return 0


def _parse_systems(values: Sequence[str]) -> Dict[str, str]:
    systems: Dict[str, str] = {}
    for value in values:
        name, sep, path = value.partition("=")
        if not sep or not name or not path:
            raise ConfigError(f"--system expects NAME=PATH, got {value!r}")
        systems[name] = path
    return systems


def cmd_eval(args, settings: Settings) -> int:
    from app.evaluation.report import compute_overlaps, write_report
    from app.evaluation.service import (MetricContext, common_question_ids, length_filter, load_system_answers,
                                        load_testset, run_evaluation, summarize_scores)
    from app.knowledge.embeddings import make_text_encoder
    from app.metrics.entailment import make_nli_provider
    from app.metrics.similarity import make_sts_provider

    evaluation = settings.evaluation
    metrics = args.metrics.split(",") if args.metrics else evaluation.metrics
    reference = args.reference or evaluation.reference_system
    max_words = args.max_words or evaluation.max_words
    lenient = args.lenient or evaluation.lenient

    testset = load_testset(args.testset)
    answers = {name: load_system_answers(path, lenient) for name, path in _parse_systems(args.system).items()}
    if reference and reference not in answers:
        raise ConfigError(f"Reference system '{reference}' is not among --system entries")
    if max_words:
        answers = {name: length_filter(a, max_words)[0] for name, a in answers.items()}
        kept = set(common_question_ids(answers.values()))
        logger.info(f"[EVAL] Length control at {max_words} words keeps {len(kept)} questions")
        testset = [q for q in testset if q.id in kept]

    embeddings = make_text_encoder(settings.retrieval)
    needs = set(metrics)
    context = MetricContext(
        embeddings=embeddings,
        nli=make_nli_provider(settings.metrics) if "contradiction" in needs else None,
        sts=make_sts_provider(settings.metrics, embeddings) if "sts" in needs else None,
        entailment_threshold=settings.metrics.entailment_threshold,
        lenient=lenient,
    )
    records = []
    for name in sorted(answers):
        records.extend(run_evaluation(testset, answers[name], metrics, context, system=name))
    overall = summarize_scores(records, "overall", reference)
    per_category = summarize_scores(records, "category", reference)
    overlaps = compute_overlaps(records, reference) if reference else None
    out = write_report(args.out, records, overall, per_category, overlaps)
    print((out / "summary.txt").read_text(encoding="utf-8"), end="")
    return 0


def _transe_config(args, settings: Settings):
    overrides = {
        "dim": args.dim, "lr": args.lr, "batch_size": args.batch_size, "max_epochs": args.max_epochs,
        "negatives_per_positive": args.negatives, "patience": args.patience, "eval_every": args.eval_every,
        "norm_order": args.norm_order, "loss": args.loss, "seed": args.seed,
    }
    return settings.kg_embedding.model_copy(update={k: v for k, v in overrides.items() if v is not None})


def _split(kg, config):
    from app.kg_embedding.split import split_triples

    return split_triples(kg, config.split_ratios, config.seed, config.include_cui_links)


def cmd_kg_embed_train(args, settings: Settings) -> int:
    from app.graph.store import load_graph
    from app.kg_embedding.ranking import rank_metrics
    from app.kg_embedding.transe import persist_model, train_transe

    config = _transe_config(args, settings)
    kg = load_graph(args.kg)
    split = _split(kg, config)
    model = train_transe(split, config)
    model.entity_labels = [e.label for e in kg.entities]
    path = persist_model(model, args.out)
    report = rank_metrics(model, split.test)
    _print_json({
        "model": str(path),
        "epochs": len(model.history),
        "final_loss": model.history[-1] if model.history else None,
        "best_valid_mrr": model.best_valid_mrr,
        "test": report.model_dump(),
    })
    return 0


def cmd_kg_embed_eval(args, settings: Settings) -> int:
    from app.graph.store import load_graph
    from app.kg_embedding.ranking import rank_metrics
    from app.kg_embedding.transe import load_model

    config = _transe_config(args, settings)
    split = _split(load_graph(args.kg), config)
    report = rank_metrics(load_model(args.model), split.test)
    logger.info("[TRANSE] Ranking is raw (unfiltered); ties take the worst rank")
    _print_json(report.model_dump())
    return 0


def cmd_kg_embed_query(args, settings: Settings) -> int:
    from app.graph.store import load_graph
    from app.kg_embedding.triplet import triplet_query

    reasoning = settings.reasoning
    result = triplet_query(args.question, load_graph(args.kg), reasoning.relation_aliases, reasoning.fuzzy_threshold)
    _print_json(result.model_dump())
    return 0


def cmd_genq_chunk(args, settings: Settings) -> int:
    from app.corpus.service import chunk_paragraphs, write_paragraphs

    max_tokens = args.max_tokens or settings.corpus.max_tokens
    paragraphs = chunk_paragraphs(_load_corpus(args, settings), max_tokens)
    count = write_paragraphs(paragraphs, args.out)
    _print_json({"paragraphs": count, "max_tokens": max_tokens, "out": str(args.out)})
    return 0


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--documents", required=True, type=Path)
    parser.add_argument("--preprocess", action="store_true", help="expand abbreviations and resolve coreferences")
    parser.add_argument("--lenient", action="store_true", help="skip bad records with a warning")


def _add_transe_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--kg", required=True, type=Path)
    parser.add_argument("--dim", type=int)
    parser.add_argument("--lr", type=float)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--max-epochs", type=int)
    parser.add_argument("--negatives", type=int)
    parser.add_argument("--patience", type=int)
    parser.add_argument("--eval-every", type=int)
    parser.add_argument("--norm-order", type=int, choices=[1, 2])
    parser.add_argument("--loss", choices=["nll", "margin"])
    parser.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kgqa", description="Knowledge-graph grounded health QA")
    parser.add_argument("--config", type=Path, help="YAML configuration file")
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-kg", help="build and persist the knowledge graph")
    _add_corpus_args(p)
    p.add_argument("--cui-map", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_build_kg)

    p = sub.add_parser("index", help="embed documents into the vector index")
    _add_corpus_args(p)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_index)

    p = sub.add_parser("ask", help="answer one question")
    p.add_argument("--question", required=True)
    p.add_argument("--question-id")
    p.add_argument("--kg", required=True, type=Path)
    p.add_argument("--index", type=Path)
    p.add_argument("--provider", choices=["fixture", "subprocess", "http"])
    p.add_argument("--no-joint-reasoning", action="store_true")
    p.add_argument("--no-vdb", action="store_true")
    p.add_argument("--k", type=int, choices=range(1, 6), default=None)
    p.add_argument("--fuzzy-threshold", type=float)
    p.set_defaults(handler=cmd_ask)

    p = sub.add_parser("eval", help="score system answers against gold answers")
    p.add_argument("--testset", required=True, type=Path)
    p.add_argument("--system", action="append", required=True, help="NAME=PATH of a system-answers file")
    p.add_argument("--reference")
    p.add_argument("--metrics", help="comma-separated metric names")
    p.add_argument("--max-words", type=int)
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out", type=Path, default=Path("reports"))
    p.set_defaults(handler=cmd_eval)

    embed = sub.add_parser("kg-embed", help="TransE training, evaluation and triplet queries")
    embed_sub = embed.add_subparsers(dest="kg_embed_command", required=True)
    p = embed_sub.add_parser("train")
    _add_transe_args(p)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_kg_embed_train)
    p = embed_sub.add_parser("eval")
    _add_transe_args(p)
    p.add_argument("--model", required=True, type=Path)
    p.set_defaults(handler=cmd_kg_embed_eval)
    p = embed_sub.add_parser("query")
    p.add_argument("--kg", required=True, type=Path)
    p.add_argument("--question", required=True)
    p.set_defaults(handler=cmd_kg_embed_query)

    p = sub.add_parser("genq-chunk", help="write paragraphs for synthetic question generation")
    _add_corpus_args(p)
    p.add_argument("--max-tokens", type=int)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(handler=cmd_genq_chunk)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    from app.logger import configure_logging

    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        settings = load_settings(args.config)
        return args.handler(args, settings)
    except KGQAException as e:
        print(f"{e.error_code}: {e.message}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"INVALID_ARGUMENT: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
