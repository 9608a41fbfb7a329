import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from langchain_core.embeddings import Embeddings
from pydantic import ValidationError

from app.exception.exception import KGQAException, LoadError, MetricError, RecordError, UnknownMetricError
from app.jsonl import read_jsonl
from app.metrics.entailment import NliProvider, detect_contradiction
from app.metrics.readability import flesch_reading_ease
from app.metrics.rouge import rouge_l
from app.metrics.similarity import StsProvider, bertscore_text, sts_score
from app.metrics.statistics import welch_t_test
from app.text import word_count

from .models import Category, EvalRecord, SummaryCell, SummaryTable, TestQuestion

logger = logging.getLogger(__name__)

OVERALL = "overall"


@dataclass
class MetricContext:
    """Providers shared by every metric of one evaluation run."""
    embeddings: Optional[Embeddings] = None
    nli: Optional[NliProvider] = None
    sts: Optional[StsProvider] = None
    entailment_threshold: float = 0.95
    lenient: bool = False


def _require(value, name: str):
    if value is None:
        raise MetricError(f"Metric needs a configured {name} provider")
    return value


METRICS: Dict[str, Callable[[str, str, MetricContext], float]] = {
    "rouge_l": lambda answer, gold, ctx: rouge_l(answer, gold).f1,
    "bertscore": lambda answer, gold, ctx: bertscore_text(answer, gold, _require(ctx.embeddings, "embedding")).f1,
    "sts": lambda answer, gold, ctx: sts_score(answer, gold, _require(ctx.sts, "STS")),
    "flesch_reading_ease": lambda answer, gold, ctx: flesch_reading_ease(answer),
    "contradiction": lambda answer, gold, ctx: float(
        detect_contradiction(answer, gold, _require(ctx.nli, "NLI"), ctx.entailment_threshold).contradicted
    ),
}


def load_testset(path: Union[str, Path]) -> List[TestQuestion]:
    questions: List[TestQuestion] = []
    seen = set()
    for line_number, record in read_jsonl(path):
        try:
            question = TestQuestion.model_validate(record)
        except ValidationError as e:
            raise RecordError(f"invalid test question: {e.errors()[0]['msg']}", line_number, str(path))
        if question.id in seen:
            raise LoadError(f"{path}:{line_number}: duplicate question id {question.id}")
        seen.add(question.id)
        questions.append(question)
    logger.info(f"[EVAL] Loaded {len(questions)} test questions from {path}")
    return questions


def load_system_answers(path: Union[str, Path], lenient: bool = False) -> Dict[str, str]:
    """Answers keyed by question id. Answers without a single word are rejected, or skipped when lenient."""
    answers: Dict[str, str] = {}
    for line_number, record in read_jsonl(path):
        if "id" not in record or not isinstance(record.get("answer"), str):
            raise RecordError("expected {\"id\", \"answer\"}", line_number, str(path))
        if word_count(record["answer"]) == 0:
            if not lenient:
                raise RecordError(f"answer for {record['id']} has no words", line_number, str(path))
            logger.warning(f"[EVAL] {path}:{line_number}: skipping wordless answer for {record['id']}")
            continue
        answers[str(record["id"])] = record["answer"]
    return answers


def run_evaluation(
        testset: Sequence[TestQuestion],
        system_answers: Mapping[str, str],
        metrics: Sequence[str],
        context: MetricContext,
        system: str = "system",
) -> List[EvalRecord]:
    """One record per (question, metric) for a single system."""
    unknown = [m for m in metrics if m not in METRICS]
    if unknown:
        raise UnknownMetricError(f"Unknown metric(s): {', '.join(unknown)}; known: {', '.join(METRICS)}")
    records: List[EvalRecord] = []
    for question in testset:
        answer = system_answers.get(question.id)
        if answer is None:
            if not context.lenient:
                raise LoadError(f"System '{system}' has no answer for question {question.id}")
            logger.warning(f"[EVAL] Skipping {question.id}: no answer from '{system}'")
            continue
        for metric in metrics:
            try:
                value = METRICS[metric](answer, question.gold_answer, context)
            except KGQAException as e:
                if not context.lenient:
                    raise
                logger.warning(f"[EVAL] Skipping {metric} for {question.id} from '{system}': {e.message}")
                continue
            records.append(EvalRecord(
                question_id=question.id,
                system=system,
                metric=metric,
                value=value,
                category=question.category,
            ))
    logger.info(f"[EVAL] {system}: {len(records)} records over {len(metrics)} metrics")
    return records


def length_filter(answers: Mapping[str, str], max_words: Optional[float] = 150) -> Tuple[Dict[str, str], List[str]]:
    """Keep answers of at most max_words words; None or inf keeps everything."""
    if max_words is not None and max_words < 1:
        raise ValueError("max_words must be >= 1")
    limit = math.inf if max_words is None else max_words
    kept = {qid: answer for qid, answer in answers.items() if word_count(answer) <= limit}
    return kept, sorted(kept)


def common_question_ids(answer_sets: Iterable[Mapping[str, str]]) -> List[str]:
    """Question ids answered by every system."""
    sets = [set(a) for a in answer_sets]
    if not sets:
        return []
    return sorted(set.intersection(*sets))


def median(values: Sequence[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def _cell(group: str, system: str, metric: str, values: List[float]) -> SummaryCell:
    array = np.asarray(values, dtype=np.float64)
    low, high = float(array.min()), float(array.max())
    return SummaryCell(
        group=group,
        system=system,
        metric=metric,
        n=len(values),
        min=low,
        max=high,
        median=float(median(values)),
        # rounding can push the mean of equal values past them
        mean=min(max(math.fsum(values) / len(values), low), high),
        std=float(array.std(ddof=1)) if len(values) >= 2 else None,
    )


def _group_key(record: EvalRecord, group_by: str) -> str:
    if group_by == OVERALL:
        return OVERALL
    return record.category.value if record.category else Category.OTHER.value


def summarize_scores(
        records: Sequence[EvalRecord],
        group_by: str = OVERALL,
        reference_system: Optional[str] = None,
) -> SummaryTable:
    """min/max/median/mean/std per (group, system, metric), p-values against the reference.

    Values are ordered by question id before aggregation so the table does not
    depend on the order of the test set.
    """
    if group_by not in (OVERALL, "category"):
        raise ValueError(f"group_by must be 'overall' or 'category', got {group_by!r}")
    buckets: Dict[Tuple[str, str, str], List[Tuple[str, float]]] = {}
    for record in records:
        key = (_group_key(record, group_by), record.system, record.metric)
        buckets.setdefault(key, []).append((record.question_id, record.value))

    if group_by == "category":
        present = {k[0] for k in buckets}
        for category in Category:
            if category.value not in present:
                logger.warning(f"[EVAL] No records for category '{category.value}'; group omitted")
        group_order = [c.value for c in Category if c.value in present]
    else:
        group_order = [OVERALL] if buckets else []

    values = {key: [v for _, v in sorted(items)] for key, items in buckets.items()}
    cells: List[SummaryCell] = []
    for group in group_order:
        for system, metric in sorted({(k[1], k[2]) for k in values if k[0] == group}):
            sample = values[(group, system, metric)]
            cell = _cell(group, system, metric, sample)
            reference = values.get((group, reference_system, metric)) if reference_system else None
            if reference is not None and system != reference_system and len(sample) >= 2 and len(reference) >= 2:
                cell.p_value = welch_t_test(sample, reference).p
            cells.append(cell)
    return SummaryTable(grouping=group_by, reference_system=reference_system, cells=cells)
