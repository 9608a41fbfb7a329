import json
import logging
import random

import pytest

from app.evaluation.models import Category, EvalRecord, TestQuestion
from app.evaluation.report import compute_overlaps, render_summary_text, write_report
from app.evaluation.service import (MetricContext, common_question_ids, length_filter, load_system_answers,
                                    load_testset, run_evaluation, summarize_scores)
from app.exception.exception import LoadError, MetricError, RecordError, UnknownMetricError
from app.knowledge.embeddings import HashingEmbeddings
from app.metrics.entailment import StubNli
from app.metrics.similarity import EmbeddingSts


@pytest.fixture
def testset(fixtures_dir):
    return load_testset(fixtures_dir / "testset.jsonl")


@pytest.fixture
def answers(fixtures_dir):
    return {
        "joint": load_system_answers(fixtures_dir / "answers_joint.jsonl"),
        "baseline": load_system_answers(fixtures_dir / "answers_baseline.jsonl"),
    }


@pytest.fixture
def context(fixtures_dir):
    embeddings = HashingEmbeddings()
    return MetricContext(
        embeddings=embeddings,
        nli=StubNli.from_file(fixtures_dir / "nli_stub.jsonl"),
        sts=EmbeddingSts(embeddings),
    )


def _records(system, values, metric="rouge_l", category=Category.CAUSE):
    return [
        EvalRecord(question_id=f"q{i:02d}", system=system, metric=metric, value=v, category=category)
        for i, v in enumerate(values)
    ]


def test_one_record_per_question_and_metric(testset, answers, context):
    records = run_evaluation(testset, answers["joint"], ["rouge_l", "flesch_reading_ease"], context, "joint")

    assert len(records) == 2 * len(testset)
    assert {(r.question_id, r.metric) for r in records} == {
        (q.id, m) for q in testset for m in ("rouge_l", "flesch_reading_ease")
    }


def test_answer_equal_to_gold_scores_full_rouge(testset, context):
    gold = {q.id: q.gold_answer for q in testset}

    records = run_evaluation(testset, gold, ["rouge_l"], context)

    assert all(r.value == 1.0 for r in records)


def test_all_metrics_run_on_fixture_answers(testset, answers, context):
    metrics = ["rouge_l", "bertscore", "sts", "flesch_reading_ease", "contradiction"]

    records = run_evaluation(testset, answers["baseline"], metrics, context, "baseline")

    contradiction = {r.question_id: r.value for r in records if r.metric == "contradiction"}
    assert contradiction["q02"] == 1.0
    assert all(0.0 <= r.value <= 100.0 for r in records if r.metric == "flesch_reading_ease")
    assert all(-5.0 <= r.value <= 5.0 for r in records if r.metric == "sts")


def test_unknown_metric_is_rejected(testset, answers, context):
    with pytest.raises(UnknownMetricError):
        run_evaluation(testset, answers["joint"], ["rouge_l", "bleu"], context)


def test_metric_without_provider(testset, answers):
    with pytest.raises(MetricError):
        run_evaluation(testset, answers["joint"], ["contradiction"], MetricContext())


def test_missing_answer_strict_and_lenient(testset, answers, context, caplog):
    partial = {qid: a for qid, a in answers["joint"].items() if qid != "q03"}

    with pytest.raises(LoadError):
        run_evaluation(testset, partial, ["rouge_l"], context)

    context.lenient = True
    with caplog.at_level(logging.WARNING):
        records = run_evaluation(testset, partial, ["rouge_l"], context)
    assert len(records) == len(testset) - 1
    assert any("q03" in r.getMessage() for r in caplog.records)


def test_load_testset_errors(tmp_path):
    question = {"id": "q1", "question": "?", "category": "cause", "gold_answer": "x"}
    path = tmp_path / "testset.jsonl"

    path.write_text(json.dumps(question) + "\n" + json.dumps(question) + "\n", encoding="utf-8")
    with pytest.raises(LoadError):
        load_testset(path)

    path.write_text(json.dumps({**question, "category": "weather"}) + "\n", encoding="utf-8")
    with pytest.raises(RecordError):
        load_testset(path)


def test_summary_statistics():
    table = summarize_scores(_records("a", [4.0, 1.0, 3.0, 2.0]))

    cell = table.cell("overall", "a", "rouge_l")
    assert (cell.n, cell.min, cell.max) == (4, 1.0, 4.0)
    assert cell.median == 2.5
    assert cell.mean == 2.5
    assert cell.std == pytest.approx(1.2910, abs=1e-4)
    assert cell.p_value is None


def test_single_value_has_no_std():
    cell = summarize_scores(_records("a", [0.7])).cells[0]
    assert cell.std is None
    assert cell.min == cell.median == cell.mean == cell.max == 0.7


def test_identical_systems_have_p_value_one():
    records = _records("a", [0.1, 0.4, 0.3]) + _records("b", [0.1, 0.4, 0.3])

    table = summarize_scores(records, reference_system="a")

    assert table.cell("overall", "b", "rouge_l").p_value == 1.0
    assert table.cell("overall", "a", "rouge_l").p_value is None


def test_summary_invariants_on_fixture_runs(testset, answers, context):
    records = []
    for system, system_answers in answers.items():
        records += run_evaluation(testset, system_answers, ["rouge_l", "bertscore", "flesch_reading_ease"],
                                  context, system)

    for grouping in ("overall", "category"):
        for cell in summarize_scores(records, grouping, reference_system="baseline").cells:
            assert cell.min <= cell.median <= cell.max
            assert cell.min <= cell.mean <= cell.max
            assert cell.p_value is None or 0.0 <= cell.p_value <= 1.0


def test_category_grouping_follows_category_order(caplog):
    records = (_records("a", [0.2, 0.4], category=Category.TREATMENT)
               + _records("a", [0.5, 0.9], category=Category.CAUSE))

    with caplog.at_level(logging.WARNING):
        table = summarize_scores(records, "category")

    assert table.groups == ["cause", "treatment"]
    assert table.cell("cause", "a", "rouge_l").median == pytest.approx(0.7)
    missing = [r for r in caplog.records if "No records for category" in r.getMessage()]
    assert len(missing) == len(Category) - 2


def test_summary_ignores_record_order():
    records = _records("a", [0.3, 0.9, 0.1, 0.5]) + _records("b", [0.2, 0.2, 0.8, 0.4])
    shuffled = records[:]
    random.Random(1).shuffle(shuffled)

    assert summarize_scores(records, reference_system="a") == summarize_scores(shuffled, reference_system="a")


def test_summarize_rejects_unknown_grouping():
    with pytest.raises(ValueError):
        summarize_scores([], "disease")


def test_length_filter():
    answers = {"short": "a b c", "long": " ".join(["word"] * 151), "edge": " ".join(["word"] * 150)}

    kept, ids = length_filter(answers)

    assert ids == ["edge", "short"]
    assert set(kept) == {"edge", "short"}
    assert length_filter(answers, None)[1] == ["edge", "long", "short"]
    assert length_filter(answers, float("inf"))[1] == ["edge", "long", "short"]
    with pytest.raises(ValueError):
        length_filter(answers, 0)


def test_common_question_ids():
    assert common_question_ids([{"q1": "", "q2": ""}, {"q2": "", "q3": ""}]) == ["q2"]
    assert common_question_ids([]) == []


def test_report_is_deterministic(testset, answers, context, tmp_path):
    records = []
    for system, system_answers in answers.items():
        records += run_evaluation(testset, system_answers, ["rouge_l", "contradiction"], context, system)
    overall = summarize_scores(records, reference_system="baseline")
    per_category = summarize_scores(records, "category", reference_system="baseline")
    overlaps = compute_overlaps(records, "baseline")

    first = write_report(tmp_path / "a", records, overall, per_category, overlaps)
    second = write_report(tmp_path / "b", list(reversed(records)), overall, per_category, overlaps)

    for name in ("records.jsonl", "summary.json", "summary.txt"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    text = (first / "summary.txt").read_text(encoding="utf-8")
    assert "p-value vs baseline" in text
    assert "Welch" in text


def test_compute_overlaps_handles_constant_samples(caplog):
    records = _records("ref", [0.1, 0.5, 0.9]) + _records("sys", [0.2, 0.6, 0.8])
    records += _records("ref", [0.0, 0.0, 0.0], metric="contradiction")
    records += _records("sys", [0.0, 0.0, 0.0], metric="contradiction")

    with caplog.at_level(logging.WARNING):
        overlaps = compute_overlaps(records, "ref")

    assert 0.0 < overlaps["rouge_l"]["sys"] <= 100.0
    assert overlaps["contradiction"]["sys"] is None
    assert "n/a" in render_summary_text(summarize_scores(records, reference_system="ref"),
                                        summarize_scores(records, "category"), overlaps)


def test_test_question_requires_gold_answer():
    with pytest.raises(ValueError):
        TestQuestion(id="q", question="?", category=Category.CAUSE, gold_answer="")


def test_wordless_answers_are_rejected_at_load(tmp_path, caplog):
    path = tmp_path / "answers.jsonl"
    path.write_text(json.dumps({"id": "q01", "answer": "Fine."}) + "\n"
                    + json.dumps({"id": "q02", "answer": " ?! "}) + "\n", encoding="utf-8")

    with pytest.raises(RecordError):
        load_system_answers(path)

    with caplog.at_level(logging.WARNING):
        answers = load_system_answers(path, lenient=True)
    assert answers == {"q01": "Fine."}
    assert any("q02" in r.getMessage() for r in caplog.records)


def test_failing_metric_is_skipped_only_when_lenient(testset, answers, context, caplog):
    broken = {**answers["joint"], "q03": "?!"}

    with pytest.raises(MetricError):
        run_evaluation(testset, broken, ["rouge_l", "flesch_reading_ease"], context)

    context.lenient = True
    with caplog.at_level(logging.WARNING):
        records = run_evaluation(testset, broken, ["rouge_l", "flesch_reading_ease"], context)
    flesch = [r for r in records if r.metric == "flesch_reading_ease"]
    rouge = {r.question_id: r.value for r in records if r.metric == "rouge_l"}
    assert len(flesch) == len(testset) - 1
    assert "q03" not in {r.question_id for r in flesch}
    assert rouge["q03"] == 0.0
    assert any("flesch_reading_ease for q03" in r.getMessage() for r in caplog.records)
