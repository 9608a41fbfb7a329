import json

import pytest

from app.cli import main
from app.graph.store import persist_graph
from tests.conftest import FIXTURES, REPO_ROOT, hub_kg

DOCUMENTS = str(FIXTURES / "documents.jsonl")
CUI_MAP = str(FIXTURES / "cui_map.jsonl")


@pytest.fixture(autouse=True)
def repo_cwd(monkeypatch):
    # default settings point at data/fixtures relative to the repository root
    monkeypatch.chdir(REPO_ROOT)
    # a root handler would keep the first test's captured stderr
    monkeypatch.setattr("app.logger.configure_logging", lambda level=None: None)
    for name in ("KGQA_CONFIG", "KGQA_GENERATOR_URL", "KGQA_GENERATOR_COMMAND", "KGQA_EMBEDDING_COMMAND",
                 "KGQA_COREF_COMMAND"):
        monkeypatch.delenv(name, raising=False)


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def built(tmp_path, capsys):
    kg_dir, index_dir = tmp_path / "kg", tmp_path / "index"
    assert run(capsys, "build-kg", "--documents", DOCUMENTS, "--cui-map", CUI_MAP, "--out", kg_dir)[0] == 0
    assert run(capsys, "index", "--documents", DOCUMENTS, "--out", index_dir)[0] == 0
    return kg_dir, index_dir / "vectors.jsonl"


def fixture_answers(question_id):
    answers = set()
    for line in (FIXTURES / "generator_answers.jsonl").read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        if record["question_id"] == question_id:
            answers.add(record["answer"])
    return answers


def test_build_kg(tmp_path, capsys):
    code, out, _ = run(capsys, "build-kg", "--documents", DOCUMENTS, "--cui-map", CUI_MAP, "--out", tmp_path / "kg")

    summary = json.loads(out)
    assert code == 0
    assert summary["triples"] > 0
    assert (tmp_path / "kg" / "entities.jsonl").exists()
    assert (tmp_path / "kg" / "triples.tsv").exists()


def test_index(tmp_path, capsys):
    code, out, _ = run(capsys, "index", "--documents", DOCUMENTS, "--out", tmp_path / "index")

    summary = json.loads(out)
    assert code == 0
    assert summary["entries"] == 13
    assert summary["dim"] == 768


def test_ask_with_joint_reasoning(built, capsys):
    kg_dir, index_path = built

    code, out, _ = run(capsys, "ask", "--question", "What causes arthritis?", "--kg", kg_dir, "--index", index_path)

    result = json.loads(out)
    assert code == 0
    assert result["mode"] == "JointReasoning"
    assert result["parse"]["relation"] == "causes"
    assert result["parse"]["disease"]["label"] == "Arthritis"
    assert result["answer"] in fixture_answers("what-causes-arthritis")
    assert len(result["candidates"]) == 5


def test_ask_without_joint_reasoning_returns_first_candidate(built, capsys):
    kg_dir, index_path = built

    code, out, _ = run(capsys, "ask", "--question", "What causes arthritis?", "--kg", kg_dir, "--index", index_path,
                       "--no-joint-reasoning", "--k", "3")

    result = json.loads(out)
    assert code == 0
    assert result["mode"] == "FallbackFirstCandidate"
    assert result["chosen_rank"] == 0
    assert len(result["candidates"]) == 3


def test_ask_without_vector_index(built, capsys):
    kg_dir, _ = built

    code, out, _ = run(capsys, "ask", "--question", "What are the symptoms of mouth cancer?", "--kg", kg_dir,
                       "--no-vdb")

    result = json.loads(out)
    assert code == 0
    assert result["answer"].startswith("Mouth cancer may cause sores")
    assert [c["context_id"] for c in result["candidates"]] == ["no-vdb"]


def test_ask_without_index_or_no_vdb_fails(built, capsys):
    kg_dir, _ = built

    code, _, err = run(capsys, "ask", "--question", "What causes arthritis?", "--kg", kg_dir)

    assert code == 1
    assert "CONFIG_ERROR" in err


def test_eval_against_reference(tmp_path, capsys):
    code, out, _ = run(
        capsys, "eval", "--testset", FIXTURES / "testset.jsonl",
        "--system", f"joint={FIXTURES / 'answers_joint.jsonl'}",
        "--system", f"baseline={FIXTURES / 'answers_baseline.jsonl'}",
        "--reference", "baseline", "--metrics", "rouge_l,flesch_reading_ease,contradiction",
        "--out", tmp_path / "report",
    )

    assert code == 0
    assert "p-value vs baseline" in out
    summary = json.loads((tmp_path / "report" / "summary.json").read_text(encoding="utf-8"))
    assert summary["overall"]["reference_system"] == "baseline"
    records = (tmp_path / "report" / "records.jsonl").read_text(encoding="utf-8").splitlines()
    assert len(records) == 2 * 12 * 3


def _rounded(value):
    if isinstance(value, float):
        return round(value, 4)
    if isinstance(value, dict):
        return {k: _rounded(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_rounded(v) for v in value]
    return value


def test_eval_reproduces_checked_in_summary(tmp_path, capsys):
    code, out, _ = run(
        capsys, "eval", "--testset", FIXTURES / "testset.jsonl",
        "--system", f"joint={FIXTURES / 'answers_joint.jsonl'}",
        "--system", f"baseline={FIXTURES / 'answers_baseline.jsonl'}",
        "--reference", "baseline", "--metrics", "contradiction",
        "--out", tmp_path / "report",
    )

    expected_text = (FIXTURES / "expected_summary.txt").read_bytes()
    assert code == 0
    assert (tmp_path / "report" / "summary.txt").read_bytes() == expected_text
    assert out == expected_text.decode("utf-8")
    summary = json.loads((tmp_path / "report" / "summary.json").read_text(encoding="utf-8"))
    expected = json.loads((FIXTURES / "expected_summary.json").read_text(encoding="utf-8"))
    assert _rounded(summary) == expected


def test_eval_with_length_control(tmp_path, capsys):
    code, _, _ = run(
        capsys, "eval", "--testset", FIXTURES / "testset.jsonl",
        "--system", f"joint={FIXTURES / 'answers_joint.jsonl'}",
        "--metrics", "rouge_l", "--max-words", "20", "--out", tmp_path / "report",
    )

    assert code == 0
    records = [json.loads(line) for line in
               (tmp_path / "report" / "records.jsonl").read_text(encoding="utf-8").splitlines()]
    assert 0 < len(records) < 12


def test_eval_rejects_unknown_reference(tmp_path, capsys):
    code, _, err = run(
        capsys, "eval", "--testset", FIXTURES / "testset.jsonl",
        "--system", f"joint={FIXTURES / 'answers_joint.jsonl'}",
        "--reference", "baseline", "--out", tmp_path / "report",
    )

    assert code == 1
    assert "CONFIG_ERROR" in err


def test_kg_embed_train_eval_and_query(built, tmp_path, capsys):
    graph_dir = persist_graph(hub_kg(), tmp_path / "hub")
    model_dir = tmp_path / "model"
    common = ["--kg", graph_dir, "--dim", "8", "--max-epochs", "3", "--eval-every", "1", "--seed", "5"]

    code, out, _ = run(capsys, "kg-embed", "train", *common, "--out", model_dir)
    trained = json.loads(out)
    assert code == 0
    assert trained["epochs"] == 3
    assert 0.0 <= trained["test"]["mrr"] <= 1.0

    code, out, _ = run(capsys, "kg-embed", "eval", *common, "--model", model_dir)
    assert code == 0
    assert json.loads(out)["mrr"] == pytest.approx(trained["test"]["mrr"])

    code, out, _ = run(capsys, "kg-embed", "query", "--kg", built[0], "--question", "What causes arthritis?")
    assert code == 0
    assert json.loads(out)["answers"] == ["Family history", "Obesity"]


def test_kg_embed_query_unresolvable(built, capsys):
    code, _, err = run(capsys, "kg-embed", "query", "--kg", built[0], "--question", "hello")

    assert code == 1
    assert "UNRESOLVABLE_PATTERN" in err


def test_genq_chunk(tmp_path, capsys):
    out_path = tmp_path / "paragraphs.jsonl"

    code, out, _ = run(capsys, "genq-chunk", "--documents", DOCUMENTS, "--max-tokens", "20", "--out", out_path)

    assert code == 0
    paragraphs = [json.loads(line) for line in out_path.read_text(encoding="utf-8").splitlines()]
    assert len(paragraphs) == json.loads(out)["paragraphs"]
    assert all(p["token_count"] <= 20 for p in paragraphs)


def test_missing_input_exits_with_error_code(tmp_path, capsys):
    code, _, err = run(capsys, "build-kg", "--documents", tmp_path / "missing.jsonl", "--out", tmp_path / "kg")

    assert code == 1
    assert "LOAD_ERROR" in err
