import json
import logging

import pytest

from app.corpus.abbreviations import expand_abbreviations, find_definitions, is_short_form
from app.corpus.coreference import CoreferenceProvider, resolve_coreferences
from app.corpus.models import Document
from app.corpus.service import chunk_paragraphs, load_documents, load_qa_pairs, preprocess_documents
from app.exception.exception import ConfigError, LoadError, RecordError
from app.providers.transport import JsonTransport
from app.text import count_tokens, normalize_whitespace, split_sentences, tokenize


def _write_lines(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path


def _doc(doc_id="d1", text="Family history; Obesity", disease="Arthritis", section="causes"):
    return {"id": doc_id, "disease": disease, "section": section, "text": text, "source": "test"}


def test_tokenize_lowercases_and_splits_on_non_alphanumerics():
    assert tokenize("Type-2 Diabetes, (T2D)!") == ["type", "2", "diabetes", "t2d"]
    assert tokenize("") == []


def test_split_sentences():
    assert split_sentences("A is x. B is y? C!") == ["A is x.", "B is y?", "C!"]
    assert split_sentences("") == []
    assert split_sentences("one sentence") == ["one sentence"]


def test_load_documents_two_valid_lines(tmp_path):
    path = _write_lines(tmp_path / "docs.jsonl", [_doc("d1"), _doc("d2", section="symptoms")])

    docs = load_documents(path)

    assert [d.id for d in docs] == ["d1", "d2"]
    assert docs[1].section == "symptoms"


def test_load_documents_duplicate_id_names_the_id(tmp_path):
    path = _write_lines(tmp_path / "docs.jsonl", [_doc("dup"), _doc("dup")])

    with pytest.raises(LoadError) as excinfo:
        load_documents(path)
    assert "dup" in excinfo.value.message


def test_load_documents_missing_field_reports_line_number(tmp_path):
    broken = _doc("d2")
    del broken["text"]
    path = _write_lines(tmp_path / "docs.jsonl", [_doc("d1"), broken])

    with pytest.raises(RecordError) as excinfo:
        load_documents(path)
    assert excinfo.value.line_number == 2


def test_load_documents_lenient_skips_with_warning(tmp_path, caplog):
    broken = _doc("d2")
    del broken["disease"]
    path = _write_lines(tmp_path / "docs.jsonl", [_doc("d1"), broken])

    with caplog.at_level(logging.WARNING):
        docs = load_documents(path, strict=False)

    assert len(docs) == 1
    warnings = [r for r in caplog.records if r.levelno == logging.WARNING and "[CORPUS]" in r.getMessage()]
    assert len(warnings) == 1


@pytest.mark.parametrize("disease", ["", "   ", "--"])
def test_load_documents_rejects_disease_without_tokens(tmp_path, disease):
    path = _write_lines(tmp_path / "docs.jsonl", [_doc("d1"), _doc("d2", disease=disease)])

    with pytest.raises(RecordError) as excinfo:
        load_documents(path)
    assert excinfo.value.line_number == 2
    assert [d.id for d in load_documents(path, strict=False)] == ["d1"]


def test_load_documents_missing_file(tmp_path):
    with pytest.raises(LoadError):
        load_documents(tmp_path / "nope.jsonl")


def test_load_qa_pairs_fixture(fixtures_dir):
    pairs = load_qa_pairs(fixtures_dir / "qa_pairs.jsonl")
    assert len(pairs) == 3
    assert all(p.question and p.answer for p in pairs)


def test_expand_abbreviations_replaces_later_mentions_only():
    text, mapping = expand_abbreviations("atopic dermatitis (AD) is itchy. AD affects skin.")

    assert text == "atopic dermatitis (AD) is itchy. atopic dermatitis affects skin."
    assert mapping == {"AD": "atopic dermatitis"}


def test_expand_abbreviations_without_definitions_is_identity():
    assert expand_abbreviations("no abbreviations here") == ("no abbreviations here", {})


def test_expand_abbreviations_two_definitions_and_idempotence():
    source = ("Type 2 diabetes (T2D) raises the risk of chronic kidney disease (CKD). "
              "People with T2D should be screened for CKD every year.")

    once, mapping = expand_abbreviations(source)
    twice, _ = expand_abbreviations(once)

    assert mapping == {"T2D": "Type 2 diabetes", "CKD": "chronic kidney disease"}
    assert once.endswith("People with Type 2 diabetes should be screened for chronic kidney disease every year.")
    assert twice == once


@pytest.mark.parametrize("text", [
    "",
    "Heart attack (HA) hurts. HA is serious. HA again.",
    "A weakened immune system (WIS) and WIS-related infections.",
    "(AD) appears without a long form. AD stays.",
    "Mouth cancer (MC) and MC, MC; (MC) repeats.",
    "atopic dermatitis (AD) is common. AD treatment (DT) helps. DT works.",
])
def test_expand_abbreviations_is_idempotent(text):
    once, mapping = expand_abbreviations(text)
    assert expand_abbreviations(once) == (once, mapping)


def test_expanded_short_form_completes_a_later_long_form():
    text, mapping = expand_abbreviations(
        "atopic dermatitis (AD) is common. AD treatment (DT) helps. DT works.")

    assert text == ("atopic dermatitis (AD) is common. atopic dermatitis treatment (DT) helps. "
                    "dermatitis treatment works.")
    assert mapping == {"AD": "atopic dermatitis", "DT": "dermatitis treatment"}


def test_short_form_rules():
    assert is_short_form("AD")
    assert is_short_form("T2D")
    assert not is_short_form("ordinary")
    assert not is_short_form("ABCDEFGHIJK")


def test_find_definitions_requires_letters_in_order():
    assert find_definitions("blood pressure (XQ) is measured.") == []


def test_resolve_coreferences_replaces_sentence_initial_pronoun():
    text = "Eczema is a prevalent disease in Asia. It is particularly found in infants."

    resolved = resolve_coreferences(text, "Eczema")

    assert split_sentences(resolved)[1].startswith("Eczema is particularly found")


def test_resolve_coreferences_without_pronouns_is_identity():
    text = "Eczema is a prevalent disease in Asia. Infants are often affected."
    assert resolve_coreferences(text, "Eczema") == text


def test_resolve_coreferences_needs_an_antecedent():
    text = "It is common in winter. Eczema is a skin disease."
    assert resolve_coreferences(text, "Eczema") == text


def test_resolve_coreferences_token_delta_is_bounded():
    text = ("Atopic dermatitis is common. It itches. They scratch. "
            "This worsens at night. The skin cracks.")
    entity = "Atopic dermatitis"

    resolved = resolve_coreferences(text, entity)

    replaced = 3
    assert count_tokens(resolved) - count_tokens(text) <= replaced * (len(tokenize(entity)) - 1)
    assert split_sentences(resolved)[-1] == "The skin cracks."


def test_resolve_coreferences_rejects_empty_entity():
    with pytest.raises(ValueError):
        resolve_coreferences("It is here.", " ")


class _EchoCoref(JsonTransport):
    def request(self, payload):
        return {"text": payload["text"].replace("It", payload["entity"])}


def test_resolve_coreferences_uses_external_provider():
    provider = CoreferenceProvider(_EchoCoref())
    assert resolve_coreferences("It is rare.", "Gout", provider) == "Gout is rare."


def test_preprocess_documents_expands_then_resolves():
    doc = Document(
        id="d", disease="Atopic dermatitis", section="overview",
        text="Atopic dermatitis (AD) is itchy. AD is common. It starts in childhood.",
    )

    processed = preprocess_documents([doc])[0]

    assert processed.text == ("Atopic dermatitis (AD) is itchy. Atopic dermatitis is common. "
                              "Atopic dermatitis starts in childhood.")
    assert doc.text.endswith("It starts in childhood.")


def test_chunk_two_blocks():
    doc = Document(id="d", disease="X", section="overview", text="First block here.\n\nSecond block here.")

    paragraphs = chunk_paragraphs([doc], 1000)

    assert [p.ordinal for p in paragraphs] == [0, 1]
    assert [p.text for p in paragraphs] == ["First block here.", "Second block here."]


def test_chunk_empty_text():
    doc = Document(id="d", disease="X", section="overview", text="")
    assert chunk_paragraphs([doc], 10) == []


def test_chunk_oversize_block_respects_cap_and_reconstructs():
    sentences = [" ".join(f"w{i}x{j}" for j in range(10)) + "." for i in range(30)]
    text = " ".join(sentences)
    doc = Document(id="d", disease="X", section="overview", text=text)
    assert count_tokens(text) == 300

    paragraphs = chunk_paragraphs([doc], 100)

    assert len(paragraphs) >= 3
    assert all(p.token_count <= 100 for p in paragraphs)
    assert [p.ordinal for p in paragraphs] == list(range(len(paragraphs)))
    assert normalize_whitespace(" ".join(p.text for p in paragraphs)) == normalize_whitespace(text)


def test_chunk_ordinals_restart_per_document():
    docs = [
        Document(id="a", disease="X", section="overview", text="One.\n\nTwo."),
        Document(id="b", disease="Y", section="overview", text="Three."),
    ]

    paragraphs = chunk_paragraphs(docs, 5)

    assert [(p.doc_id, p.ordinal) for p in paragraphs] == [("a", 0), ("a", 1), ("b", 0)]


def test_chunk_single_long_word_is_split():
    doc = Document(id="d", disease="X", section="overview", text="-".join(f"t{i}" for i in range(7)))

    paragraphs = chunk_paragraphs([doc], 3)

    assert all(p.token_count <= 3 for p in paragraphs)
    assert sum(p.token_count for p in paragraphs) == 7


def test_chunk_rejects_zero_cap():
    with pytest.raises(ConfigError):
        chunk_paragraphs([], 0)
