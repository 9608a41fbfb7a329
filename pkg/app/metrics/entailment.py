import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Tuple, Union

from pydantic import ValidationError

from app.config import MetricsSettings
from app.exception.exception import ConfigError, ProviderError, RecordError
from app.jsonl import read_jsonl
from app.providers.transport import HttpTransport, JsonTransport, SubprocessTransport
from app.text import normalize_whitespace, split_sentences

from .models import EntailmentVerdict, FlaggedPair, NLIProbabilities

logger = logging.getLogger(__name__)

NEUTRAL = NLIProbabilities(positive=0.0, neutral=1.0, negative=0.0)


class NliProvider(ABC):
    @abstractmethod
    def classify(self, premise: str, hypothesis: str) -> NLIProbabilities:
        ...


class StubNli(NliProvider):
    """Fixture-backed NLI. Pairs absent from the table are neutral."""

    def __init__(self, table: Dict[Tuple[str, str], NLIProbabilities]):
        self.table = table

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "StubNli":
        table: Dict[Tuple[str, str], NLIProbabilities] = {}
        for line_number, record in read_jsonl(path):
            try:
                key = (normalize_whitespace(record["premise"]), normalize_whitespace(record["hypothesis"]))
                table[key] = NLIProbabilities(
                    positive=record["positive"], neutral=record["neutral"], negative=record["negative"]
                )
            except (KeyError, ValidationError) as e:
                raise RecordError(f"invalid NLI fixture record: {e}", line_number, str(path))
        logger.info(f"[METRICS] Loaded {len(table)} NLI stub pairs from {path}")
        return cls(table)

    def classify(self, premise: str, hypothesis: str) -> NLIProbabilities:
        return self.table.get((normalize_whitespace(premise), normalize_whitespace(hypothesis)), NEUTRAL)


class TransportNli(NliProvider):
    def __init__(self, transport: JsonTransport):
        self.transport = transport

    def classify(self, premise: str, hypothesis: str) -> NLIProbabilities:
        response = self.transport.request({"premise": premise, "hypothesis": hypothesis})
        try:
            return NLIProbabilities(
                positive=response["positive"], neutral=response["neutral"], negative=response["negative"]
            )
        except (KeyError, ValidationError) as e:
            raise ProviderError(f"NLI provider returned an invalid response: {e}")


def detect_contradiction(
        answer: str,
        gold: str,
        nli_provider: NliProvider,
        threshold: float = 0.95,
) -> EntailmentVerdict:
    """Flag every (answer sentence, gold sentence) pair whose negative probability >= threshold.

    The gold sentence is the premise and the answer sentence the hypothesis.
    """
    answer_sentences = split_sentences(answer)
    gold_sentences = split_sentences(gold)
    flagged = []
    for i, hypothesis in enumerate(answer_sentences):
        for j, premise in enumerate(gold_sentences):
            probabilities = nli_provider.classify(premise, hypothesis)
            if probabilities.negative >= threshold:
                flagged.append(FlaggedPair(
                    answer_sentence_idx=i, gold_sentence_idx=j, negative_prob=probabilities.negative
                ))
    if flagged:
        logger.debug(f"[METRICS] {len(flagged)} contradicting sentence pairs")
    return EntailmentVerdict(flagged_pairs=flagged)


def make_nli_provider(settings: MetricsSettings) -> NliProvider:
    if settings.nli_provider == "stub":
        if not settings.nli_fixture_path:
            raise ConfigError("metrics.nli_fixture_path is required for the stub NLI provider")
        return StubNli.from_file(settings.nli_fixture_path)
    if settings.nli_provider == "subprocess":
        if not settings.nli_command:
            raise ConfigError("metrics.nli_command is required for the subprocess NLI provider")
        return TransportNli(SubprocessTransport(settings.nli_command))
    if not settings.nli_url:
        raise ConfigError("metrics.nli_url is required for the http NLI provider")
    return TransportNli(HttpTransport(settings.nli_url))
