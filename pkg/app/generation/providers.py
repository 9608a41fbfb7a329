import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from app.config import GenerationSettings
from app.exception.exception import ConfigError, FixtureMissError, LoadError, ProviderError, RecordError
from app.jsonl import read_jsonl
from app.providers.transport import HttpTransport, JsonTransport, SubprocessTransport

from .models import GenerationRequest

logger = logging.getLogger(__name__)


class AnswerGenerator(ABC):
    """Produces one answer for one (question, context) request."""

    @abstractmethod
    def generate(self, question_id: str, context_id: str, request: GenerationRequest) -> str:
        ...

    def close(self) -> None:
        pass


class FixtureGenerator(AnswerGenerator):
    """Canned answers keyed by (question_id, context_id)."""

    def __init__(self, answers: Dict[Tuple[str, str], str]):
        self.answers = answers

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "FixtureGenerator":
        answers: Dict[Tuple[str, str], str] = {}
        for line_number, record in read_jsonl(path):
            try:
                key = (str(record["question_id"]), str(record["context_id"]))
                answer = str(record["answer"])
            except KeyError as e:
                raise RecordError(f"missing field {e}", line_number, str(path))
            if not answer.strip():
                raise RecordError("empty answer", line_number, str(path))
            if key in answers:
                raise LoadError(f"{path}:{line_number}: duplicate fixture key {key}")
            answers[key] = answer
        logger.info(f"[GENERATION] Loaded {len(answers)} fixture answers from {path}")
        return cls(answers)

    def generate(self, question_id: str, context_id: str, request: GenerationRequest) -> str:
        try:
            return self.answers[(question_id, context_id)]
        except KeyError:
            raise FixtureMissError(
                f"No fixture answer for question_id={question_id!r}, context_id={context_id!r}",
                data={"question_id": question_id, "context_id": context_id},
            )


class TransportGenerator(AnswerGenerator):
    """External generator speaking {"question","context",params...} -> {"answer"}."""

    def __init__(self, transport: JsonTransport):
        self.transport = transport

    def generate(self, question_id: str, context_id: str, request: GenerationRequest) -> str:
        response = self.transport.request(request.to_payload())
        answer = response.get("answer")
        if not isinstance(answer, str) or not answer.strip():
            raise ProviderError(f"Generator returned no answer for context {context_id}")
        return answer

    def close(self) -> None:
        self.transport.close()


def make_generator(settings: GenerationSettings, provider: Optional[str] = None) -> AnswerGenerator:
    kind = provider or settings.provider
    if kind == "fixture":
        if not settings.fixture_path:
            raise ConfigError("generation.fixture_path is required for the fixture provider")
        return FixtureGenerator.from_file(settings.fixture_path)
    if kind == "subprocess":
        if not settings.command:
            raise ConfigError("generation.command (or KGQA_GENERATOR_COMMAND) is required")
        return TransportGenerator(SubprocessTransport(settings.command))
    if kind == "http":
        if not settings.url:
            raise ConfigError("generation.url (or KGQA_GENERATOR_URL) is required")
        return TransportGenerator(HttpTransport(settings.url, settings.timeout))
    raise ConfigError(f"Unknown generator provider: {kind}")
