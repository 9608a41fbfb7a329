import logging
import os
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from app.exception.exception import ConfigError

logger = logging.getLogger(__name__)

# Section headings of the disease pages; each one becomes an edge type.
DEFAULT_RELATION_SET = [
    "overview",
    "symptoms",
    "causes",
    "risk_factors_of_disease",
    "risk_due_to_disease",
    "at_risk",
    "treatment",
    "prevention",
    "diagnosis",
]

# Question vocabulary of the test-set categories, mapped onto relations.
DEFAULT_RELATION_ALIASES = {
    "symptom": "symptoms",
    "symptoms": "symptoms",
    "sign": "symptoms",
    "signs": "symptoms",
    "cause": "causes",
    "causes": "causes",
    "caused": "causes",
    "reason": "causes",
    "reasons": "causes",
    "treatment": "treatment",
    "treatments": "treatment",
    "treat": "treatment",
    "treated": "treatment",
    "cure": "treatment",
    "therapy": "treatment",
    "diagnosis": "diagnosis",
    "diagnosed": "diagnosis",
    "diagnose": "diagnosis",
    "test": "diagnosis",
    "tests": "diagnosis",
    "risk": "risk_factors_of_disease",
    "risks": "risk_factors_of_disease",
    "risk factor": "risk_factors_of_disease",
    "risk factors": "risk_factors_of_disease",
    "complication": "risk_due_to_disease",
    "complications": "risk_due_to_disease",
    "at risk": "at_risk",
    "who gets": "at_risk",
    "prevention": "prevention",
    "prevent": "prevention",
    "prevented": "prevention",
    "avoid": "prevention",
}

DEFAULT_CONFIG_ENV = "KGQA_CONFIG"


class CorpusSettings(BaseModel):
    max_tokens: int = Field(default=200, ge=1)
    strict: bool = True
    coref_command: Optional[str] = None


class GraphSettings(BaseModel):
    relation_set: List[str] = Field(default_factory=lambda: list(DEFAULT_RELATION_SET))
    phrase_max_tokens: int = Field(default=12, ge=1)
    synonym_expansion: bool = True
    strict: bool = False
    # Prose sections are indexed for retrieval but never turned into term nodes.
    prose_sections: List[str] = Field(default_factory=lambda: ["overview"])


class RetrievalSettings(BaseModel):
    k: int = Field(default=5, ge=1, le=5)
    dim: int = Field(default=768, ge=1)
    embedding_provider: Literal["reference", "subprocess", "socket"] = "reference"
    command: Optional[str] = None
    host: str = "127.0.0.1"
    port: Optional[int] = None
    strict: bool = True


class GenerationParams(BaseModel):
    """Decoding hyper-parameters forwarded verbatim to the answer generator."""

    min_length: int = 40
    max_length: int = 150
    temperature: float = 0.7
    num_beams: int = 4

    @model_validator(mode="after")
    def _check_ranges(self):
        if not 0 < self.min_length <= self.max_length:
            raise ValueError("require 0 < min_length <= max_length")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if self.num_beams < 1:
            raise ValueError("num_beams must be >= 1")
        return self


class GenerationSettings(BaseModel):
    params: GenerationParams = Field(default_factory=GenerationParams)
    provider: Literal["fixture", "subprocess", "http"] = "fixture"
    fixture_path: Optional[str] = "data/fixtures/generator_answers.jsonl"
    command: Optional[str] = None
    url: Optional[str] = None
    timeout: float = 60.0
    max_concurrency: int = Field(default=5, ge=1)


class ReasoningSettings(BaseModel):
    fuzzy_threshold: float = Field(default=0.85, ge=0.0, le=1.0)
    relation_aliases: Dict[str, str] = Field(default_factory=lambda: dict(DEFAULT_RELATION_ALIASES))
    all_relations_when_unmatched: bool = True


class MetricsSettings(BaseModel):
    entailment_threshold: float = Field(default=0.95, ge=0.0, le=1.0)
    nli_provider: Literal["stub", "subprocess", "http"] = "stub"
    nli_fixture_path: Optional[str] = "data/fixtures/nli_stub.jsonl"
    nli_command: Optional[str] = None
    nli_url: Optional[str] = None
    sts_provider: Literal["fallback", "subprocess", "http"] = "fallback"
    sts_command: Optional[str] = None
    sts_url: Optional[str] = None


class TransESettings(BaseModel):
    dim: int = Field(default=100, ge=1)
    lr: float = Field(default=0.001, gt=0)
    optimizer: Literal["adam"] = "adam"
    batch_size: int = Field(default=10, ge=1)
    max_epochs: int = Field(default=1000, ge=0)
    negatives_per_positive: int = Field(default=10, ge=1)
    patience: int = Field(default=5, ge=1)
    eval_every: int = Field(default=10, ge=1)
    norm_order: Literal[1, 2] = 1
    loss: Literal["nll", "margin"] = "nll"
    margin: float = Field(default=1.0, gt=0)
    seed: int = 42
    split_ratios: Tuple[float, float, float] = (0.85, 0.05, 0.10)
    include_cui_links: bool = False

    @field_validator("split_ratios")
    @classmethod
    def _ratios_sum_to_one(cls, value):
        if abs(sum(value) - 1.0) > 1e-9 or any(r < 0 for r in value):
            raise ValueError("split ratios must be non-negative and sum to 1")
        return value


class EvaluationSettings(BaseModel):
    max_words: Optional[int] = Field(default=None, ge=1)
    reference_system: Optional[str] = None
    lenient: bool = False
    metrics: List[str] = Field(default_factory=lambda: [
        "rouge_l", "bertscore", "sts", "flesch_reading_ease", "contradiction",
    ])


class Settings(BaseModel):
    corpus: CorpusSettings = Field(default_factory=CorpusSettings)
    graph: GraphSettings = Field(default_factory=GraphSettings)
    retrieval: RetrievalSettings = Field(default_factory=RetrievalSettings)
    generation: GenerationSettings = Field(default_factory=GenerationSettings)
    reasoning: ReasoningSettings = Field(default_factory=ReasoningSettings)
    metrics: MetricsSettings = Field(default_factory=MetricsSettings)
    kg_embedding: TransESettings = Field(default_factory=TransESettings)
    evaluation: EvaluationSettings = Field(default_factory=EvaluationSettings)
    seed: int = 42


def _apply_env_overrides(raw: dict) -> dict:
    overrides = {
        "KGQA_GENERATOR_URL": ("generation", "url"),
        "KGQA_GENERATOR_COMMAND": ("generation", "command"),
        "KGQA_EMBEDDING_COMMAND": ("retrieval", "command"),
        "KGQA_COREF_COMMAND": ("corpus", "coref_command"),
    }
    for env_name, (section, key) in overrides.items():
        value = os.environ.get(env_name)
        if value:
            logger.info(f"[CONFIG] {env_name} overrides {section}.{key}")
            raw.setdefault(section, {})[key] = value
    return raw


def load_settings(path: Optional[Union[str, Path]] = None) -> Settings:
    """Build settings from YAML (explicit path, then $KGQA_CONFIG) plus .env overrides."""
    load_dotenv()
    path = path or os.environ.get(DEFAULT_CONFIG_ENV)
    raw: dict = {}
    if path:
        config_path = Path(path)
        if not config_path.exists():
            raise ConfigError(f"Config file not found: {config_path}")
        try:
            raw = yaml.safe_load(config_path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML in {config_path}: {e}")
        if not isinstance(raw, dict):
            raise ConfigError(f"Config root must be a mapping: {config_path}")
        logger.info(f"[CONFIG] Loaded configuration from {config_path}")
    raw = _apply_env_overrides(raw)
    try:
        return Settings.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}")
