import logging
import re
from typing import Optional

from app.exception.exception import ProviderError
from app.providers.transport import JsonTransport

logger = logging.getLogger(__name__)

_SENTENCE_SEPARATOR_RE = re.compile(r"((?<=[.?!])\s+)")
_LEADING_PRONOUN_RE = re.compile(r"^(\s*)(It|This|They)(?=\s)")


class CoreferenceProvider:
    """External coreference resolver: request {"text","entity"}, response {"text"}."""

    def __init__(self, transport: JsonTransport):
        self.transport = transport

    def resolve(self, text: str, entity: str) -> str:
        response = self.transport.request({"text": text, "entity": entity})
        if not isinstance(response.get("text"), str):
            raise ProviderError("Coreference provider response is missing 'text'")
        return response["text"]


def _mentions(sentence: str, entity_re: re.Pattern) -> bool:
    return entity_re.search(sentence) is not None


def resolve_coreferences(
        text: str,
        main_entity: str,
        provider: Optional[CoreferenceProvider] = None,
) -> str:
    """Replace sentence-initial It/This/They by the main entity once it has been mentioned."""
    if not main_entity or not main_entity.strip():
        raise ValueError("main_entity must be non-empty")
    if provider is not None:
        return provider.resolve(text, main_entity)

    entity_re = re.compile(r"(?<!\w)" + re.escape(main_entity) + r"(?!\w)", re.IGNORECASE)
    parts = _SENTENCE_SEPARATOR_RE.split(text)
    antecedent_seen = False
    replaced = 0
    for i in range(0, len(parts), 2):
        sentence = parts[i]
        if antecedent_seen:
            new_sentence, count = _LEADING_PRONOUN_RE.subn(r"\g<1>" + main_entity.replace("\\", r"\\"), sentence, count=1)
            if count:
                parts[i] = new_sentence
                replaced += count
        if _mentions(parts[i], entity_re):
            antecedent_seen = True
    if replaced:
        logger.debug(f"[CORPUS] Resolved {replaced} pronoun(s) to '{main_entity}'")
    return "".join(parts)
