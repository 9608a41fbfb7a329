"""Abbreviation definition detection and expansion.

Definitions are found with the Schwartz-Hearst rules: a parenthesised short form
preceded by a long form whose words contain the short form's characters in
order, the first one starting a word.
"""
import re
from typing import Dict, List, Optional, Tuple

_DEFINITION_RE = re.compile(r"\(\s*([^()\s]{1,10})\s*\)")
_SENTENCE_BREAK_RE = re.compile(r"[.?!;]\s")


def is_short_form(candidate: str) -> bool:
    if not 1 <= len(candidate) <= 10:
        return False
    if not candidate[0].isalnum():
        return False
    letters = [c for c in candidate if c.isalpha()]
    if not letters:
        return False
    uppercase = sum(1 for c in letters if c.isupper())
    return uppercase * 2 >= len(letters)


def best_long_form(short_form: str, window: str) -> Optional[str]:
    """Shortest suffix of ``window`` that contains the short form's characters in order."""
    s_idx = len(short_form) - 1
    l_idx = len(window) - 1
    while s_idx >= 0:
        char = short_form[s_idx].lower()
        if not char.isalnum():
            s_idx -= 1
            continue
        while l_idx >= 0 and (
                window[l_idx].lower() != char
                or (s_idx == 0 and l_idx > 0 and window[l_idx - 1].isalnum())
        ):
            l_idx -= 1
        if l_idx < 0:
            return None
        l_idx -= 1
        s_idx -= 1
    start = window.rfind(" ", 0, l_idx + 1) + 1
    long_form = window[start:].strip()
    return long_form or None


def _window_before(text: str, position: int, max_words: int) -> str:
    head = text[:position]
    breaks = list(_SENTENCE_BREAK_RE.finditer(head))
    if breaks:
        head = head[breaks[-1].end():]
    words = head.split()
    return " ".join(words[-max_words:])


def _standalone(short_form: str) -> re.Pattern:
    return re.compile(r"(?<![\w-])" + re.escape(short_form) + r"(?![\w-])")


def find_definitions(text: str) -> List[Tuple[str, str, int, int]]:
    """Return (short_form, long_form, paren_start, paren_end) in text order, first definition wins."""
    definitions = []
    seen = set()
    for match in _DEFINITION_RE.finditer(text):
        short_form = match.group(1)
        if short_form in seen or not is_short_form(short_form):
            continue
        max_words = min(len(short_form) + 5, len(short_form) * 2)
        window = _window_before(text, match.start(), max_words)
        if not window:
            continue
        long_form = best_long_form(short_form, window)
        if not long_form or long_form == short_form:
            continue
        if len(long_form.split()) > max_words or len(long_form) <= len(short_form):
            continue
        seen.add(short_form)
        definitions.append((short_form, long_form, match.start(), match.end()))
    return definitions


def _expand_once(text: str) -> Tuple[str, Dict[str, str]]:
    definitions = find_definitions(text)
    if not definitions:
        return text, {}

    long_forms = [lf for _, lf, _, _ in definitions]
    # A short form that reappears inside any long form would be re-expanded on a second pass.
    usable = [
        d for d in definitions
        if not any(_standalone(d[0]).search(lf) for lf in long_forms)
    ]
    mapping = {sf: lf for sf, lf, _, _ in usable}

    protected = [(start, end) for _, _, start, end in definitions]
    replacements = []
    for short_form, long_form, _, def_end in usable:
        for occurrence in _standalone(short_form).finditer(text, def_end):
            if any(start <= occurrence.start() < end for start, end in protected):
                continue
            replacements.append((occurrence.start(), occurrence.end(), long_form))

    if not replacements:
        return text, mapping

    replacements.sort()
    pieces = []
    cursor = 0
    for start, end, long_form in replacements:
        if start < cursor:
            continue
        pieces.append(text[cursor:start])
        pieces.append(long_form)
        cursor = end
    pieces.append(text[cursor:])
    return "".join(pieces), mapping


def expand_abbreviations(text: str) -> Tuple[str, Dict[str, str]]:
    """Replace every standalone short form that follows its definition by the long form.

    The defining occurrence itself is left as written. Expansion repeats until the
    text stops changing, since an expanded short form can complete the long form of a
    later definition ("AD treatment (DT)").
    """
    expanded, mapping = _expand_once(text)
    for _ in range(len(_DEFINITION_RE.findall(text))):
        again, mapping = _expand_once(expanded)
        if again == expanded:
            break
        expanded = again
    return expanded, mapping
