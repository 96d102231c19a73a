"""Paice/Husk iterative affix-removal stemmer.

The rule table lives in data/lancaster_rules.txt; each rule names a
reversed suffix, how many characters to strip, an optional replacement,
and whether stemming continues on the result.  A candidate stem is only
accepted if it keeps the word pronounceable: words starting with a vowel
must keep at least two characters, words starting with a consonant at
least three with a vowel (y counts) among the first three.
"""

from __future__ import annotations

import re
from importlib import resources

_RULE_RE = re.compile(r"^([a-z]+)(\*?)(\d)([a-z]*)([>.])$")
_VOWELS = "aeiouy"


class Rule:
    __slots__ = ("ending", "intact_only", "remove", "append", "cont")

    def __init__(self, ending, intact_only, remove, append, cont):
        self.ending = ending
        self.intact_only = intact_only
        self.remove = remove
        self.append = append
        self.cont = cont


def parse_rules(text):
    """Parse rule lines into a dict keyed by the suffix's final letter."""
    table: dict[str, list[Rule]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _RULE_RE.match(line)
        if m is None:
            raise ValueError(f"bad stemmer rule on line {line_no}: {line!r}")
        reversed_ending, intact, remove, append, cont = m.groups()
        rule = Rule(reversed_ending[::-1], bool(intact), int(remove), append, cont == ">")
        table.setdefault(reversed_ending[0], []).append(rule)
    return table


def _load_default_table():
    text = resources.files("newscast.data").joinpath("lancaster_rules.txt").read_text("utf-8")
    return parse_rules(text)


class LancasterStemmer:
    """Stateless stemmer over a parsed rule table."""

    def __init__(self, table=None):
        self.table = table if table is not None else _load_default_table()

    def stem(self, word: str) -> str:
        word = word.lower()
        if not word:
            return word
        intact = word
        while True:
            rules = self.table.get(word[-1])
            if not rules:
                return word
            for rule in rules:
                if not word.endswith(rule.ending):
                    continue
                if rule.intact_only and word != intact:
                    continue
                if not self._acceptable(word, rule.remove):
                    continue
                word = word[: len(word) - rule.remove] + rule.append
                if rule.cont:
                    break  # re-enter the outer loop with the new ending
                return word
            else:
                return word  # no rule fired

    @staticmethod
    def _acceptable(word, remove):
        remaining = len(word) - remove
        if word[0] in _VOWELS:
            return remaining >= 2
        return remaining >= 3 and (word[1] in _VOWELS or word[2] in _VOWELS)
