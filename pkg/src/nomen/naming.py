"""Function-name normalization: demangle, split, stem, restricted-vocabulary
construction, and final conversion of raw names into token lists.
"""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .demangle import DEFAULT_FOREIGN_PATTERNS, Outcome, demangle
from .stem import porter_stem

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3
RESERVED = ("PAD", "BOS", "EOS", "UNK")

DEFAULT_TAU = 500
DEFAULT_MAX_NAME_TOKENS = 10
MIN_SUBSTRING_MATCH = 3  # shorter vocabulary words would shred names

# camelCase / UPPERCASE-run / digit boundaries; punctuation separates
_WORD_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


def split_identifier(ident: str) -> list[str]:
    """Split an identifier at underscores, case and letter/digit boundaries;
    lowercase the fragments."""
    if not ident:
        raise ValueError("empty identifier")
    return [w.lower() for w in _WORD_RE.findall(ident)]


def stem_token(token: str) -> str:
    """Porter stem; tokens containing digits pass through unchanged."""
    return porter_stem(token) if token.isalpha() else token


class RejectReason(enum.Enum):
    FOREIGN_LANGUAGE = "foreign_language"
    UNPARSEABLE = "unparseable"
    EMPTY = "empty"


@dataclass(frozen=True)
class Rejected:
    reason: RejectReason


@dataclass(frozen=True)
class NameTokens:
    tokens: tuple[str, ...]

    def __post_init__(self):
        if any(not t for t in self.tokens):
            raise ValueError("empty token")
        object.__setattr__(self, "tokens", tuple(self.tokens))


class TokenVocabulary:
    """Closed output vocabulary scored by project frequency (the number of
    distinct packages a token occurs in). Reserved ids: PAD=0 BOS=1 EOS=2
    UNK=3; real tokens follow, ordered by descending frequency then
    lexicographically."""

    def __init__(self, frequencies: dict[str, int], tau: int,
                 stoplist: frozenset[str] = frozenset(), _presorted: list[str] | None = None):
        self.tau = tau
        self.stoplist = frozenset(stoplist)
        if _presorted is None:
            ordered = sorted(frequencies, key=lambda t: (-frequencies[t], t))
        else:
            ordered = _presorted
        self.entries: dict[str, tuple[int, int]] = {
            t: (i + len(RESERVED), frequencies[t]) for i, t in enumerate(ordered)
        }
        self._by_id = {i: t for t, (i, _) in self.entries.items()}
        self._max_len = max((len(t) for t in ordered), default=0)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def __len__(self) -> int:
        return len(self.entries) + len(RESERVED)

    def id_of(self, token: str) -> int:
        entry = self.entries.get(token)
        return entry[0] if entry else UNK_ID

    def token_of(self, idx: int) -> str:
        if 0 <= idx < len(RESERVED):
            return RESERVED[idx]
        return self._by_id[idx]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.id_of(t) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self._by_id[i] for i in ids if i >= len(RESERVED)]

    def tokens_in_id_order(self) -> list[str]:
        return [self._by_id[i] for i in sorted(self._by_id)]

    def to_text(self) -> str:
        header = f"#tau={self.tau} #reserved={','.join(RESERVED)}\n"
        body = "".join(
            f"{t}\t{self.entries[t][1]}\n" for t in self.tokens_in_id_order()
        )
        return header + body

    @classmethod
    def from_text(cls, text: str) -> "TokenVocabulary":
        lines = text.splitlines()
        m = re.match(r"#tau=(\d+) #reserved=" + ",".join(RESERVED) + r"\Z",
                     lines[0] if lines else "")
        if not m:
            raise ValueError("bad name vocabulary header")
        freqs, order = {}, []
        for line in lines[1:]:
            if not line:
                continue
            token, _, freq = line.partition("\t")
            freqs[token] = int(freq)
            order.append(token)
        return cls(freqs, int(m.group(1)), _presorted=order)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def build_vocabulary(name_token_lists: Sequence[tuple[str, Sequence[str]]],
                     tau: int = DEFAULT_TAU,
                     stoplist: frozenset[str] = frozenset()) -> TokenVocabulary:
    """name_token_lists: (package_id, split-and-stemmed tokens) per function.

    A token scores one point per distinct package it appears in; tokens at or
    above tau and outside the stoplist enter the vocabulary.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    packages_of: dict[str, set[str]] = {}
    for package_id, tokens in name_token_lists:
        for t in tokens:
            packages_of.setdefault(t, set()).add(package_id)
    freqs = {t: len(pkgs) for t, pkgs in packages_of.items()
             if len(pkgs) >= tau and t not in stoplist}
    return TokenVocabulary(freqs, tau, stoplist)


def load_stoplist(text: str) -> frozenset[str]:
    """One token per line; '#' starts a comment."""
    out = set()
    for line in text.splitlines():
        token = line.split("#", 1)[0].strip()
        if token:
            out.add(token)
    return frozenset(out)


def final_convert(raw_tokens: Sequence[str], vocab: TokenVocabulary) -> NameTokens:
    """Keep in-vocabulary tokens; re-split the rest by greedy longest
    substring match against vocabulary words (>= 3 chars); drop residue."""
    out: list[str] = []
    for token in raw_tokens:
        if token in vocab:
            out.append(token)
            continue
        i = 0
        n = len(token)
        while i < n:
            hit = None
            for j in range(min(n, i + vocab._max_len), i + MIN_SUBSTRING_MATCH - 1, -1):
                if token[i:j] in vocab:
                    hit = token[i:j]
                    break
            if hit is not None:
                out.append(hit)
                i += len(hit)
            else:
                i += 1
    return NameTokens(tuple(out))


def normalize_name(raw_name: str, vocab: TokenVocabulary,
                   max_tokens: int = DEFAULT_MAX_NAME_TOKENS,
                   foreign_patterns: tuple[str, ...] = DEFAULT_FOREIGN_PATTERNS,
                   ) -> NameTokens | Rejected:
    """demangle -> split -> stem -> final_convert; rejection is a value."""
    dm = demangle(raw_name, foreign_patterns)
    if dm.outcome is Outcome.FOREIGN_LANGUAGE:
        return Rejected(RejectReason.FOREIGN_LANGUAGE)
    if dm.outcome is Outcome.UNPARSEABLE:
        return Rejected(RejectReason.UNPARSEABLE)
    fragments = split_identifier(dm.base_identifier) if dm.base_identifier else []
    if not fragments:
        return Rejected(RejectReason.EMPTY)
    stemmed = [stem_token(t) for t in fragments]
    converted = final_convert(stemmed, vocab)
    if not converted.tokens:
        return Rejected(RejectReason.EMPTY)
    return NameTokens(converted.tokens[:max_tokens])
