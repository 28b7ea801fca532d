"""Linker-symbol demangling, scoped to what name normalization needs: the
innermost source-name of an Itanium `_Z` symbol. Nested names, length-
prefixed identifiers, constructors/destructors, operators and template
argument lists are parsed structurally; full type grammar is not — any
construct outside the subset yields Unparseable and the function is dropped.

Names produced by non-C/C++ toolchains are detected up front with a
configurable regex list and reported as ForeignLanguage.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

# Go emits middle-dot qualified symbols and `go.` prefixes; GHC leaves
# `_ghc` markers and z-encoded module paths.
DEFAULT_FOREIGN_PATTERNS = ("·", r"^go\.", r"_ghc", r"zm")


class Outcome(enum.Enum):
    PLAIN = "plain"
    DEMANGLED = "demangled"
    FOREIGN_LANGUAGE = "foreign_language"
    UNPARSEABLE = "unparseable"


@dataclass(frozen=True)
class DemangleResult:
    outcome: Outcome
    base_identifier: str | None = None

    @property
    def ok(self) -> bool:
        return self.outcome in (Outcome.PLAIN, Outcome.DEMANGLED)


class _Unsupported(Exception):
    pass


_OPERATOR_CODES = {
    "nw", "na", "dl", "da", "aw", "ps", "ng", "ad", "de", "co", "pl", "mi",
    "ml", "dv", "rm", "an", "or", "eo", "aS", "pL", "mI", "mL", "dV", "rM",
    "aN", "oR", "eO", "ls", "rs", "lS", "rS", "eq", "ne", "lt", "gt", "le",
    "ge", "ss", "nt", "aa", "oo", "pp", "mm", "cm", "pm", "pt", "cl", "ix",
    "qu", "cv", "li",
}

_BUILTIN_TYPES = set("vwbcahstijlmxynofdegz")
_SPECIAL_SUBS = set("abdiost")  # Sa Sb Sd Si So Ss St


class _Cursor:
    __slots__ = ("s", "pos")

    def __init__(self, s: str):
        self.s = s
        self.pos = 0

    def peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.s[i] if i < len(self.s) else ""

    def advance(self, n: int = 1) -> None:
        self.pos += n
        if self.pos > len(self.s):
            raise _Unsupported("ran past end")

    def expect(self, ch: str) -> None:
        if self.peek() != ch:
            raise _Unsupported(f"expected {ch!r} at {self.pos}")
        self.advance()


def _parse_source_name(c: _Cursor) -> str:
    start = c.pos
    while c.peek().isdigit():
        c.advance()
    if start == c.pos:
        raise _Unsupported("no length prefix")
    length = int(c.s[start:c.pos])
    if length <= 0 or c.pos + length > len(c.s):
        raise _Unsupported("bad source-name length")
    name = c.s[c.pos:c.pos + length]
    c.advance(length)
    return name


def _skip_substitution(c: _Cursor) -> None:
    c.expect("S")
    if c.peek() in _SPECIAL_SUBS:
        c.advance()
        return
    while c.peek() and (c.peek().isdigit() or c.peek().isupper()):
        c.advance()
    c.expect("_")


def _skip_literal(c: _Cursor) -> None:
    # L <type> [n] <digits> E  (integer literals; anything fancier bails)
    c.expect("L")
    _skip_type(c)
    if c.peek() == "n":
        c.advance()
    while c.peek().isdigit():
        c.advance()
    c.expect("E")


def _skip_template_args(c: _Cursor) -> None:
    c.expect("I")
    while True:
        ch = c.peek()
        if not ch:
            raise _Unsupported("unterminated template args")
        if ch == "E":
            c.advance()
            return
        if ch == "L":
            _skip_literal(c)
        elif ch == "J":
            c.advance()  # parameter pack, members follow until its E
            depth = 1
            while depth:
                if c.peek() == "E":
                    depth -= 1
                    c.advance()
                elif not c.peek():
                    raise _Unsupported("unterminated pack")
                else:
                    _skip_template_arg_item(c)
        else:
            _skip_template_arg_item(c)


def _skip_template_arg_item(c: _Cursor) -> None:
    if c.peek() == "L":
        _skip_literal(c)
    elif c.peek() == "X":
        raise _Unsupported("expression template argument")
    else:
        _skip_type(c)


def _skip_type(c: _Cursor) -> None:
    while c.peek() in "rVKPRO":
        c.advance()
    ch = c.peek()
    if not ch:
        raise _Unsupported("missing type")
    if ch.isdigit():
        _parse_source_name(c)
        if c.peek() == "I":
            _skip_template_args(c)
        return
    if ch == "N":
        _parse_nested(c, track=False)
        return
    if ch == "S":
        _skip_substitution(c)
        if c.peek() == "I":
            _skip_template_args(c)
        return
    if ch == "F":
        c.advance()
        if c.peek() == "Y":
            c.advance()
        while c.peek() != "E":
            _skip_type(c)
        c.advance()
        return
    if ch == "A":
        c.advance()
        while c.peek().isdigit():
            c.advance()
        c.expect("_")
        _skip_type(c)
        return
    if ch == "M":
        c.advance()
        _skip_type(c)
        _skip_type(c)
        return
    if ch == "T":
        c.advance()
        while c.peek() and c.peek() != "_":
            c.advance()
        c.expect("_")
        return
    if ch == "D":
        c.advance()
        sub = c.peek()
        c.advance()
        if sub == "p":
            _skip_type(c)
        return
    if ch == "u":
        c.advance()
        _parse_source_name(c)
        return
    if ch in _BUILTIN_TYPES:
        c.advance()
        if c.peek() == "I":  # rare, but harmless to accept
            _skip_template_args(c)
        return
    raise _Unsupported(f"type code {ch!r}")


def _parse_component(c: _Cursor, last: str | None) -> str | None:
    """One <unqualified-name>-ish component; returns the updated innermost
    identifier (or the previous one when the component carries none)."""
    ch = c.peek()
    if ch.isdigit():
        return _parse_source_name(c)
    if ch == "C" and c.peek(1) in "12345":
        c.advance(2)
        if last is None:
            raise _Unsupported("constructor without class name")
        return last
    if ch == "D" and c.peek(1) in "012345":
        c.advance(2)
        if last is None:
            raise _Unsupported("destructor without class name")
        return last
    if ch == "S":
        _skip_substitution(c)
        return last
    if ch == "L":
        c.advance()  # internal-linkage marker
        return last
    if ch == "T":
        c.advance()
        while c.peek() and c.peek() != "_":
            c.advance()
        c.expect("_")
        return last
    code = ch + c.peek(1)
    if code in _OPERATOR_CODES:
        c.advance(2)
        if code == "cv":
            _skip_type(c)
        elif code == "li":
            _parse_source_name(c)
        return "operator"
    raise _Unsupported(f"component {ch!r}")


def _parse_nested(c: _Cursor, track: bool) -> str | None:
    c.expect("N")
    while c.peek() in "rVKRO":
        c.advance()
    last: str | None = None
    while True:
        if not c.peek():
            raise _Unsupported("unterminated nested name")
        if c.peek() == "E":
            c.advance()
            break
        last = _parse_component(c, last)
        if c.peek() == "I":
            _skip_template_args(c)
    if track and last is None:
        raise _Unsupported("nested name with no identifier")
    return last


def _parse_mangled(core: str) -> str:
    c = _Cursor(core)
    c.advance(2)  # _Z
    ch = c.peek()
    if ch in "ZGT":
        # local names, guard variables, vtables/typeinfo: not functions
        raise _Unsupported("non-function encoding")
    if ch == "N":
        name = _parse_nested(c, track=True)
        assert name is not None
        return name
    if ch == "L":
        c.advance()
        ch = c.peek()
    if c.peek(0) + c.peek(1) == "St":
        c.advance(2)
        ch = c.peek()
    if ch.isdigit():
        return _parse_source_name(c)
    code = c.peek() + c.peek(1)
    if code in _OPERATOR_CODES:
        return "operator"
    raise _Unsupported(f"encoding starts with {ch!r}")


def demangle(raw_name: str,
             foreign_patterns: tuple[str, ...] = DEFAULT_FOREIGN_PATTERNS) -> DemangleResult:
    """Classify a symbol and extract its unqualified base identifier."""
    if not raw_name:
        return DemangleResult(Outcome.UNPARSEABLE)
    for pat in foreign_patterns:
        if re.search(pat, raw_name):
            return DemangleResult(Outcome.FOREIGN_LANGUAGE)
    if not raw_name.startswith("_Z"):
        return DemangleResult(Outcome.PLAIN, raw_name)
    core = raw_name.split(".", 1)[0]  # drop compiler clone suffixes (.isra.0 ...)
    try:
        ident = _parse_mangled(core)
    except _Unsupported:
        return DemangleResult(Outcome.UNPARSEABLE)
    return DemangleResult(Outcome.DEMANGLED, ident)
