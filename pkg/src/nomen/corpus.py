"""Corpus ingestion: JSON-lines listings -> canonical function records,
length filtering, and duplicate removal keyed on normalized instructions.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable

log = logging.getLogger("nomen.corpus")

RECORD_FIELDS = {"package", "binary", "address", "name", "instructions"}
INSTRUCTION_FIELDS = {"mn", "ops"}


class ListingError(ValueError):
    """Malformed corpus input; carries the 1-based line number."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Instruction:
    mnemonic: str
    operands: tuple[str, ...] = ()
    address: int | None = None

    def __post_init__(self):
        if not self.mnemonic or any(ch.isspace() for ch in self.mnemonic):
            raise ValueError(f"bad mnemonic: {self.mnemonic!r}")
        if any("\n" in op for op in self.operands):
            raise ValueError("operand contains newline")
        if self.address is not None and self.address < 0:
            raise ValueError("negative instruction address")
        object.__setattr__(self, "operands", tuple(self.operands))


@dataclass
class RawFunction:
    package_id: str
    binary_id: str
    function_id: str
    mangled_name: str
    instructions: list[Instruction] = field(default_factory=list)

    def __post_init__(self):
        addrs = [i.address for i in self.instructions if i.address is not None]
        if any(b < a for a, b in zip(addrs, addrs[1:])):
            raise ValueError(f"{self.function_id}: instruction addresses decrease")


def _parse_record(obj: dict, lineno: int, package_id: str | None,
                  binary_id: str | None, ordinal: int, strict: bool) -> RawFunction:
    if not isinstance(obj, dict):
        raise ListingError(lineno, "record is not a JSON object")
    if strict:
        unknown = set(obj) - RECORD_FIELDS
        if unknown:
            raise ListingError(lineno, f"unknown fields: {sorted(unknown)}")
    pkg = obj.get("package", package_id)
    binry = obj.get("binary", binary_id)
    if not isinstance(pkg, str) or not pkg:
        raise ListingError(lineno, "missing or invalid 'package'")
    if not isinstance(binry, str) or not binry:
        raise ListingError(lineno, "missing or invalid 'binary'")
    if "name" not in obj:
        raise ListingError(lineno, "missing 'name' field")
    name = obj["name"]
    if not isinstance(name, str):
        raise ListingError(lineno, "'name' must be a string")
    addr = obj.get("address")
    if addr is not None and (not isinstance(addr, int) or isinstance(addr, bool) or addr < 0):
        raise ListingError(lineno, "'address' must be an unsigned integer or null")
    raw_instrs = obj.get("instructions")
    if not isinstance(raw_instrs, list):
        raise ListingError(lineno, "missing or invalid 'instructions'")
    instrs = []
    for k, it in enumerate(raw_instrs):
        if not isinstance(it, dict):
            raise ListingError(lineno, f"instruction {k} is not an object")
        if strict and set(it) - INSTRUCTION_FIELDS:
            raise ListingError(lineno, f"instruction {k} has unknown fields")
        mn = it.get("mn")
        ops = it.get("ops", [])
        if not isinstance(mn, str) or not isinstance(ops, list) \
                or any(not isinstance(o, str) for o in ops):
            raise ListingError(lineno, f"instruction {k} malformed")
        try:
            instrs.append(Instruction(mn, tuple(ops)))
        except ValueError as e:
            raise ListingError(lineno, f"instruction {k}: {e}") from None

    fid = f"{pkg}/{binry}/{addr if addr is not None else ordinal}"
    return RawFunction(pkg, binry, fid, name, instrs)


def parse_listing(stream: IO[str] | Iterable[str], package_id: str | None = None,
                  binary_id: str | None = None, strict: bool = True,
                  skip_bad_records: bool = False) -> list[RawFunction]:
    """Parse a JSON-lines listing into RawFunction records, order preserved.

    package_id / binary_id are defaults for records that omit those fields.
    Malformed lines raise ListingError unless skip_bad_records is set, in
    which case they are logged and dropped.
    """
    out: list[RawFunction] = []
    seen: set[str] = set()
    ordinal = 0
    for lineno, line in enumerate(stream, start=1):
        if not line.strip():
            continue
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ListingError(lineno, f"invalid JSON ({e.msg})") from None
            fn = _parse_record(obj, lineno, package_id, binary_id, ordinal, strict)
            if fn.function_id in seen:
                raise ListingError(lineno, f"duplicate function_id {fn.function_id!r}")
        except ListingError:
            if skip_bad_records:
                log.warning("skipping bad record at line %d", lineno)
                ordinal += 1
                continue
            raise
        seen.add(fn.function_id)
        out.append(fn)
        ordinal += 1
    return out


def filter_by_length(fns: list[RawFunction], min_len: int = 5,
                     max_len: int = 500) -> list[RawFunction]:
    """Drop functions shorter than min_len; truncate longer than max_len to
    their first max_len instructions."""
    if min_len < 1 or max_len < min_len:
        raise ValueError(f"invalid length bounds [{min_len}, {max_len}]")
    out = []
    for fn in fns:
        n = len(fn.instructions)
        if n < min_len:
            continue
        if n > max_len:
            fn = dataclasses.replace(fn, instructions=fn.instructions[:max_len])
        out.append(fn)
    return out


def deduplicate(fns: list[RawFunction], imm_threshold: int = 5000) -> list[RawFunction]:
    """Keep the first of any group of functions whose normalized instruction
    sequences are identical; order preserved.

    The key is the full tuple of normalized tokens (dict lookup hashes it but
    always equality-checks the sequence, so hash collisions cannot merge
    distinct functions).
    """
    from . import asmnorm  # deferred: asmnorm imports Instruction from here

    seen: dict[tuple[str, ...], str] = {}
    out = []
    for fn in fns:
        key = tuple(
            asmnorm.normalize_instruction(ins, imm_threshold=imm_threshold).token
            for ins in fn.instructions
        )
        if key in seen:
            log.debug("dropping %s, duplicate of %s", fn.function_id, seen[key])
            continue
        seen[key] = fn.function_id
        out.append(fn)
    return out
