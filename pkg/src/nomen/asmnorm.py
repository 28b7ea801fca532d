"""Instruction normalization and the input-side vocabulary.

Operands are rewritten syntactically, no semantic disassembly: absolute
memory references and register-relative references with a large displacement
become MEM, large immediates become IMM, everything else stays verbatim.
One token represents the whole instruction.
"""

from __future__ import annotations

import hashlib
import logging
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import Instruction, RawFunction

log = logging.getLogger("nomen.asmnorm")

DEFAULT_IMM_THRESHOLD = 5000

PAD_ID = 0
UNK_ID = 1
RESERVED = ("PAD", "UNK")


def _x86_64_registers() -> frozenset[str]:
    regs = set()
    for base in "ax bx cx dx si di bp sp".split():
        regs.update({"r" + base, "e" + base, base})
    regs.update({"al", "bl", "cl", "dl", "ah", "bh", "ch", "dh",
                 "sil", "dil", "bpl", "spl"})
    for n in range(8, 16):
        regs.update({f"r{n}", f"r{n}d", f"r{n}w", f"r{n}b"})
    for n in range(32):
        regs.update({f"xmm{n}", f"ymm{n}", f"zmm{n}"})
    for n in range(8):
        regs.update({f"mm{n}", f"st({n})", f"k{n}"})
    regs.update({"st", "rip", "eip", "cs", "ds", "es", "fs", "gs", "ss"})
    return frozenset(regs)


X86_64_REGISTERS = _x86_64_registers()

_DEC_RE = re.compile(r"[+-]?\d+\Z")
_HEX_RE = re.compile(r"[+-]?0[xX][0-9a-fA-F]+\Z")
_HSUF_RE = re.compile(r"[+-]?\d[0-9a-fA-F]*[hH]\Z")


def parse_literal(text: str) -> int | None:
    """Integer value of a decimal, 0x-hex, or h-suffixed hex literal."""
    s = text.strip()
    if _DEC_RE.match(s):
        return int(s, 10)
    if _HEX_RE.match(s):
        return int(s, 16)
    if _HSUF_RE.match(s):
        neg = s.startswith("-")
        body = s.lstrip("+-")[:-1]
        val = int(body, 16)
        return -val if neg else val
    return None


@dataclass(frozen=True)
class NormalizedInstruction:
    token: str


def _split_terms(expr: str) -> list[tuple[int, str]] | None:
    """Split 'RAX+RCX*4-0x10' into signed terms; None when empty."""
    parts = re.split(r"([+-])", expr)
    terms = []
    sign = 1
    for part in parts:
        part = part.strip()
        if not part:
            continue
        if part == "+":
            sign = 1
        elif part == "-":
            sign = -1
        else:
            terms.append((sign, part))
            sign = 1
    return terms or None


def _classify_memory(expr: str, threshold: int, registers: frozenset[str]) -> str | None:
    """Return 'MEM' if the bracketed expression must be rewritten, None to
    keep the operand verbatim."""
    terms = _split_terms(expr)
    if terms is None:
        return None
    has_register = False
    displacement = 0
    for sign, term in terms:
        base = term.split("*")[0].strip()
        if base.lower() in registers:
            has_register = True
            continue
        val = parse_literal(term)
        if val is None:
            # symbolic term (label, unknown register name): keep verbatim
            return None
        displacement += sign * val
    if not has_register:
        return "MEM"  # absolute literal address
    if abs(displacement) > threshold:
        return "MEM"
    return None


def normalize_operand(op: str, threshold: int, registers: frozenset[str]) -> str:
    s = op.strip()
    if not s:
        return s
    lb, rb = s.find("["), s.rfind("]")
    if lb != -1 and rb > lb:
        if _classify_memory(s[lb + 1:rb], threshold, registers) == "MEM":
            return "MEM"
        return s
    if ":" in s:
        seg, _, rest = s.partition(":")
        if seg.strip().lower() in registers and parse_literal(rest) is not None:
            return "MEM"  # segment-prefixed absolute reference
        return s
    val = parse_literal(s)
    if val is not None:
        return "IMM" if abs(val) > threshold else s
    if s.lower() in registers:
        return s
    log.debug("operand kept verbatim: %r", op)
    return s


def normalize_instruction(ins: Instruction, imm_threshold: int = DEFAULT_IMM_THRESHOLD,
                          registers: frozenset[str] | None = None) -> NormalizedInstruction:
    """Render one instruction as a single whitespace-free token."""
    if imm_threshold <= 0:
        raise ValueError("imm_threshold must be positive")
    regs = X86_64_REGISTERS if registers is None else registers
    ops = [normalize_operand(op, imm_threshold, regs) for op in ins.operands]
    token = ins.mnemonic.lower()
    if ops:
        token += "_" + ",".join(ops)
    return NormalizedInstruction(re.sub(r"\s+", "_", token))


def normalize_function(fn: RawFunction, imm_threshold: int = DEFAULT_IMM_THRESHOLD,
                       registers: frozenset[str] | None = None) -> list[str]:
    return [normalize_instruction(i, imm_threshold, registers).token
            for i in fn.instructions]


class InstrVocabulary:
    """Instruction-token vocabulary built from the training split.

    Reserved: PAD=0, UNK=1. Non-reserved ids are assigned by descending
    training frequency, ties broken lexicographically.
    """

    def __init__(self, counts: dict[str, int], min_frequency: int):
        self.min_frequency = min_frequency
        self.counts = dict(counts)
        ordered = sorted(counts, key=lambda t: (-counts[t], t))
        self.token_to_id = {t: i + len(RESERVED) for i, t in enumerate(ordered)}
        self.id_to_token = {i: t for t, i in self.token_to_id.items()}

    def __len__(self) -> int:
        return len(self.token_to_id) + len(RESERVED)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokens]

    def to_text(self) -> str:
        header = f"#min_freq={self.min_frequency} #reserved={','.join(RESERVED)}\n"
        lines = [f"{self.id_to_token[i]}\t{self.counts[self.id_to_token[i]]}"
                 for i in sorted(self.id_to_token)]
        return header + "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "InstrVocabulary":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#min_freq="):
            raise ValueError("bad instruction vocabulary header")
        m = re.match(r"#min_freq=(\d+)", lines[0])
        counts = {}
        for line in lines[1:]:
            if not line:
                continue
            token, _, cnt = line.partition("\t")
            counts[token] = int(cnt)
        return cls(counts, int(m.group(1)))

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


def build_instruction_vocabulary(train_fns: Sequence[Sequence[str]],
                                 min_frequency: int = 2) -> InstrVocabulary:
    """train_fns: normalized token sequences from the training split only."""
    if not train_fns:
        raise ValueError("empty training set")
    if min_frequency < 1:
        raise ValueError("min_frequency must be >= 1")
    counts = Counter()
    for tokens in train_fns:
        counts.update(tokens)
    kept = {t: c for t, c in counts.items() if c >= min_frequency}
    return InstrVocabulary(kept, min_frequency)


def encode_function(fn: RawFunction, vocab: InstrVocabulary, max_len: int = 500,
                    imm_threshold: int = DEFAULT_IMM_THRESHOLD) -> list[int]:
    tokens = normalize_function(fn, imm_threshold)[:max_len]
    return vocab.encode(tokens)
