"""Strand assembly and parsing: primers, index region, payload region.

A strand is ``primer5 + index region + payload region + primer3``.  The index
and payload regions form one continuous jump-rotating stream whose rotating
context starts at the last nucleotide of the 5' primer, so the 5' junction
can never extend a homopolymer run beyond the code's bound.  The 3' junction
can add at most the leading run of the 3' primer to the data region's final
run; with the built-in primers (no internal repeats) the full default strand
stays within the default bound of 3.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import jr
from .errors import CapacityError, ConfigError, LayoutError, RangeError, StrandReject

__all__ = [
    "DEFAULT_PRIMER5",
    "DEFAULT_PRIMER3",
    "StrandLayout",
    "Strand",
    "ParseBatch",
    "assemble_strand",
    "assemble_many",
    "parse_strand",
    "parse_many",
]

# Fixed default primers: repeat-free (so junction runs stay short) and with no
# 8-mer equal to the reverse complement of any 8-mer across the pair.
DEFAULT_PRIMER5 = "GCTACAGTATGTCTGTGCGC"
DEFAULT_PRIMER3 = "ATGCAGTGTACGACGCGATAT"

REJECT_LENGTH = "length"
REJECT_PRIMER = "primer"
REJECT_CORRUPT = "corrupt"
REJECT_REASONS = (REJECT_LENGTH, REJECT_PRIMER, REJECT_CORRUPT)


def _head_run(seq: str) -> int:
    run = 0
    for ch in seq:
        if ch == seq[0]:
            run += 1
        else:
            break
    return run


def _pattern_lead_run(cfg: jr.JrConfig) -> int:
    """Longest possible homopolymer run at the start of an encoded stream."""
    if cfg.group_radices[0] == 3:
        return 0  # rotating start differs from the junction nucleotide
    run = 1
    for r in (cfg.group_radices * 2)[1:]:
        if r == 4:
            run += 1
        else:
            break
    return run


def _pattern_tail_run(cfg: jr.JrConfig) -> int:
    """Longest possible homopolymer run at the end of an encoded stream.

    A run ending at the last position extends backward only through direct
    positions, so it is bounded by the pattern's trailing radix-4 entries
    plus one (the run may start on any position kind).
    """
    run = 1
    for r in reversed(cfg.group_radices):
        if r == 4:
            run += 1
        else:
            break
    return run


@dataclass(frozen=True)
class StrandLayout:
    primer5: str = DEFAULT_PRIMER5
    primer3: str = DEFAULT_PRIMER3
    index_nt: int = 10
    payload_nt: int = 90

    @classmethod
    def from_dict(cls, d: dict) -> "StrandLayout":
        keys = {"primer5", "primer3", "index_nt", "payload_nt"}
        if set(d) != keys:
            raise ConfigError(f"layout dict must have exactly the keys {sorted(keys)}")
        return cls(
            primer5=str(d["primer5"]),
            primer3=str(d["primer3"]),
            index_nt=int(d["index_nt"]),
            payload_nt=int(d["payload_nt"]),
        )

    def to_dict(self) -> dict:
        return {
            "primer5": self.primer5,
            "primer3": self.primer3,
            "index_nt": self.index_nt,
            "payload_nt": self.payload_nt,
        }

    @property
    def data_nt(self) -> int:
        return self.index_nt + self.payload_nt

    @property
    def total_nt(self) -> int:
        return len(self.primer5) + self.data_nt + len(self.primer3)

    def index_groups(self, cfg: jr.JrConfig) -> int:
        return self.index_nt // cfg.group_size

    def payload_groups(self, cfg: jr.JrConfig) -> int:
        return self.payload_nt // cfg.group_size

    def index_capacity(self, cfg: jr.JrConfig) -> int:
        return cfg.block_limit ** self.index_groups(cfg)

    def payload_bits(self, cfg: jr.JrConfig) -> int:
        return self.payload_groups(cfg) * cfg.bits_per_block

    def payload_bytes_len(self, cfg: jr.JrConfig) -> int:
        return (self.payload_bits(cfg) + 7) // 8

    def prev_init(self) -> str:
        """Rotating context preceding the data region."""
        return self.primer5[-1] if self.primer5 else "A"

    def validate(self, cfg: jr.JrConfig) -> None:
        if self.index_nt <= 0 or self.index_nt % cfg.group_size:
            raise ConfigError(f"index_nt {self.index_nt} is not a positive multiple of group size")
        if self.payload_nt <= 0 or self.payload_nt % cfg.group_size:
            raise ConfigError(
                f"payload_nt {self.payload_nt} is not a positive multiple of group size"
            )
        if self.payload_groups(cfg) != cfg.groups_per_payload:
            raise ConfigError(
                f"payload_nt {self.payload_nt} holds {self.payload_groups(cfg)} groups, "
                f"config expects {cfg.groups_per_payload}"
            )
        bound = cfg.jump_length + 1
        for name, p in (("primer5", self.primer5), ("primer3", self.primer3)):
            if any(ch not in jr.ALPHABET for ch in p):
                raise LayoutError(f"{name} contains characters outside ACGT")
            if p and jr.max_homopolymer_run(p) > bound:
                raise LayoutError(f"{name} homopolymer run exceeds {bound}")
        if self.primer5:
            tail = _head_run(self.primer5[::-1])
            if tail + _pattern_lead_run(cfg) > bound:
                raise LayoutError("primer5 tail run can extend a data run past the bound")
        if self.primer3:
            head = _head_run(self.primer3)
            # A leading run of 1 is irreducible; longer runs must leave slack.
            if head > 1 and head + _pattern_tail_run(cfg) > bound:
                raise LayoutError("primer3 head run can extend a data run past the bound")


DEFAULT_LAYOUT = StrandLayout()


@dataclass(frozen=True)
class Strand:
    index_value: int
    payload: bytes  # payload bits packed MSB-first, zero padding in the tail bits
    sequence: str


@dataclass
class ParseBatch:
    """Accepted parses plus per-reason reject counters."""

    indices: np.ndarray  # int64, sorted by input order
    payload_blocks: np.ndarray  # (n_accepted, payload groups) int64
    counts: dict

    def payload_bytes(self, cfg: jr.JrConfig) -> list[bytes]:
        if self.indices.size == 0:
            return []
        packed = jr.pack_block_rows(self.payload_blocks, cfg.bits_per_block)
        return [row.tobytes() for row in packed]


def _index_to_blocks(index_values: np.ndarray, n_blocks: int, limit: int) -> np.ndarray:
    rem = index_values.astype(np.int64, copy=True)
    out = np.empty((index_values.shape[0], n_blocks), np.int64)
    for j in range(n_blocks - 1, -1, -1):
        out[:, j] = rem % limit
        rem //= limit
    return out


def _blocks_to_index(blocks: np.ndarray, limit: int) -> np.ndarray:
    value = np.zeros(blocks.shape[0], np.int64)
    for j in range(blocks.shape[1]):
        value = value * limit + blocks[:, j]
    return value


def _payload_to_blocks(payload: bytes, layout: StrandLayout, cfg: jr.JrConfig) -> np.ndarray:
    nbytes = layout.payload_bytes_len(cfg)
    if len(payload) != nbytes:
        raise RangeError(f"payload must be {nbytes} bytes, got {len(payload)}")
    nbits = layout.payload_bits(cfg)
    spare = nbytes * 8 - nbits
    if spare and payload[-1] & ((1 << spare) - 1):
        raise RangeError(f"the final {spare} padding bits of the payload must be zero")
    row = np.frombuffer(payload, np.uint8).reshape(1, -1)
    return jr.unpack_block_rows(row, layout.payload_groups(cfg), cfg.bits_per_block)[0]


def assemble_many(
    index_values: np.ndarray,
    payload_blocks: np.ndarray,
    layout: StrandLayout = DEFAULT_LAYOUT,
    cfg: jr.JrConfig = jr.DEFAULT_CONFIG,
) -> list[Strand]:
    """Assemble one strand per row of ``payload_blocks``."""
    layout.validate(cfg)
    index_values = np.asarray(index_values, np.int64)
    n = index_values.shape[0]
    if n == 0:
        return []
    cap = layout.index_capacity(cfg)
    if index_values.min() < 0 or index_values.max() >= cap:
        raise CapacityError(f"index values must lie in [0, {cap})")
    if payload_blocks.min(initial=0) < 0 or payload_blocks.max(initial=0) >= cfg.block_limit:
        raise RangeError("payload block values outside the encodable range")
    idx_blocks = _index_to_blocks(index_values, layout.index_groups(cfg), cfg.block_limit)
    blocks = np.concatenate([idx_blocks, payload_blocks.astype(np.int64)], axis=1)
    prev0 = np.full(n, jr.ALPHABET.index(layout.prev_init()), np.uint8)
    codes = jr.encode_block_rows(blocks, cfg, prev0)
    packed = jr.pack_block_rows(payload_blocks.astype(np.int64), cfg.bits_per_block)
    p5, p3 = layout.primer5, layout.primer3
    strands = []
    for i in range(n):
        seq = p5 + jr.seq_from_codes(codes[i]) + p3
        strands.append(Strand(int(index_values[i]), packed[i].tobytes(), seq))
    return strands


def assemble_strand(
    index_value: int,
    payload: bytes,
    layout: StrandLayout = DEFAULT_LAYOUT,
    cfg: jr.JrConfig = jr.DEFAULT_CONFIG,
) -> Strand:
    """Build the full strand carrying ``payload`` at tile ``index_value``."""
    layout.validate(cfg)
    cap = layout.index_capacity(cfg)
    if not 0 <= index_value < cap:
        raise CapacityError(f"index {index_value} outside [0, {cap})")
    blocks = _payload_to_blocks(payload, layout, cfg).reshape(1, -1)
    return assemble_many(np.array([index_value]), blocks, layout, cfg)[0]


def parse_many(
    seqs: Sequence[str],
    layout: StrandLayout = DEFAULT_LAYOUT,
    cfg: jr.JrConfig = jr.DEFAULT_CONFIG,
    primer_tolerance: int = 0,
) -> ParseBatch:
    """Parse observed sequences in bulk.

    Rejects carry no payload: a read of the wrong length counts as "length",
    a primer Hamming distance above ``primer_tolerance`` as "primer", and a
    rotating violation / out-of-range block / bad character as "corrupt".
    """
    layout.validate(cfg)
    counts = {
        "reads_total": len(seqs),
        "accepted": 0,
        "reject_length": 0,
        "reject_primer": 0,
        "reject_corrupt": 0,
    }
    total = layout.total_nt
    good = [s for s in seqs if len(s) == total]
    counts["reject_length"] = len(seqs) - len(good)
    if not good:
        return ParseBatch(np.empty(0, np.int64), np.empty((0, cfg.groups_per_payload), np.int64), counts)

    joined = "".join(good).encode("ascii", "replace")  # non-ASCII decodes as invalid
    buf = np.frombuffer(joined, np.uint8).reshape(len(good), total)
    codes = jr._ASCII_CODE[buf]
    n5, n3 = len(layout.primer5), len(layout.primer3)

    keep = np.ones(len(good), bool)
    if n5:
        p5 = jr.codes_from_seq(layout.primer5)
        keep &= (codes[:, :n5] != p5).sum(axis=1) <= primer_tolerance
    if n3:
        p3 = jr.codes_from_seq(layout.primer3)
        keep &= (codes[:, total - n3 :] != p3).sum(axis=1) <= primer_tolerance
    counts["reject_primer"] = int((~keep).sum())

    data = codes[keep][:, n5 : n5 + layout.data_nt]
    m = data.shape[0]
    if m == 0:
        return ParseBatch(np.empty(0, np.int64), np.empty((0, cfg.groups_per_payload), np.int64), counts)

    ok = ~(data == 255).any(axis=1)  # non-ACGT inside the data region
    prev0 = np.full(m, jr.ALPHABET.index(layout.prev_init()), np.uint8)
    blocks, viol = jr.decode_code_rows(data, cfg, prev0)
    ok &= viol < 0
    ok &= (blocks < cfg.block_limit).all(axis=1)
    counts["reject_corrupt"] = int((~ok).sum())

    blocks = blocks[ok]
    n_idx = layout.index_groups(cfg)
    indices = _blocks_to_index(blocks[:, :n_idx], cfg.block_limit)
    counts["accepted"] = int(indices.size)
    return ParseBatch(indices, blocks[:, n_idx:], counts)


def parse_strand(
    seq: str,
    layout: StrandLayout = DEFAULT_LAYOUT,
    cfg: jr.JrConfig = jr.DEFAULT_CONFIG,
    primer_tolerance: int = 0,
) -> tuple[int, bytes]:
    """Parse one observed sequence to ``(index_value, payload)`` or raise
    :class:`StrandReject` with a machine-readable reason."""
    batch = parse_many([seq], layout, cfg, primer_tolerance)
    if batch.counts["reject_length"]:
        raise StrandReject(REJECT_LENGTH, f"expected {layout.total_nt} nt, got {len(seq)}")
    if batch.counts["reject_primer"]:
        raise StrandReject(REJECT_PRIMER, f"primer Hamming distance exceeds {primer_tolerance}")
    if batch.counts["reject_corrupt"]:
        raise StrandReject(REJECT_CORRUPT, "rotating violation or out-of-range block")
    payload = batch.payload_bytes(cfg)[0]
    return int(batch.indices[0]), payload
