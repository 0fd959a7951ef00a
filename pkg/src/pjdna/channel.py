"""Storage channel simulation: dropout, read errors, replication, consensus.

Randomness is partitioned per strand and per replicate: every stream seeds
``numpy.random.default_rng`` with a tuple derived from (seed, purpose,
strand_id[, replicate_id]), so serial and parallel runs agree and a rerun
with the same profile is byte-identical.

Presets mirror stressors at defensible magnitudes.  The "aging95C" and
"xray" rate pairs are stand-in estimates chosen for this toolkit, not
measured channel parameters, and carry ``rate_provenance="artifact-estimate"``
so downstream metadata can say so.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import jr, kernels
from .errors import ConfigError
from .strand import DEFAULT_LAYOUT, ParseBatch, Strand, StrandLayout, parse_many

__all__ = [
    "ChannelProfile",
    "ReadSet",
    "preset",
    "PRESET_NAMES",
    "drop_strands",
    "corrupt_reads",
    "consensus",
]

_PROFILE_KEYS = {
    "dropout_p",
    "sub_p",
    "ins_p",
    "del_p",
    "coverage_mean",
    "coverage_model",
    "seed",
    "name",
    "rate_provenance",
}


@dataclass(frozen=True)
class ChannelProfile:
    dropout_p: float = 0.0
    sub_p: float = 0.0
    ins_p: float = 0.0
    del_p: float = 0.0
    coverage_mean: float = 10.0
    coverage_model: str = "fixed"  # "fixed" | "poisson"
    seed: int = 0
    name: str = "custom"
    rate_provenance: str = "user"

    def __post_init__(self):
        for field_name in ("dropout_p", "sub_p", "ins_p", "del_p"):
            v = getattr(self, field_name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{field_name} must lie in [0, 1], got {v}")
        if self.coverage_mean < 0:
            raise ConfigError("coverage_mean must be >= 0")
        if self.coverage_model not in ("fixed", "poisson"):
            raise ConfigError(f"unknown coverage model {self.coverage_model!r}")
        if self.coverage_model == "fixed" and self.coverage_mean != int(self.coverage_mean):
            raise ConfigError("fixed coverage needs an integer coverage_mean")

    def to_dict(self) -> dict:
        return {
            "dropout_p": self.dropout_p,
            "sub_p": self.sub_p,
            "ins_p": self.ins_p,
            "del_p": self.del_p,
            "coverage_mean": self.coverage_mean,
            "coverage_model": self.coverage_model,
            "seed": self.seed,
            "name": self.name,
            "rate_provenance": self.rate_provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelProfile":
        if not isinstance(d, dict):
            raise ConfigError("profile must be a JSON object")
        unknown = set(d) - _PROFILE_KEYS
        if unknown:
            raise ConfigError(f"profile has unknown keys: {sorted(unknown)}")
        return cls(**d)

    @property
    def noiseless(self) -> bool:
        return self.sub_p == 0.0 and self.ins_p == 0.0 and self.del_p == 0.0


_PRESETS = {
    "clean": ChannelProfile(name="clean", rate_provenance="preset"),
    "loss10": ChannelProfile(dropout_p=0.10, name="loss10", rate_provenance="preset"),
    "aging95C": ChannelProfile(
        dropout_p=0.15, sub_p=0.005, name="aging95C", rate_provenance="artifact-estimate"
    ),
    "xray": ChannelProfile(
        dropout_p=0.05, sub_p=0.02, name="xray", rate_provenance="artifact-estimate"
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, seed: int = 0) -> ChannelProfile:
    try:
        base = _PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESET_NAMES}") from None
    return replace(base, seed=seed)


@dataclass
class ReadSet:
    """Observed reads plus per-read origin ids (diagnostics only).

    Origins exist so simulations can be audited; nothing on the decode path
    accepts them.
    """

    sequences: list[str]
    origins: list[int]

    def __len__(self) -> int:
        return len(self.sequences)


def _seq_of(item) -> str:
    return item.sequence if isinstance(item, Strand) else item


def drop_strands(items: Sequence, p: float, seed) -> list:
    """Remove each element independently with probability ``p``.

    ``seed`` may be an int or a tuple of ints.  The same seed always draws
    the same per-position uniforms, so survivor sets at increasing ``p`` are
    nested.
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"drop probability must lie in [0, 1], got {p}")
    entropy = (seed, 0) if isinstance(seed, int) else tuple(seed) + (0,)
    u = np.random.default_rng(entropy).random(len(items))
    return [x for x, ui in zip(items, u) if ui >= p]


def corrupt_reads(strands: Sequence, profile: ChannelProfile) -> ReadSet:
    """Replicate and corrupt surviving strands into a read pool.

    Per strand, coverage is drawn (fixed or Poisson), then each replicate
    runs one left-to-right pass where every position is independently
    deleted, else followed by a uniform random insertion, else substituted
    uniformly over the three other nucleotides (priority in that order).
    """
    seed = profile.seed
    sequences: list[str] = []
    origins: list[int] = []
    fast = profile.noiseless
    for sid, item in enumerate(strands):
        seq = _seq_of(item)
        if profile.coverage_model == "fixed":
            k = int(profile.coverage_mean)
        else:
            k = int(np.random.default_rng((seed, 1, sid)).poisson(profile.coverage_mean))
        if fast:
            sequences.extend([seq] * k)
            origins.extend([sid] * k)
            continue
        codes = jr.codes_from_seq(seq)
        n = codes.shape[0]
        for rep in range(k):
            rng = np.random.default_rng((seed, 2, sid, rep))
            u = rng.random((3, n))
            ins_base = rng.integers(0, 4, n, dtype=np.uint8)
            sub_shift = rng.integers(1, 4, n, dtype=np.uint8)
            out = kernels.mutate_codes(
                codes, u, ins_base, sub_shift, profile.del_p, profile.ins_p, profile.sub_p
            )
            sequences.append(jr.seq_from_codes(out))
            origins.append(sid)
    return ReadSet(sequences=sequences, origins=origins)


def consensus(
    sequences: Iterable[str],
    layout: StrandLayout = DEFAULT_LAYOUT,
    cfg: jr.JrConfig = jr.DEFAULT_CONFIG,
    primer_tolerance: int = 0,
) -> tuple[list[tuple[int, bytes]], dict]:
    """Collapse raw reads into one (index, payload) pair per observed index.

    Reads are parsed individually; accepted parses group by index and each
    payload block settles by plurality vote, ties to the smallest value.
    Returns pairs sorted by index plus counters for every rejection reason.
    """
    seq_list = list(sequences)
    batch: ParseBatch = parse_many(seq_list, layout, cfg, primer_tolerance)
    counts = dict(batch.counts)
    if batch.indices.size == 0:
        counts["indices_observed"] = 0
        return [], counts
    order = np.argsort(batch.indices, kind="stable")
    idx_sorted = batch.indices[order]
    blocks_sorted = batch.payload_blocks[order]
    boundaries = np.nonzero(np.append(idx_sorted[1:] != idx_sorted[:-1], True))[0]
    winners = np.empty((boundaries.size, blocks_sorted.shape[1]), np.int64)
    start = 0
    for g, end in enumerate(boundaries + 1):
        grp = blocks_sorted[start:end]
        if grp.shape[0] == 1 or (grp == grp[0]).all():
            winners[g] = grp[0]
        else:
            for col in range(grp.shape[1]):
                winners[g, col] = np.bincount(grp[:, col]).argmax()
        start = end
    packed = jr.pack_block_rows(winners, cfg.bits_per_block)
    pairs = [
        (int(idx_sorted[b]), packed[g].tobytes()) for g, b in enumerate(boundaries)
    ]
    counts["indices_observed"] = len(pairs)
    return pairs, counts
