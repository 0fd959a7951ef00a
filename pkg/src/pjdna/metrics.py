"""Recovery quality metrics: windowed SSIM, the all-or-nothing baseline,
and outcome tallies for externally classified datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigError, ShapeError

__all__ = [
    "SsimParams",
    "ssim",
    "em_decode",
    "em_ssim",
    "OutcomeTally",
    "tally_outcomes",
]


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    data_range: float = 255.0


DEFAULT_SSIM = SsimParams()


def _window_kernel(side: int, params: SsimParams, gaussian: bool) -> np.ndarray:
    if gaussian:
        x = np.arange(side, dtype=np.float64) - (side - 1) / 2.0
        k = np.exp(-(x * x) / (2.0 * params.sigma * params.sigma))
    else:
        k = np.ones(side, np.float64)
    return k / k.sum()


def _filter_valid(img: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Separable valid-mode correlation with a 1-D kernel on both axes."""
    out = sliding_window_view(img, k.size, axis=0) @ k
    return sliding_window_view(out, k.size, axis=1) @ k


def ssim(a: np.ndarray, b: np.ndarray, params: SsimParams = DEFAULT_SSIM) -> float:
    """Mean local structural similarity over all full window positions.

    Windows are 11x11 Gaussian (sigma 1.5); images smaller than the window in
    either dimension fall back to a uniform window of their shortest side.
    """
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")
    if a.ndim != 2:
        raise ShapeError("ssim expects 2-D grayscale images")
    side = min(a.shape[0], a.shape[1], params.window)
    if side < 1:
        raise ShapeError("images must be non-empty")
    k = _window_kernel(side, params, gaussian=side == params.window)

    mu_a = _filter_valid(a, k)
    mu_b = _filter_valid(b, k)
    var_a = _filter_valid(a * a, k) - mu_a * mu_a
    var_b = _filter_valid(b * b, k) - mu_b * mu_b
    cov = _filter_valid(a * b, k) - mu_a * mu_b

    c1 = (params.k1 * params.data_range) ** 2
    c2 = (params.k2 * params.data_range) ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float((num / den).mean())


def em_decode(
    strands_present: int, strands_total: int, original: np.ndarray
) -> np.ndarray | None:
    """All-or-nothing baseline: the file decodes only when nothing is lost.

    Models schemes whose strands are interdependent (shared headers, chained
    blocks): any missing strand fails the whole file.  Callers score a
    failure as SSIM 0.
    """
    if not 0 <= strands_present <= strands_total:
        raise ConfigError("strand counts are inconsistent")
    if strands_present == strands_total:
        return np.array(original, copy=True)
    return None


def em_ssim(strands_present: int, strands_total: int) -> float:
    if not 0 <= strands_present <= strands_total:
        raise ConfigError("strand counts are inconsistent")
    return 1.0 if strands_present == strands_total else 0.0


@dataclass(frozen=True)
class OutcomeTally:
    """Joint classification outcomes for (original, degraded) image pairs."""

    both_correct: int
    orig_only_correct: int
    degraded_only_correct: int
    both_wrong_same: int
    both_wrong_diff: int

    @property
    def total(self) -> int:
        return (
            self.both_correct
            + self.orig_only_correct
            + self.degraded_only_correct
            + self.both_wrong_same
            + self.both_wrong_diff
        )

    @property
    def eligible(self) -> int:
        """Cases where the original classified correctly (the PA denominator)."""
        return self.both_correct + self.orig_only_correct

    @property
    def prediction_accuracy(self) -> float:
        """Fraction of degraded images still classified correctly, among
        cases whose original classified correctly.  NaN when no case is
        eligible."""
        if self.eligible == 0:
            return math.nan
        return self.both_correct / self.eligible

    def to_dict(self) -> dict:
        return {
            "both_correct": self.both_correct,
            "orig_only_correct": self.orig_only_correct,
            "degraded_only_correct": self.degraded_only_correct,
            "both_wrong_same": self.both_wrong_same,
            "both_wrong_diff": self.both_wrong_diff,
            "total": self.total,
            "eligible": self.eligible,
            "prediction_accuracy": self.prediction_accuracy,
        }


def tally_outcomes(
    truth: Sequence[int], pred_orig: Sequence[int], pred_degraded: Sequence[int]
) -> OutcomeTally:
    """Count the four outcome categories; misclassified originals are
    excluded from the accuracy ratio."""
    t = np.asarray(truth)
    o = np.asarray(pred_orig)
    d = np.asarray(pred_degraded)
    if not (t.shape == o.shape == d.shape) or t.ndim != 1:
        raise ShapeError("truth and prediction vectors must share one length")
    ok_o = o == t
    ok_d = d == t
    return OutcomeTally(
        both_correct=int((ok_o & ok_d).sum()),
        orig_only_correct=int((ok_o & ~ok_d).sum()),
        degraded_only_correct=int((~ok_o & ok_d).sum()),
        both_wrong_same=int((~ok_o & ~ok_d & (o == d)).sum()),
        both_wrong_diff=int((~ok_o & ~ok_d & (o != d)).sum()),
    )
