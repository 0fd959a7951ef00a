"""Deterministic gap repair: harmonic fill of masked pixels.

Masked pixels are replaced by the Jacobi iteration of 4-neighbor averaging
with the unmasked pixels held fixed, starting from zero and stopping when no
pixel moves by 0.5 gray levels or after 10,000 sweeps.  The result depends
only on the unmasked pixels, so repeating the call with the same mask
reproduces the same output.
"""

from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ShapeError

__all__ = ["inpaint"]


def inpaint(
    img: np.ndarray,
    mask: np.ndarray,
    tol: float = 0.5,
    max_iter: int = 10_000,
) -> np.ndarray:
    img = np.asarray(img)
    mask = np.asarray(mask, bool)
    if img.shape != mask.shape or img.ndim != 2:
        raise ShapeError(f"image {img.shape} and mask {mask.shape} must be equal 2-D shapes")
    out = img.astype(np.uint8, copy=True)
    if not mask.any():
        return out
    if mask.all() or img.size == 1:
        out[mask] = 0
        return out
    solution = kernels.harmonic_fill(img.astype(np.float64), mask, tol, max_iter)
    out[mask] = np.clip(np.rint(solution[mask]), 0, 255).astype(np.uint8)
    return out
