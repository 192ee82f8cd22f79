"""MCAR masks over a feature matrix.

``True`` in a mask means observed.  Missing cells are represented by NaN
in the masked values, which is never a valid failure rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MaskError

MODES = ("mcar-cell", "column-drop")


@dataclass(frozen=True)
class Mask:
    observed: np.ndarray
    mode: str = "mcar-cell"
    rate: float = 0.0
    seed: int | None = None

    @property
    def shape(self):
        return self.observed.shape

    @property
    def missing(self) -> np.ndarray:
        return ~self.observed

    @property
    def n_missing(self) -> int:
        return int(self.missing.sum())


@dataclass(frozen=True)
class MaskedMatrix:
    values: np.ndarray
    mask: Mask

    @property
    def shape(self):
        return self.values.shape

    @classmethod
    def from_values(cls, values) -> "MaskedMatrix":
        """Wrap a matrix whose missing cells are already NaN."""
        values = np.array(values, dtype=float)
        return cls(values, Mask(~np.isnan(values), mode="mcar-cell",
                                rate=float(np.isnan(values).mean()) if values.size else 0.0))


def sample_mask(n_samples: int, n_features: int, rate: float,
                mode: str = "mcar-cell", seed: int = 0) -> Mask:
    """Draw a mask without looking at any data.

    ``mcar-cell`` drops each cell independently with probability ``rate``.
    ``column-drop`` drops whole columns with probability ``rate``; a draw
    that would drop every column is redrawn.
    """
    if n_samples < 1 or n_features < 1:
        raise MaskError("cannot mask a zero-sized matrix")
    if not 0.0 <= rate < 1.0:
        raise MaskError(f"missing rate must lie in [0, 1), got {rate}")
    if mode not in MODES:
        raise MaskError(f"unknown mask mode {mode!r}; expected one of {MODES}")
    rng = np.random.Generator(np.random.PCG64(seed))
    if mode == "mcar-cell":
        observed = rng.random((n_samples, n_features)) >= rate
    else:
        while True:
            keep = rng.random(n_features) >= rate
            if keep.any():
                break
        observed = np.broadcast_to(keep, (n_samples, n_features)).copy()
    return Mask(observed, mode, float(rate), seed)


def apply_mask(X, mask: Mask) -> MaskedMatrix:
    X = np.asarray(X, dtype=float)
    if X.shape != mask.shape:
        raise MaskError(f"mask shape {mask.shape} does not match matrix shape {X.shape}")
    values = np.where(mask.observed, X, np.nan)
    return MaskedMatrix(values, mask)
