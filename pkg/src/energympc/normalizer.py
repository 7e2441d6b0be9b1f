"""Per-dimension z-scoring of training vectors.

Models operate on normalized inputs so one noise scale can serve
heterogeneous state/action magnitudes. Dimensions with zero variance get
std 1 and a recorded warning flag instead of a failure; constant state
components are common early in training.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeError

_STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Normalizer:
    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray  # bool mask of zero-variance dimensions

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def has_degenerate(self) -> bool:
        return bool(self.degenerate.any())

    def normalize(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.dim:
            raise ShapeError(f"vector width {v.shape[-1]} != normalizer dim {self.dim}")
        return (v - self.mean) / self.std

    def denormalize(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.dim:
            raise ShapeError(f"vector width {v.shape[-1]} != normalizer dim {self.dim}")
        return v * self.std + self.mean


def fit_normalizer(X: np.ndarray, warn: bool = True) -> Normalizer:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ShapeError("normalizer expects a (n, d) sample matrix")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    degenerate = std < _STD_FLOOR
    if degenerate.any():
        if warn:
            warnings.warn(
                f"zero-variance dimensions {np.flatnonzero(degenerate).tolist()}: using std=1",
                RuntimeWarning,
                stacklevel=2,
            )
        std = np.where(degenerate, 1.0, std)
    return Normalizer(mean=mean, std=std, degenerate=degenerate)


def identity_normalizer(dim: int) -> Normalizer:
    return Normalizer(np.zeros(dim), np.ones(dim), np.zeros(dim, dtype=bool))
