"""Seeded random states and Hermitian matrices for property sweeps."""

import numpy as np


def random_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random pure state: a normalized standard complex Gaussian vector."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_hermitian(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    """GUE-style matrix ``(G + G^H) / 2`` with standard complex Gaussian ``G``."""
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    return scale * (g + g.conj().T) / 2
