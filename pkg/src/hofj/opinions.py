"""Innate opinions and resistance parameters for synthetic experiments.

All draws use numpy's PCG64 seeded through ``SeedSequence(seed,
spawn_key=(stream,))``; innate opinions use stream 0 and resistances stream 1,
so the two vectors are independent even under the same seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_core import derive_rng

GENERATOR = "numpy.PCG64/SeedSequence"
DISTRIBUTIONS = ("uniform", "exponential", "power-law")

INNATE_STREAM = 0
RESISTANCE_STREAM = 1


@dataclass(frozen=True)
class GenSpec:
    distribution: str
    n: int
    seed: int = 0
    x_min: float = 1.0
    alpha_pl: float = 2.5

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}; choose from {DISTRIBUTIONS}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.x_min <= 0:
            raise ValueError("x_min must be positive")
        if self.alpha_pl <= 1:
            raise ValueError("power-law exponent must exceed 1")


def draw_raw(spec: GenSpec) -> np.ndarray:
    """Un-normalised draws (inverse-CDF for the exponential and power-law cases)."""
    u = derive_rng(spec.seed, INNATE_STREAM).random(spec.n)
    if spec.distribution == "uniform":
        return u
    if spec.distribution == "exponential":
        # density exp(x_min - x) on [x_min, inf)
        return spec.x_min - np.log1p(-u)
    return spec.x_min * (1.0 - u) ** (-1.0 / (spec.alpha_pl - 1.0))


def generate_innate(spec: GenSpec) -> np.ndarray:
    x = draw_raw(spec)
    if spec.distribution == "uniform":
        return x
    return x / x.max()


def generate_resistance(n: int, seed: int) -> np.ndarray:
    """Uniform on the open interval (0, 1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = derive_rng(seed, RESISTANCE_STREAM)
    a = rng.random(n)
    while True:
        bad = a <= 0.0
        if not bad.any():
            return a
        a[bad] = rng.random(int(bad.sum()))


def write_vector(vec, path) -> None:
    """Single column, one value per compacted node id."""
    np.savetxt(path, np.asarray(vec), fmt="%.17g")


def read_vector(path) -> np.ndarray:
    return np.atleast_1d(np.loadtxt(path, dtype=float, comments=("#", "%")))
