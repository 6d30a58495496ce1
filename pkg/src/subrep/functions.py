"""Compactly supported test functions with analytic gradients.

Four families, all supported in the closed ball B(center, scale):

  smooth_bump             A exp(-1 / (1 - u^2)), u = |x - c| / s, C-infinity
  tensor_hat              product of 1d hats of half-width s / sqrt(n)
  truncated_gaussian      A (exp(-u^2 / (2 sigma^2)) - exp(-2))_+, sigma = 1/2
  radial_polynomial_bump  A (1 - u^2)^2, C^1 across the support boundary

Values and gradients are vectorized over (M, n) point arrays.  Gradients at
the measure-zero kink sets of the hat take the one-sided value whose sign
field is continuous from the support interior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quadrature import QuadratureScheme, integrate_box

__all__ = [
    "Box",
    "Cube",
    "TestFunction",
    "BallIndicator",
    "cube_average",
    "FAMILIES",
]

FAMILIES = (
    "smooth_bump",
    "tensor_hat",
    "truncated_gaussian",
    "radial_polynomial_bump",
)


@dataclass(frozen=True)
class Box:
    """Axis-aligned box given by lower and upper corners."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.lower) != len(self.upper):
            raise ValueError("corner dimensions differ")
        if any(u <= l for l, u in zip(self.lower, self.upper)):
            raise ValueError(f"degenerate box {self.lower} .. {self.upper}")

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def volume(self) -> float:
        return float(np.prod(np.subtract(self.upper, self.lower)))

    @property
    def side_lengths(self) -> np.ndarray:
        return np.subtract(self.upper, self.lower).astype(float)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        lo = np.asarray(self.lower)
        hi = np.asarray(self.upper)
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def grid(self, m: int) -> np.ndarray:
        """Midpoint lattice with m cells per dimension, shape (m^n, n)."""
        axes = [
            self.lower[i] + (self.upper[i] - self.lower[i]) * (np.arange(m) + 0.5) / m
            for i in range(self.dimension)
        ]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True)
class Cube:
    """Axis-parallel cube, kept separate from Box because side length enters
    the inequalities it appears in."""

    center: tuple[float, ...]
    side: float

    def __post_init__(self) -> None:
        if self.side <= 0.0:
            raise ValueError(f"cube side must be positive, got {self.side}")

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def volume(self) -> float:
        return self.side**self.dimension

    def to_box(self) -> Box:
        h = self.side / 2.0
        return Box(
            tuple(c - h for c in self.center),
            tuple(c + h for c in self.center),
        )


def _bump_lipschitz_factor() -> float:
    # max over (0, 1) of 2 t exp(-1/(1-t^2)) / (1-t^2)^2, by golden section.
    gold = (math.sqrt(5.0) - 1.0) / 2.0

    def g(t: float) -> float:
        q = 1.0 - t * t
        return 2.0 * t * math.exp(-1.0 / q) / (q * q)

    a, b = 0.3, 0.95
    c, d = b - gold * (b - a), a + gold * (b - a)
    for _ in range(80):
        if g(c) > g(d):
            b, d = d, c
            c = b - gold * (b - a)
        else:
            a, c = c, d
            d = a + gold * (b - a)
    return g((a + b) / 2.0)


_BUMP_LIP = _bump_lipschitz_factor()


@dataclass(frozen=True)
class TestFunction:
    """One member of the compactly supported families above."""

    __test__ = False  # not a test case, despite the name

    family: str
    center: tuple[float, ...]
    scale: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, pick one of {FAMILIES}")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        if self.amplitude < 0.0:
            raise ValueError(f"amplitude must be nonnegative, got {self.amplitude}")

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def support_center(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def support_radius(self) -> float:
        return self.scale

    @property
    def compact_support(self) -> bool:
        return True

    def support_box(self, pad: float = 1.0) -> Box:
        c = self.support_center
        r = self.scale * pad
        return Box(tuple(c - r), tuple(c + r))

    def rescaled(self, lam: float) -> "TestFunction":
        """Dilation x -> f(x / lam) about the center: scale grows by lam."""
        if lam <= 0.0:
            raise ValueError("dilation factor must be positive")
        return TestFunction(self.family, self.center, self.scale * lam, self.amplitude)

    # -- evaluation ------------------------------------------------------

    def values(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - self.support_center
        A, s = self.amplitude, self.scale
        if self.family == "tensor_hat":
            h = s / math.sqrt(self.dimension)
            return A * np.prod(np.clip(1.0 - np.abs(d) / h, 0.0, None), axis=1)
        u2 = np.sum(d * d, axis=1) / (s * s)
        if self.family == "smooth_bump":
            out = np.zeros(len(pts))
            inside = u2 < 1.0
            out[inside] = A * np.exp(-1.0 / (1.0 - u2[inside]))
            return out
        if self.family == "truncated_gaussian":
            return A * np.clip(np.exp(-2.0 * u2) - math.exp(-2.0), 0.0, None)
        # radial_polynomial_bump
        q = np.clip(1.0 - u2, 0.0, None)
        return A * q * q

    def value(self, x) -> float:
        return float(self.values(np.atleast_2d(x))[0])

    def gradient(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - self.support_center
        A, s = self.amplitude, self.scale
        if self.family == "tensor_hat":
            h = s / math.sqrt(self.dimension)
            hats = np.clip(1.0 - np.abs(d) / h, 0.0, None)
            grad = np.zeros_like(d)
            for i in range(self.dimension):
                others = np.prod(np.delete(hats, i, axis=1), axis=1)
                live = hats[:, i] > 0.0
                grad[:, i] = np.where(live, -np.sign(d[:, i]) * A / h * others, 0.0)
            return grad
        u2 = np.sum(d * d, axis=1) / (s * s)
        if self.family == "smooth_bump":
            grad = np.zeros_like(d)
            inside = u2 < 1.0
            q = 1.0 - u2[inside]
            pref = A * np.exp(-1.0 / q) * (-2.0 / (q * q * s * s))
            grad[inside] = pref[:, None] * d[inside]
            return grad
        if self.family == "truncated_gaussian":
            inside = np.exp(-2.0 * u2) > math.exp(-2.0)
            pref = np.where(inside, -4.0 * A / (s * s) * np.exp(-2.0 * u2), 0.0)
            return pref[:, None] * d
        q = np.clip(1.0 - u2, 0.0, None)
        pref = -4.0 * A / (s * s) * q
        return pref[:, None] * d

    def gradient_norm(self, pts: np.ndarray) -> np.ndarray:
        return np.linalg.norm(self.gradient(pts), axis=1)

    @property
    def lipschitz_constant(self) -> float:
        """Exact sup |grad f|, per family."""
        A, s, n = self.amplitude, self.scale, self.dimension
        if self.family == "smooth_bump":
            return A / s * _BUMP_LIP
        if self.family == "tensor_hat":
            # Near the peak every hat factor tends to 1 and all n slopes
            # contribute: sup |grad| = A sqrt(n) / h with h = s / sqrt(n).
            return A * n / s
        if self.family == "truncated_gaussian":
            # |g'| = 4 A u exp(-2 u^2) / s, maximal at u = 1/2.
            return 2.0 * A / s * math.exp(-0.5)
        # radial_polynomial_bump: 4 A u (1 - u^2) / s peaks at u = 1/sqrt(3).
        return 8.0 * A / (3.0 * math.sqrt(3.0) * s)

    def describe(self) -> dict:
        return {
            "family": self.family,
            "center": list(self.center),
            "scale": self.scale,
            "amplitude": self.amplitude,
        }


@dataclass(frozen=True)
class BallIndicator:
    """Indicator of a ball, amplitude A.  Used where a bounded, compactly
    supported integrand with an exactly known integral is wanted; it has no
    gradient."""

    center: tuple[float, ...]
    radius: float
    amplitude: float = 1.0

    @property
    def dimension(self) -> int:
        return len(self.center)

    @property
    def support_center(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)

    @property
    def support_radius(self) -> float:
        return self.radius

    @property
    def compact_support(self) -> bool:
        return True

    def values(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = np.linalg.norm(pts - self.support_center, axis=1)
        return np.where(d <= self.radius, self.amplitude, 0.0)

    def value(self, x) -> float:
        return float(self.values(np.atleast_2d(x))[0])

    def describe(self) -> dict:
        return {
            "family": "ball_indicator",
            "center": list(self.center),
            "radius": self.radius,
            "amplitude": self.amplitude,
        }


def cube_average(f, cube: Cube, scheme: QuadratureScheme) -> float:
    """Mean of f over the cube, midpoint rule with doubling."""
    box = cube.to_box()
    val, _ = integrate_box(f.values, box.lower, box.upper, scheme)
    return val / cube.volume
