"""The pair (Gamma, v), its annulus partition, and function evaluation.

A function in the space is stored through its coefficient sequence
``a``; its value at ``z`` is the weighted discrete Hilbert transform
``sum_n a_n v_n / (z - gamma_n)`` and its norm is ``sum_n |a_n|^2 v_n``.
Everything here works at a fixed truncation length ``N``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyRangeError, InvalidInstanceError, PointOnGammaError
from .summation import pairwise_sum

DEFAULT_TRUNCATION = 64
ADMISSIBILITY_MARGIN = 1e-6


class Flag(str, Enum):
    """Three-valued outcome for properties that finite data cannot settle."""

    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


def _frozen(arr):
    arr = np.array(arr)
    arr.setflags(write=False)
    return arr


def tail_window(N: int, window: Optional[int] = None) -> int:
    """Length of the trailing window used for geometric tail tests."""
    if window is None:
        window = math.ceil(N / 4)
    return max(1, min(int(window), N - 1)) if N > 1 else 0


def window_ratios(terms, window: Optional[int] = None):
    """Successive ratios ``t[n+1]/t[n]`` over the trailing window."""
    t = np.asarray(terms, dtype=float)
    w = tail_window(len(t), window)
    if w == 0:
        return np.empty(0)
    tail = t[len(t) - w - 1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        return tail[1:] / tail[:-1]


@dataclass(frozen=True)
class SparsenessReport:
    ratio: float
    satisfied: bool


@dataclass(frozen=True)
class GammaSequence:
    """Nodes gamma_1..gamma_N with strictly increasing moduli."""

    entries: np.ndarray
    generator: Optional[str] = None

    def __post_init__(self):
        g = np.asarray(self.entries, dtype=complex).ravel()
        if g.size == 0:
            raise InvalidInstanceError("gamma sequence is empty")
        if not np.all(np.isfinite(g)):
            raise InvalidInstanceError("gamma sequence has non-finite entries")
        mod = np.abs(g)
        bad = np.nonzero(np.diff(mod) <= 0)[0]
        if bad.size:
            n = int(bad[0]) + 1
            raise InvalidInstanceError(
                f"moduli must increase strictly: |gamma_{n}| = {float(mod[n - 1])!r} "
                f">= |gamma_{n + 1}| = {float(mod[n])!r}")
        object.__setattr__(self, "entries", _frozen(g))

    @property
    def N(self) -> int:
        return len(self.entries)

    @cached_property
    def moduli(self) -> np.ndarray:
        return _frozen(np.abs(self.entries))

    @cached_property
    def sparseness_ratio(self) -> float:
        """min |gamma_{n+1}|/|gamma_n|; ``nan`` when N < 2."""
        if self.N < 2:
            return math.nan
        with np.errstate(divide="ignore"):
            return float(np.min(self.moduli[1:] / self.moduli[:-1]))

    @property
    def sparse(self) -> bool:
        return self.sparseness_ratio > 1

    def index_of(self, z: complex) -> Optional[int]:
        """1-based index n with gamma_n == z exactly, or None."""
        hit = np.nonzero(self.entries == complex(z))[0]
        return int(hit[0]) + 1 if hit.size else None


@dataclass(frozen=True)
class WeightSequence:
    entries: np.ndarray
    generator: Optional[str] = None

    def __post_init__(self):
        v = np.asarray(self.entries, dtype=float).ravel()
        if v.size == 0:
            raise InvalidInstanceError("weight sequence is empty")
        if not np.all(np.isfinite(v)):
            raise InvalidInstanceError("weights must be finite")
        bad = np.nonzero(v <= 0)[0]
        if bad.size:
            raise InvalidInstanceError(
                f"weights must be positive: v_{int(bad[0]) + 1} = {float(v[bad[0]])!r}")
        object.__setattr__(self, "entries", _frozen(v))

    @property
    def N(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class AnnulusPartition:
    """Rings Omega_1..Omega_N split at midpoints of consecutive moduli.

    Omega_1 is the open disc ``|z| < b_1``, Omega_n is ``b_{n-1} <= |z| < b_n``
    and the outermost ring Omega_N is closed off to infinity.
    """

    boundaries: np.ndarray

    @classmethod
    def from_gamma(cls, gamma: GammaSequence) -> "AnnulusPartition":
        m = gamma.moduli
        part = cls(_frozen((m[:-1] + m[1:]) / 2))
        for n in range(1, gamma.N + 1):
            assert part.index_of(gamma.entries[n - 1]) == n
        return part

    @property
    def N(self) -> int:
        return len(self.boundaries) + 1

    def index_of(self, z: complex) -> int:
        return self.index_of_radius(abs(z))

    def index_of_radius(self, r: float) -> int:
        return bisect.bisect_right(self.boundaries, float(r)) + 1

    def radial_range(self, n: int) -> tuple[float, float]:
        """[inner, outer) radii of Omega_n; outer is inf for n = N."""
        b = self.boundaries
        lo = 0.0 if n == 1 else float(b[n - 2])
        hi = math.inf if n == self.N else float(b[n - 1])
        return lo, hi


@dataclass(frozen=True)
class CoefficientVector:
    """Coefficients a_1..a_N of a function, with the weights of its space."""

    coefficients: np.ndarray
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=complex).ravel()
        if a.shape != np.shape(self.weights):
            raise ValueError("coefficient and weight lengths differ")
        object.__setattr__(self, "coefficients", _frozen(a))

    @property
    def norm_sq(self) -> float:
        return float(pairwise_sum(np.abs(self.coefficients) ** 2 * self.weights))

    def normalized(self) -> np.ndarray:
        """The coordinates b_n = a_n sqrt(v_n) in plain l^2."""
        return self.coefficients * np.sqrt(self.weights)

    def inner(self, other: "CoefficientVector") -> complex:
        return complex(pairwise_sum(
            self.coefficients * np.conj(other.coefficients) * self.weights))

    def __add__(self, other):
        return CoefficientVector(self.coefficients + other.coefficients, self.weights)

    def __rmul__(self, scalar):
        return CoefficientVector(scalar * self.coefficients, self.weights)


@dataclass(frozen=True)
class AdmissibilityReport:
    partial: float
    tail_ratio: float
    flag: Flag


@dataclass(frozen=True)
class SpacePair:
    gamma: GammaSequence
    v: WeightSequence
    window: Optional[int] = None

    def __post_init__(self):
        if self.gamma.N != self.v.N:
            raise InvalidInstanceError(
                f"gamma has {self.gamma.N} entries but v has {self.v.N}")

    @classmethod
    def from_values(cls, gamma: Sequence[complex], v: Sequence[float],
                    window: Optional[int] = None) -> "SpacePair":
        return cls(GammaSequence(gamma), WeightSequence(v), window)

    @property
    def N(self) -> int:
        return self.gamma.N

    @cached_property
    def partition(self) -> AnnulusPartition:
        return AnnulusPartition.from_gamma(self.gamma)

    @cached_property
    def admissibility_terms(self) -> np.ndarray:
        return _frozen(self.v.entries / (1 + self.gamma.moduli ** 2))

    @property
    def admissibility_partial(self) -> float:
        return admissibility_report(self).partial

    @property
    def tail_ratio(self) -> float:
        return admissibility_report(self).tail_ratio

    @property
    def admissible_flag(self) -> Flag:
        return admissibility_report(self).flag

    def vector(self, coefficients) -> CoefficientVector:
        return CoefficientVector(coefficients, self.v.entries)

    def check_off_gamma(self, z: complex) -> None:
        n = self.gamma.index_of(z)
        if n is not None:
            raise PointOnGammaError(complex(z), n)


def sparseness_report(gamma: GammaSequence) -> SparsenessReport:
    if gamma.N < 2:
        raise InvalidInstanceError("sparseness needs at least two nodes")
    r = gamma.sparseness_ratio
    return SparsenessReport(r, r > 1)


def admissibility_report(space: SpacePair) -> AdmissibilityReport:
    """Partial admissibility sum plus a windowed geometric-domination test."""
    terms = space.admissibility_terms
    partial = float(pairwise_sum(terms))
    ratios = window_ratios(terms, space.window)
    if ratios.size == 0:
        return AdmissibilityReport(partial, math.nan, Flag.INCONCLUSIVE)
    tail_ratio = float(np.max(ratios))
    if tail_ratio < 1 - ADMISSIBILITY_MARGIN:
        flag = Flag.YES
    elif np.all(ratios >= 1):
        flag = Flag.NO
    else:
        flag = Flag.INCONCLUSIVE
    return AdmissibilityReport(partial, tail_ratio, flag)


def annulus_of(partition: AnnulusPartition, z: complex) -> int:
    return partition.index_of(z)


def evaluate(space: SpacePair, a: CoefficientVector, z: complex) -> complex:
    """Value at ``z`` of the function with coefficients ``a``."""
    space.check_off_gamma(z)
    terms = a.coefficients * space.v.entries / (complex(z) - space.gamma.entries)
    return complex(pairwise_sum(terms))


def kernel_norm_sq(space: SpacePair, lam: complex) -> float:
    """k_lambda(lambda) = sum_n v_n / |lambda - gamma_n|^2."""
    space.check_off_gamma(lam)
    d = np.abs(complex(lam) - space.gamma.entries) ** 2
    return float(pairwise_sum(space.v.entries / d))


def kernel_vector(space: SpacePair, lam: complex) -> CoefficientVector:
    """Coefficients of the reproducing kernel at ``lam``."""
    space.check_off_gamma(lam)
    return space.vector(1 / np.conj(complex(lam) - space.gamma.entries))


def kernel_eval(space: SpacePair, lam: complex, z: complex) -> complex:
    if complex(lam) == complex(z):
        return complex(kernel_norm_sq(space, lam))
    space.check_off_gamma(z)
    space.check_off_gamma(lam)
    g = space.gamma.entries
    terms = space.v.entries / (np.conj(complex(lam) - g) * (complex(z) - g))
    return complex(pairwise_sum(terms))


def tail_weight_sums(space: SpacePair) -> np.ndarray:
    """P_n = sum_{m>n} v_m / |gamma_m|^2 at truncation N, for n = 1..N."""
    with np.errstate(divide="ignore"):
        t = space.v.entries / space.gamma.moduli ** 2
    return np.array([pairwise_sum(t[n:]) for n in range(1, space.N + 1)])


def test_function(space: SpacePair, kind: str, n: int) -> CoefficientVector:
    """Unit-norm test vectors q_n, g_n, h_n (1-based ``n``).

    q_n(z) = sqrt(v_n)/(z - gamma_n)
    g_n(z) = P_n^{-1/2} sum_{m>n} v_m / (conj(gamma_m) (z - gamma_m))
    h_n(z) = V_n^{-1/2} sum_{m<n} v_m / (z - gamma_m)
    """
    N = space.N
    if not 1 <= n <= N:
        raise IndexError(f"index {n} outside 1..{N}")
    v = space.v.entries
    a = np.zeros(N, dtype=complex)
    if kind == "q":
        a[n - 1] = 1 / math.sqrt(v[n - 1])
    elif kind == "g":
        if n == N:
            raise EmptyRangeError(f"g_{n} needs indices beyond the truncation N={N}")
        g = space.gamma.entries[n:]
        P = float(pairwise_sum(v[n:] / np.abs(g) ** 2))
        a[n:] = 1 / (math.sqrt(P) * np.conj(g))
    elif kind == "h":
        if n == 1:
            raise EmptyRangeError("h_1 is an empty sum")
        V = float(pairwise_sum(v[:n - 1]))
        a[:n - 1] = 1 / math.sqrt(V)
    else:
        raise ValueError(f"unknown test-function kind {kind!r}")
    return space.vector(a)


test_function.__test__ = False  # keep pytest from collecting it on import
