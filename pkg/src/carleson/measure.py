"""Finitely described nonnegative measures and their annulus integrals.

Continuous components are angularly uniform, so each integrand the
criteria need reduces to a one-dimensional radial integral. For a circle
of radius r the angular mean of ``1/|z - gamma|^2`` is ``1/|r^2 - |gamma|^2|``.

Every integral may return ``math.inf``; that value is meaningful (the
measure is not Carleson) and is propagated, never raised.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np

from . import expr as ex
from .errors import InvalidInstanceError
from .quadrature import gauss_legendre, integrate
from .space import AnnulusPartition, SpacePair
from .summation import pairwise_sum

log = logging.getLogger(__name__)

MIN_DISCRETIZATION = 8


@dataclass(frozen=True)
class Atom:
    z: complex
    w: float

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "w", float(self.w))
        if not (math.isfinite(self.z.real) and math.isfinite(self.z.imag)):
            raise InvalidInstanceError(f"atom location {self.z!r} is not finite")
        if not (self.w >= 0 and math.isfinite(self.w)):
            raise InvalidInstanceError(f"atom weight {self.w!r} must be finite and >= 0")


@dataclass(frozen=True)
class AtomFamily:
    """Atoms z(n), w(n) for n_lo <= n <= n_hi."""

    n_lo: int
    n_hi: int
    z_expr: ex.Node
    w_expr: ex.Node

    def __post_init__(self):
        if self.n_hi < self.n_lo:
            raise InvalidInstanceError(f"empty atom range {self.n_lo}..{self.n_hi}")

    def expand(self) -> tuple[Atom, ...]:
        out = []
        for n in range(self.n_lo, self.n_hi + 1):
            w = ex.evaluate(self.w_expr, n)
            if isinstance(w, complex):
                if w.imag != 0:
                    raise InvalidInstanceError(f"atom weight at n={n} is not real: {w!r}")
                w = w.real
            out.append(Atom(ex.eval_expr(self.z_expr, n), w))
        return tuple(out)


@dataclass(frozen=True)
class CircleUniform:
    """Total mass ``w`` spread uniformly over the circle |z| = r."""

    r: float
    w: float

    def __post_init__(self):
        if not (self.r > 0 and math.isfinite(self.r)):
            raise InvalidInstanceError(f"circle radius {self.r!r} must be positive")
        if not (self.w >= 0 and math.isfinite(self.w)):
            raise InvalidInstanceError(f"circle mass {self.w!r} must be finite and >= 0")


@dataclass(frozen=True)
class RadialPower:
    """d mu = c r^alpha dr x uniform angle on a <= |z| <= b."""

    a: float
    b: float
    alpha: float
    c: float

    def __post_init__(self):
        if not (0 <= self.a < self.b and math.isfinite(self.b)):
            raise InvalidInstanceError(f"radial support needs 0 <= a < b, got [{self.a}, {self.b}]")
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise InvalidInstanceError(f"radial coefficient {self.c!r} must be finite and >= 0")
        if not math.isfinite(self.alpha):
            raise InvalidInstanceError("radial exponent must be finite")


Component = Union[Atom, AtomFamily, CircleUniform, RadialPower]


@dataclass(frozen=True)
class Measure:
    components: tuple = ()
    _atoms: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        expanded = []
        for comp in self.components:
            if isinstance(comp, Atom):
                expanded.append((comp,))
            elif isinstance(comp, AtomFamily):
                expanded.append(comp.expand())
            else:
                expanded.append(())
        object.__setattr__(self, "_atoms", tuple(expanded))

    @property
    def atoms(self) -> tuple[Atom, ...]:
        """Every concrete atom, in declaration order."""
        return tuple(a for group in self._atoms for a in group)

    @property
    def is_atomic(self) -> bool:
        return all(isinstance(c, (Atom, AtomFamily)) for c in self.components)

    @property
    def is_finite_atomic(self) -> bool:
        """Only explicitly listed atoms (no index families, no densities)."""
        return all(isinstance(c, Atom) for c in self.components)

    @property
    def has_family(self) -> bool:
        return any(isinstance(c, AtomFamily) for c in self.components)

    @cached_property
    def atom_arrays(self):
        atoms = self.atoms
        z = np.array([a.z for a in atoms], dtype=complex)
        w = np.array([a.w for a in atoms], dtype=float)
        return z, w

    def check_against(self, space: SpacePair) -> None:
        """Reject atoms sitting exactly on Gamma."""
        for atom in self.atoms:
            space.check_off_gamma(atom.z)

    def scaled(self, t: float) -> "Measure":
        return Measure(tuple(_scale(c, t) for c in self.components))

    def __add__(self, other: "Measure") -> "Measure":
        return Measure(self.components + other.components)


def _scale(comp, t):
    if isinstance(comp, Atom):
        return Atom(comp.z, comp.w * t)
    if isinstance(comp, AtomFamily):
        return AtomFamily(comp.n_lo, comp.n_hi, comp.z_expr,
                          ex.BinOp("*", ex.literal(t), comp.w_expr))
    if isinstance(comp, CircleUniform):
        return CircleUniform(comp.r, comp.w * t)
    return RadialPower(comp.a, comp.b, comp.alpha, comp.c * t)


# ---------------------------------------------------------------------------
# radial pieces

def _clip(comp: RadialPower, lo: float, hi: float):
    return max(comp.a, lo), min(comp.b, hi)


def _power_integral(c, p, lo, hi):
    """c * int_lo^hi r^p dr in closed form (inf when divergent at 0)."""
    if hi <= lo or c == 0:
        return 0.0
    if lo == 0 and p <= -1:
        log.warning("radial integral of r^%g diverges at the origin", p)
        return math.inf
    if p == -1:
        return c * math.log(hi / lo)
    q = p + 1
    return c * (hi ** q - lo ** q) / q


def _radial_inv_dist(comp: RadialPower, lo: float, hi: float, rho: float) -> float:
    """c * int_lo^hi r^alpha / |r^2 - rho^2| dr."""
    if hi <= lo or comp.c == 0:
        return 0.0
    if lo <= rho <= hi:
        log.warning("radial density on [%g, %g] passes through |gamma| = %g", lo, hi, rho)
        return math.inf
    alpha = comp.alpha
    if lo == 0 and alpha <= -1:
        log.warning("radial density r^%g is not integrable at the origin", alpha)
        return math.inf

    def f(r):
        return r ** alpha / np.abs((r - rho) * (r + rho))

    width = hi - lo
    left = (lo == 0 and alpha < 0) or (rho < lo and lo - rho < width)
    right = rho > hi and rho - hi < width
    res = integrate(f, lo, hi, singular_left=left, singular_right=right)
    if not res.converged:
        log.warning("quadrature on [%g, %g] hit the panel cap (rho=%g)", lo, hi, rho)
        return math.inf
    return comp.c * res.value


# ---------------------------------------------------------------------------
# per-annulus integrals

def _atoms_in(measure, partition, n, group):
    atoms = measure._atoms[group]
    if n is None:
        return atoms
    return [a for a in atoms if partition.index_of(a.z) == n]


def _integral(measure: Measure, partition: AnnulusPartition, n: Optional[int],
              atom_term, circle_term, radial_term) -> float:
    lo, hi = (0.0, math.inf) if n is None else partition.radial_range(n)
    parts = []
    for k, comp in enumerate(measure.components):
        if isinstance(comp, (Atom, AtomFamily)):
            atoms = _atoms_in(measure, partition, n, k)
            parts.append(float(pairwise_sum([atom_term(a) for a in atoms])))
        elif isinstance(comp, CircleUniform):
            inside = n is None or partition.index_of_radius(comp.r) == n
            parts.append(circle_term(comp) if inside and comp.w > 0 else 0.0)
        else:
            clo, chi = _clip(comp, lo, hi)
            parts.append(radial_term(comp, clo, chi))
    return float(pairwise_sum(parts))


def mass(measure: Measure, partition: AnnulusPartition, n: Optional[int]) -> float:
    """mu(Omega_n); ``n=None`` gives the total mass."""
    return _integral(
        measure, partition, n,
        lambda a: a.w,
        lambda c: c.w,
        lambda c, lo, hi: _power_integral(c.c, c.alpha, lo, hi))


def total_mass(measure: Measure) -> float:
    return _integral(measure, None, None, lambda a: a.w, lambda c: c.w,
                     lambda c, lo, hi: _power_integral(c.c, c.alpha, lo, hi))


def _atom_inv_mod(a):
    if a.w == 0:
        return 0.0
    d = abs(a.z) ** 2
    if d == 0:
        log.warning("atom at the origin: integral of 1/|z|^2 diverges")
        return math.inf
    return a.w / d


def int_inv_sq_modulus(measure: Measure, partition: AnnulusPartition,
                       n: Optional[int]) -> float:
    """tau_n^2 = int over Omega_n of d mu / |z|^2."""
    return _integral(
        measure, partition, n,
        _atom_inv_mod,
        lambda c: c.w / c.r ** 2,
        lambda c, lo, hi: _power_integral(c.c, c.alpha - 2, lo, hi))


def int_inv_sq_dist(measure: Measure, partition: AnnulusPartition,
                    n: Optional[int], gamma: complex) -> float:
    """int over Omega_n (or the whole plane if ``n`` is None) of d mu / |z - gamma|^2."""
    gamma = complex(gamma)
    rho = abs(gamma)

    def atom_term(a):
        if a.w == 0:
            return 0.0
        d = abs(a.z - gamma) ** 2
        return math.inf if d == 0 else a.w / d

    def circle_term(c):
        d = abs(c.r ** 2 - rho ** 2)
        if d == 0:
            log.warning("circle |z| = %g passes through gamma = %r", c.r, gamma)
            return math.inf
        return c.w / d

    return _integral(measure, partition, n, atom_term, circle_term,
                     lambda c, lo, hi: _radial_inv_dist(c, lo, hi, rho))


def discretize(measure: Measure, K: int) -> Measure:
    """Replace continuous components by atom clouds.

    Circles become K equally spaced atoms of mass w/K. Radial densities
    become K Gauss-Legendre radii times K uniform angles; the cloud is
    rescaled to carry the exact component mass.
    """
    if K < MIN_DISCRETIZATION:
        raise ValueError(f"discretization needs K >= {MIN_DISCRETIZATION}, got {K}")
    angles = np.exp(2j * np.pi * np.arange(K) / K)
    out = []
    for comp in measure.components:
        if isinstance(comp, Atom):
            out.append(comp)
        elif isinstance(comp, AtomFamily):
            out.extend(comp.expand())
        elif isinstance(comp, CircleUniform):
            out.extend(Atom(comp.r * u, comp.w / K) for u in angles)
        else:
            x, wq = gauss_legendre(K)
            h = (comp.b - comp.a) / 2
            r = comp.a + h * (x + 1)
            radial = comp.c * h * wq * r ** comp.alpha
            exact = _power_integral(comp.c, comp.alpha, comp.a, comp.b)
            got = float(pairwise_sum(radial))
            if math.isfinite(exact) and got > 0:
                radial = radial * (exact / got)
            for rk, mk in zip(r, radial):
                out.extend(Atom(rk * u, mk / K) for u in angles)
    return Measure(tuple(out))
