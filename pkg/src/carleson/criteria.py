"""Boundedness, compactness and Hilbert-Schmidt certificates.

For each annulus index n the local quantity is

    A_n = v_n * int_{Omega_n} d mu / |z - gamma_n|^2

and the global quantity is

    D_n = Vhat_n * sum_{m>n} tau_m^2 + P_n * sum_{m<=n} mu(Omega_m)

with Vhat_n = sum_{m<=n} v_m, tau_m^2 = int_{Omega_m} d mu / |z|^2 and
P_n = sum_{m>n} v_m / |gamma_m|^2. The measure is Carleson iff both
sequences are bounded and compact iff both tend to zero. Finite data
cannot decide limits, so verdicts are three-valued and every decision
records the window it looked at.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import measure as mm
from .space import Flag, SpacePair, admissibility_report, window_ratios
from .summation import pairwise_sum, prefix_sums, safe_product, suffix_sums

log = logging.getLogger(__name__)

INDEX_NORMALIZATION = (
    "global quantity uses the tail factor sum_{m>n} v_m/|gamma_m|^2 and the "
    "prefix weight sum_{m<=n} v_m")


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


class Trend(str, Enum):
    INFINITE = "infinite"
    ZERO = "zero"
    DECAY = "decay"
    GROWING = "growing"
    PERSIST = "persist"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class CheckOptions:
    window: Optional[int] = None
    decay_margin: float = 1e-3
    liminf_floor: float = 1e-9
    tail_monotone: bool = False


@dataclass(frozen=True)
class QuantitySequences:
    A: np.ndarray
    tau_sq: np.ndarray
    mass: np.ndarray
    Vhat: np.ndarray
    P: np.ndarray
    D: np.ndarray
    # window value plus a geometric bound on the part of P beyond N;
    # None unless the weights were judged admissible
    P_upper: Optional[np.ndarray] = None
    D_upper: Optional[np.ndarray] = None

    @property
    def N(self) -> int:
        return len(self.A)


@dataclass
class Certificate:
    kind: str
    verdict: Verdict
    sup_A: float
    sup_D: float
    witness_A: int
    witness_D: int
    C_star: float
    window: tuple
    trend_A: Trend
    trend_D: Trend
    last_A: float
    last_D: float
    support_exhausted: bool
    notes: list = field(default_factory=list)


@dataclass
class HSReport:
    hs_exact: float
    local_sum: float
    global_sum: float
    condition_value: float
    hs_finite: bool
    condition_finite: bool
    per_node: np.ndarray


@dataclass(frozen=True)
class CorollaryRegime:
    cor_exp_weights: bool
    cor_summable: bool


def quantity_sequences(space: SpacePair, measure: mm.Measure) -> QuantitySequences:
    measure.check_against(space)
    part = space.partition
    N = space.N
    v = space.v.entries
    g = space.gamma.entries
    idx = range(1, N + 1)
    A = safe_product(v, [mm.int_inv_sq_dist(measure, part, n, g[n - 1]) for n in idx])
    tau_sq = np.array([mm.int_inv_sq_modulus(measure, part, n) for n in idx])
    mass = np.array([mm.mass(measure, part, n) for n in idx])
    Vhat = prefix_sums(v)

    with np.errstate(divide="ignore"):
        t = v / space.gamma.moduli ** 2
    P = suffix_sums(t)
    tail_tau = suffix_sums(tau_sq)
    prefix_mass = prefix_sums(mass)
    D = safe_product(Vhat, tail_tau) + safe_product(P, prefix_mass)

    P_upper = D_upper = None
    if admissibility_report(space).flag is Flag.YES:
        ratios = window_ratios(t, space.window)
        q = float(np.max(ratios)) if ratios.size else math.nan
        if q < 1:
            P_upper = P + t[-1] * q / (1 - q)
            D_upper = safe_product(Vhat, tail_tau) + safe_product(P_upper, prefix_mass)
    return QuantitySequences(A, tau_sq, mass, Vhat, P, D, P_upper, D_upper)


def classify_trend(seq, opts: CheckOptions) -> Trend:
    """Classify the tail behaviour of a window of nonnegative values."""
    s = np.asarray(seq, dtype=float)
    if s.size == 0:
        return Trend.UNKNOWN
    if np.any(np.isinf(s)):
        return Trend.INFINITE
    if s[-1] == 0:
        return Trend.ZERO
    nz = s[s > 0]
    if nz.size >= 2:
        r = nz[1:] / nz[:-1]
        if np.max(r) < 1 - opts.decay_margin:
            return Trend.DECAY
        if np.min(r) > 1 + opts.decay_margin:
            return Trend.GROWING
    if np.min(s) >= opts.liminf_floor:
        return Trend.PERSIST
    return Trend.UNKNOWN


def _support_end(q: QuantitySequences) -> int:
    nz = np.nonzero((q.A > 0) | (q.tau_sq > 0) | (q.mass > 0))[0]
    return int(nz[-1]) + 1 if nz.size else 0


def analysis_window(space: SpacePair, measure: mm.Measure, q: QuantitySequences,
                    opts: CheckOptions) -> tuple[int, int]:
    """1-based inclusive index range whose values stand in for n -> infinity.

    An atom family is a finite sample of an infinite pattern, so its last
    occupied annulus is where the pattern is observed; otherwise the
    observation window is the tail of the truncation.
    """
    end = space.N
    if measure.has_family:
        end = max(_support_end(q), 2)
    w = opts.window or space.window or math.ceil(end / 4)
    w = max(2, min(int(w), end))
    return end - w + 1, end


def _sup(seq):
    s = np.asarray(seq, dtype=float)
    if s.size == 0:
        return 0.0, 0
    k = int(np.argmax(s))
    return float(s[k]), k + 1


def _hypothesis_notes(space: SpacePair) -> list:
    notes = []
    if space.N >= 2 and not space.gamma.sparse:
        notes.append("warning: sparseness hypothesis fails on the window "
                     f"(ratio {space.gamma.sparseness_ratio!r})")
    flag = admissibility_report(space).flag
    if flag is not Flag.YES:
        notes.append(f"warning: admissibility is '{flag.value}' on the window")
    for note in notes:
        log.warning(note)
    return notes


def _trends(space, measure, q, opts):
    lo, hi = analysis_window(space, measure, q, opts)
    D = q.D_upper if q.D_upper is not None else q.D
    d_hi = hi
    if q.D_upper is None and hi == space.N and hi - lo >= 2:
        # the truncated tail factor is identically zero at n = N
        d_hi = hi - 1
    tA = classify_trend(q.A[lo - 1:hi], opts)
    tD = classify_trend(D[lo - 1:d_hi], opts)
    return (lo, hi), tA, tD, float(q.A[hi - 1]), float(D[d_hi - 1])


def _certificate(kind, space, measure, q, opts):
    sup_A, wA = _sup(q.A)
    sup_D, wD = _sup(q.D)
    window, tA, tD, last_A, last_D = _trends(space, measure, q, opts)
    exhausted = bool(q.mass[-1] == 0 and q.A[-1] == 0 and q.tau_sq[-1] == 0)
    notes = _hypothesis_notes(space) + [f"index normalization: {INDEX_NORMALIZATION}"]
    return Certificate(kind, Verdict.INCONCLUSIVE, sup_A, sup_D, wA, wD,
                       max(sup_A, sup_D), window, tA, tD, last_A, last_D,
                       exhausted, notes)


def _carleson_verdict(cert: Certificate, opts: CheckOptions,
                      finite_rank: bool = False) -> Verdict:
    if math.isinf(cert.C_star) or Trend.INFINITE in (cert.trend_A, cert.trend_D):
        return Verdict.FAILS
    if finite_rank:
        return Verdict.HOLDS
    if Trend.GROWING in (cert.trend_A, cert.trend_D):
        return Verdict.FAILS
    vanishing = {Trend.ZERO, Trend.DECAY}
    if (cert.support_exhausted or opts.tail_monotone
            or (cert.trend_A in vanishing and cert.trend_D in vanishing)):
        return Verdict.HOLDS
    return Verdict.INCONCLUSIVE


def carleson_check(space: SpacePair, measure: mm.Measure,
                   opts: CheckOptions = CheckOptions(),
                   q: Optional[QuantitySequences] = None) -> Certificate:
    """Boundedness of the embedding: sup A_n and sup D_n finite."""
    q = q or quantity_sequences(space, measure)
    cert = _certificate("carleson", space, measure, q, opts)
    cert.verdict = _carleson_verdict(cert, opts, measure.is_finite_atomic)
    if measure.is_finite_atomic and not cert.support_exhausted:
        cert.notes.append("finitely many atoms: the embedding has finite rank")
    if cert.support_exhausted:
        cert.notes.append("measure support lies inside the truncation window")
    return cert


def compactness_check(space: SpacePair, measure: mm.Measure,
                      opts: CheckOptions = CheckOptions(),
                      q: Optional[QuantitySequences] = None) -> Certificate:
    """Compactness of the embedding: A_n -> 0 and D_n -> 0."""
    q = q or quantity_sequences(space, measure)
    cert = _certificate("compactness", space, measure, q, opts)
    bounded = _carleson_verdict(cert, opts, measure.is_finite_atomic)
    vanishing = {Trend.ZERO, Trend.DECAY}
    if bounded is Verdict.FAILS:
        cert.verdict = Verdict.FAILS
    elif measure.is_finite_atomic:
        cert.verdict = Verdict.HOLDS
        cert.notes.append("finitely many atoms: the embedding has finite rank")
    elif cert.trend_A in vanishing and cert.trend_D in vanishing:
        cert.verdict = Verdict.HOLDS
    elif Trend.PERSIST in (cert.trend_A, cert.trend_D):
        cert.verdict = Verdict.FAILS
    else:
        cert.verdict = Verdict.INCONCLUSIVE

    regime = corollary_regime(space)
    if regime.cor_exp_weights:
        cert.notes.append(
            "weights grow and v_n/|gamma_n|^2 decays geometrically: "
            f"A_n -> 0 alone decides compactness (local trend '{cert.trend_A.value}')")
    if regime.cor_summable:
        glob = global_local_sequence(space, measure)
        lo, hi = cert.window
        t = classify_trend(glob[lo - 1:hi], opts)
        cert.notes.append(
            "summable weights: v_n int d mu/|z-gamma_n|^2 over the whole plane "
            f"-> 0 alone decides compactness (trend '{t.value}')")
    return cert


def global_local_sequence(space: SpacePair, measure: mm.Measure) -> np.ndarray:
    """v_n * int_C d mu / |z - gamma_n|^2 for every n."""
    part = space.partition
    vals = [mm.int_inv_sq_dist(measure, part, None, g) for g in space.gamma.entries]
    return safe_product(space.v.entries, vals)


def hs_check(space: SpacePair, measure: mm.Measure,
             q: Optional[QuantitySequences] = None) -> HSReport:
    """Hilbert-Schmidt norm squared and the equivalent two-part condition."""
    q = q or quantity_sequences(space, measure)
    per_node = global_local_sequence(space, measure)
    hs_exact = float(pairwise_sum(per_node))
    local = float(pairwise_sum(q.A))
    v = space.v.entries
    with np.errstate(divide="ignore"):
        t = v / space.gamma.moduli ** 2
    before = np.concatenate([[0.0], prefix_sums(q.mass)[:-1]])
    glob = float(pairwise_sum(safe_product(v, suffix_sums(q.tau_sq)))
                 + pairwise_sum(safe_product(t, before)))
    cond = local + glob
    return HSReport(hs_exact, local, glob, cond, math.isfinite(hs_exact),
                    math.isfinite(cond), per_node)


def corollary_regime(space: SpacePair, margin: float = 1e-6) -> CorollaryRegime:
    v = space.v.entries
    if space.N < 2:
        return CorollaryRegime(False, False)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = v / space.gamma.moduli ** 2
        growth = v[1:] / v[:-1]
        decay = t[1:] / t[:-1]
    exp_weights = bool(np.min(growth) > 1 and np.all(np.isfinite(decay))
                       and np.max(decay) < 1)
    ratios = window_ratios(v, space.window)
    summable = bool(ratios.size and np.max(ratios) < 1 - margin)
    return CorollaryRegime(exp_weights, summable)
