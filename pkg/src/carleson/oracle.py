"""Brute-force embedding matrix for atomic measures.

For atoms (z_j, w_j) the embedding acts on normalized coordinates
b_n = a_n sqrt(v_n) through the matrix

    E[j, n] = sqrt(w_j) sqrt(v_n) / (z_j - gamma_n)

so that ||E b||^2 = int |f|^2 d mu. Its spectral data are the ground
truth the criteria are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import criteria as cr
from . import measure as mm
from .errors import InvalidInstanceError
from .space import SpacePair, evaluate, test_function
from .summation import pairwise_sum

MAX_ITER = 10_000
RESIDUAL_TOL = 1e-10
LOWER_BOUND_TOL = 1e-9


@dataclass(frozen=True)
class EmbeddingMatrix:
    matrix: np.ndarray
    z: np.ndarray
    w: np.ndarray

    @property
    def shape(self):
        return self.matrix.shape


@dataclass
class PowerResult:
    value: float
    vector: np.ndarray
    iterations: int
    residual: float
    converged: bool


@dataclass
class SpectralSummary:
    op_norm: float
    top_k: list
    frobenius: float
    tail_norms: dict
    iterations: int
    residual: float
    converged: bool


@dataclass
class ConsistencyRecord:
    op_norm_sq: float
    max_q_energy: float
    lower_bound_ok: bool
    q_dominates_A: bool
    ratio_to_C_star: Optional[float]
    hs_exact: float
    frobenius_sq: float
    hs_identity_ok: bool
    compact_verdict: str
    tail_trend_ok: Optional[bool]
    findings: list = field(default_factory=list)
    summary: Optional[SpectralSummary] = None

    @property
    def consistent(self) -> bool:
        return not self.findings


def build_embedding(space: SpacePair, measure: mm.Measure) -> EmbeddingMatrix:
    if not measure.is_atomic:
        raise InvalidInstanceError("the embedding matrix needs an atoms-only measure; "
                                   "discretize it first")
    measure.check_against(space)
    z, w = measure.atom_arrays
    if z.size == 0:
        return EmbeddingMatrix(np.zeros((0, space.N), dtype=complex), z, w)
    diff = z[:, None] - space.gamma.entries[None, :]
    E = np.sqrt(w)[:, None] * np.sqrt(space.v.entries)[None, :] / diff
    return EmbeddingMatrix(E, z, w)


def power_iteration(G: np.ndarray, tol: float = RESIDUAL_TOL,
                    max_iter: int = MAX_ITER, square_every: int = 50) -> PowerResult:
    """Top eigenpair of a Hermitian positive semidefinite matrix.

    Starts from the all-ones vector; stops when ||G x - lam x|| <= tol * lam.
    Every ``square_every`` steps without convergence the iterate is also
    multiplied by a repeatedly squared copy of G, which turns a spectral
    gap ratio r into r**(2**k) for clustered spectra.
    """
    n = G.shape[0]
    x = np.ones(n, dtype=G.dtype) / math.sqrt(n)
    scale = np.linalg.norm(G)
    S = G / scale if scale > 0 else G
    lam, res = 0.0, math.inf
    for it in range(1, max_iter + 1):
        y = G @ x
        lam = float(np.real(np.vdot(x, y)))
        res = float(np.linalg.norm(y - lam * x))
        if lam <= 0 or res <= tol * lam:
            return PowerResult(max(lam, 0.0), x, it, res / lam if lam > 0 else 0.0, True)
        x = y / np.linalg.norm(y)
        if square_every and it % square_every == 0:
            S = S @ S
            S /= np.linalg.norm(S)
            x = S @ x
            x /= np.linalg.norm(x)
    return PowerResult(lam, x, max_iter, res / lam, False)


def _gram(E):
    M, N = E.shape
    return E @ E.conj().T if M <= N else E.conj().T @ E


def top_singular_values(E: np.ndarray, k: int = 1, tol: float = RESIDUAL_TOL,
                        max_iter: int = MAX_ITER):
    """Largest ``k`` singular values by power iteration with deflation."""
    if E.size == 0:
        return [0.0] * k, []
    G = _gram(E)
    out, runs = [], []
    for _ in range(min(k, G.shape[0])):
        r = power_iteration(G, tol, max_iter)
        runs.append(r)
        out.append(math.sqrt(r.value))
        G = G - r.value * np.outer(r.vector, r.vector.conj())
    out += [0.0] * (k - len(out))
    return out, runs


def frobenius(E: np.ndarray) -> float:
    return math.sqrt(float(pairwise_sum(np.abs(E.ravel()) ** 2)))


def spectral_summary(E: EmbeddingMatrix, k: int = 1,
                     tail_grid: Optional[Sequence[int]] = None,
                     tol: float = RESIDUAL_TOL,
                     max_iter: int = MAX_ITER) -> SpectralSummary:
    """Operator norm, top-k singular values, Frobenius norm and tail norms.

    ``tail_grid`` lists cut points N0; each tail norm is the operator norm of
    E restricted to the columns n > N0 (1-based).
    """
    A = E.matrix
    N = A.shape[1]
    if tail_grid is None:
        tail_grid = range(N)
    top, runs = top_singular_values(A, k, tol, max_iter)
    tails = {}
    all_runs = list(runs)
    for N0 in tail_grid:
        sub = A[:, N0:]
        if sub.size == 0:
            tails[int(N0)] = 0.0
            continue
        r = power_iteration(_gram(sub), tol, max_iter)
        all_runs.append(r)
        tails[int(N0)] = math.sqrt(r.value)
    iters = sum(r.iterations for r in all_runs)
    residual = max((r.residual for r in all_runs), default=0.0)
    converged = all(r.converged for r in all_runs)
    return SpectralSummary(top[0], top, frobenius(A), tails, iters, residual, converged)


def q_energies(space: SpacePair, measure: mm.Measure) -> np.ndarray:
    """int |q_n|^2 d mu for each n, by evaluating q_n at the atoms."""
    z, w = measure.atom_arrays
    out = []
    for n in range(1, space.N + 1):
        qn = test_function(space, "q", n)
        vals = np.array([abs(evaluate(space, qn, zj)) ** 2 for zj in z])
        out.append(float(pairwise_sum(w * vals)))
    return np.array(out)


def test_vector_energies(space: SpacePair, E: EmbeddingMatrix) -> dict:
    """||E b||^2 for every q_n, g_n, h_n coefficient vector (normalized)."""
    out = {}
    for kind in "qgh":
        for n in range(1, space.N + 1):
            if (kind == "g" and n == space.N) or (kind == "h" and n == 1):
                continue
            b = test_function(space, kind, n).normalized()
            out[(kind, n)] = float(np.linalg.norm(E.matrix @ b) ** 2)
    return out


test_vector_energies.__test__ = False


def validate(space: SpacePair, measure: mm.Measure, carleson: cr.Certificate,
             compact: cr.Certificate, hs: Optional[cr.HSReport] = None,
             K: int = 64, tail_grid: Optional[Sequence[int]] = None,
             compact_tail_ratio: float = 1e-3, noncompact_tail_ratio: float = 0.5,
             tol: float = LOWER_BOUND_TOL,
             power_tol: float = RESIDUAL_TOL) -> ConsistencyRecord:
    """Cross-check certificates against the brute-force operator."""
    if math.isinf(carleson.C_star):
        # an infinite certificate quantity means an unbounded operator; no
        # finite matrix represents it
        summ = SpectralSummary(math.inf, [math.inf], math.inf, {}, 0, 0.0, True)
        hs_val = hs.hs_exact if hs is not None else math.inf
        return ConsistencyRecord(math.inf, math.inf, True, True, None, hs_val, math.inf,
                                 True, compact.verdict.value, None,
                                 [], summ)
    atomic = measure if measure.is_atomic else mm.discretize(measure, K)
    E = build_embedding(space, atomic)
    summ = spectral_summary(E, tail_grid=tail_grid, tol=power_tol)
    op_sq = summ.op_norm ** 2
    findings = []

    energies = q_energies(space, atomic)
    max_q = float(np.max(energies)) if energies.size else 0.0
    lower_ok = op_sq >= max_q - tol
    if not lower_ok:
        findings.append(f"op_norm^2 {op_sq!r} below max q-energy {max_q!r}")
    q_ok = True
    if measure.is_atomic:
        q = cr.quantity_sequences(space, measure)
        q_ok = bool(np.all(energies >= q.A * (1 - 1e-12)))
        if not q_ok:
            findings.append("some A_n exceeds the q_n energy")

    ratio = None
    if carleson.C_star > 0 and math.isfinite(carleson.C_star):
        ratio = op_sq / carleson.C_star
    if carleson.verdict is cr.Verdict.HOLDS and not (ratio is None and op_sq == 0):
        if ratio is None or not (0 < ratio < math.inf):
            findings.append(f"bounded verdict but op_norm^2/C_* = {ratio!r}")

    fro_sq = summ.frobenius ** 2
    if hs is None:
        hs = cr.hs_check(space, atomic)
    hs_ok = True
    if measure.is_atomic:
        hs_ok = math.isclose(hs.hs_exact, fro_sq, rel_tol=1e-10, abs_tol=1e-300)
        if not hs_ok:
            findings.append(f"HS identity mismatch: {hs.hs_exact!r} vs {fro_sq!r}")

    trend_ok = None
    tails = [summ.tail_norms[k] for k in sorted(summ.tail_norms)]
    if tails and summ.op_norm > 0:
        if compact.verdict is cr.Verdict.HOLDS and not measure.is_finite_atomic:
            trend_ok = tails[-1] <= compact_tail_ratio * summ.op_norm
        elif compact.verdict is cr.Verdict.FAILS:
            lo, hi = compact.window
            watched = [summ.tail_norms[k] for k in sorted(summ.tail_norms) if k < hi]
            trend_ok = min(watched, default=0.0) >= noncompact_tail_ratio * summ.op_norm
        if trend_ok is False:
            findings.append(f"tail norms disagree with compactness verdict "
                            f"'{compact.verdict.value}'")
    if not summ.converged:
        findings.append("power iteration hit the iteration cap")
    return ConsistencyRecord(op_sq, max_q, lower_ok, q_ok, ratio, hs.hs_exact, fro_sq,
                             hs_ok, compact.verdict.value, trend_ok, findings, summ)
