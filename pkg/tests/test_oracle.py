import math

import numpy as np
import pytest

from carleson import criteria as cr
from carleson import oracle as orc
from carleson.errors import InvalidInstanceError, PointOnGammaError
from carleson.measure import Atom, CircleUniform, Measure, discretize
from carleson.space import kernel_eval, kernel_norm_sq, test_function

from conftest import family, geometric_space, random_atomic, random_space


def op_sq(space, measure, **kw):
    return orc.spectral_summary(orc.build_embedding(space, measure), tail_grid=(), **kw).op_norm ** 2


def test_rank_one(s1):
    z0, w = 3 + 5j, 0.7
    got = op_sq(s1, Measure((Atom(z0, w),)))
    assert got == pytest.approx(w * kernel_norm_sq(s1, z0), rel=1e-10)


def test_empty_matrix(s1):
    E = orc.build_embedding(s1, Measure())
    assert E.shape == (0, 40)
    s = orc.spectral_summary(E)
    assert s.op_norm == 0 and s.frobenius == 0 and s.converged


def test_two_atoms_closed_form():
    sp = geometric_space(20)
    got = op_sq(sp, Measure((Atom(3j, 1), Atom(-3j, 1))))
    a = kernel_norm_sq(sp, 3j)
    b = kernel_eval(sp, -3j, 3j)
    assert got == pytest.approx(a + abs(b), rel=1e-10)


def test_entries_and_row_evaluation(s1):
    m = Measure((Atom(3j, 2.0), Atom(-7 + 1j, 0.5)))
    E = orc.build_embedding(s1, m)
    f = test_function(s1, "g", 4)
    rows = E.matrix @ f.normalized()
    from carleson.space import evaluate
    for j, a in enumerate(m.atoms):
        assert rows[j] == pytest.approx(math.sqrt(a.w) * evaluate(s1, f, a.z), rel=1e-12)


def test_rejects_non_atomic_and_on_gamma(s1):
    with pytest.raises(InvalidInstanceError):
        orc.build_embedding(s1, Measure((CircleUniform(3, 1),)))
    with pytest.raises(PointOnGammaError):
        orc.build_embedding(s1, Measure((Atom(4, 1),)))


def test_top_k_matches_numpy_svd(rng):
    for _ in range(5):
        sp = random_space(rng, 25)
        E = orc.build_embedding(sp, random_atomic(rng, sp, 80)).matrix
        top, runs = orc.top_singular_values(E, 3)
        ref = np.linalg.svd(E, compute_uv=False)[:3]
        np.testing.assert_allclose(top[0], ref[0], rtol=1e-10)
        # deflated values inherit the residual of earlier steps
        np.testing.assert_allclose(top, ref, rtol=1e-6)


def test_power_iteration_flags_cap():
    G = np.diag([1.0, 0.999999, 0.5])
    r = orc.power_iteration(G, tol=1e-14, max_iter=5, square_every=0)
    assert not r.converged and r.iterations == 5


def test_summary_invariants(rng):
    sp = random_space(rng, 20)
    s = orc.spectral_summary(orc.build_embedding(sp, random_atomic(rng, sp, 60)))
    assert s.op_norm <= s.frobenius * (1 + 1e-12)
    tails = [s.tail_norms[k] for k in range(20)]
    assert all(t >= 0 for t in tails)
    assert all(b <= a * (1 + 1e-9) for a, b in zip(tails, tails[1:]))
    assert tails[0] == pytest.approx(s.op_norm, rel=1e-10)


def test_frobenius_matches_hs(rng):
    for _ in range(5):
        sp = random_space(rng, 20)
        m = random_atomic(rng, sp, 50)
        fro = orc.frobenius(orc.build_embedding(sp, m).matrix)
        assert fro ** 2 == pytest.approx(cr.hs_check(sp, m).hs_exact, rel=1e-10)


def test_permutation_invariance(rng):
    sp = random_space(rng, 20)
    m = random_atomic(rng, sp, 60)
    E = orc.build_embedding(sp, m).matrix
    base = orc.top_singular_values(E)[0][0]
    for _ in range(3):
        P = E[rng.permutation(E.shape[0])][:, rng.permutation(E.shape[1])]
        assert orc.top_singular_values(P)[0][0] == pytest.approx(base, rel=1e-10)


@pytest.mark.parametrize("t", [1e-3, 0.5, 7.0, 1e4])
def test_scaling(rng, t):
    sp = random_space(rng, 20)
    m = random_atomic(rng, sp, 40)
    assert op_sq(sp, m.scaled(t)) == pytest.approx(t * op_sq(sp, m), rel=1e-10)


def test_deleting_atoms_never_increases(rng):
    sp = random_space(rng, 15)
    atoms = list(random_atomic(rng, sp, 30).atoms)
    prev = op_sq(sp, Measure(tuple(atoms)))
    while atoms:
        atoms.pop(rng.integers(len(atoms)))
        cur = op_sq(sp, Measure(tuple(atoms)))
        assert cur <= prev * (1 + 1e-10)
        prev = cur


def test_test_vectors_below_operator_norm(rng):
    for _ in range(3):
        sp = random_space(rng, 16)
        E = orc.build_embedding(sp, random_atomic(rng, sp, 50))
        op2 = orc.spectral_summary(E, tail_grid=()).op_norm ** 2
        energies = orc.test_vector_energies(sp, E)
        assert len(energies) == 3 * 16 - 2
        assert max(energies.values()) <= op2 * (1 + 1e-10)


def test_q_energy_dominates_local_quantity(rng):
    sp = random_space(rng, 16)
    m = random_atomic(rng, sp, 50)
    en = orc.q_energies(sp, m)
    assert np.all(en >= cr.quantity_sequences(sp, m).A * (1 - 1e-12))


def test_noncompact_tails_stay_large():
    sp = geometric_space(20)
    s = orc.spectral_summary(orc.build_embedding(sp, family("1", hi=20)))
    assert min(s.tail_norms[k] for k in range(20)) >= 0.9
    assert s.converged


def test_compact_tail_bound(s64, fixture_c):
    E = orc.build_embedding(s64, fixture_c)
    s = orc.spectral_summary(E, tail_grid=[15])
    # a block's operator norm is at most its Frobenius norm
    bound = 0.0
    for a in fixture_c.atoms:
        for n in range(16, 65):
            bound += a.w / abs(a.z - 2.0 ** n) ** 2
    assert s.tail_norms[15] ** 2 <= bound * (1 + 1e-12)


# -- validate ---------------------------------------------------------------

def _record(space, measure, **kw):
    c = cr.carleson_check(space, measure)
    k = cr.compactness_check(space, measure)
    return orc.validate(space, measure, c, k, **kw)


def test_validate_single_atom(s1):
    rec = _record(s1, Measure((Atom(3j, 1),)))
    assert rec.consistent and rec.lower_bound_ok and rec.hs_identity_ok
    assert 0 < rec.ratio_to_C_star < math.inf


def test_validate_fixtures(s64, fixture_c, fixture_nc):
    rc = _record(s64, fixture_c)
    assert rc.consistent and rc.tail_trend_ok
    rn = _record(s64, fixture_nc)
    assert rn.consistent and rn.tail_trend_ok and rn.compact_verdict == "fails"


def test_validate_singular_measure_skips_matrix(s64):
    rec = _record(s64, Measure((CircleUniform(4, 1),)))
    assert rec.op_norm_sq == math.inf and rec.consistent


def test_validate_continuous_measure(s64):
    m = Measure((CircleUniform(3, 1),))
    rec = _record(s64, m, K=64)
    assert rec.lower_bound_ok and rec.consistent
    # the discretized operator approximates the continuous one
    assert rec.frobenius_sq == pytest.approx(cr.hs_check(s64, m).hs_exact, rel=1e-6)


def test_validate_flags_inconsistent_tails(s1, fixture_nc):
    # support fills the whole window, so the last tail still sees a unit atom
    c = cr.carleson_check(s1, fixture_nc)
    k = cr.compactness_check(s1, fixture_nc)
    k.verdict = cr.Verdict.HOLDS          # wrong certificate on purpose
    rec = orc.validate(s1, fixture_nc, c, k)
    assert not rec.consistent and rec.tail_trend_ok is False
