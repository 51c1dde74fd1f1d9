"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion k: PASS|FAIL`` line to the terminal
(also under output capture) so the run doubles as a checklist.
"""

import math
from contextlib import contextmanager

import numpy as np
import pytest

from carleson import cli
from carleson import criteria as cr
from carleson import instance as ins
from carleson import measure as mm
from carleson import oracle as orc
from carleson.measure import Atom, CircleUniform, Measure, RadialPower
from carleson.space import SpacePair, kernel_norm_sq, test_function

from conftest import FIXTURES, family, geometric_space, random_atomic, random_space

CORPUS = sorted(FIXTURES.glob("*.inst"))

# op_norm^2 / C_* over random bounded fixtures. Observed over twenty seeds:
# min in [1.00, 1.02], max in [1.9, 4.3]. The fixed interval leaves slack
# on both sides.
RATIO_INTERVAL = (0.5, 6.0)


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def run(k, title):
        ok = False
        try:
            yield
            ok = True
        finally:
            with capsys.disabled():
                print(f"\ncriterion {k:2d}: {'PASS' if ok else 'FAIL'}  {title}")
    return run


def op_sq(space, measure):
    E = orc.build_embedding(space, measure)
    s = orc.spectral_summary(E, tail_grid=())
    assert s.converged
    return s.op_norm ** 2


def test_c01_test_function_normalization(criterion):
    with criterion(1, "unit norms of q_n, g_n, h_n on S1"):
        sp = geometric_space(40)
        worst = 0.0
        for n in range(1, 41):
            kinds = ["q"] + (["g"] if n < 40 else []) + (["h"] if n > 1 else [])
            for kind in kinds:
                norm = math.sqrt(test_function(sp, kind, n).norm_sq)
                worst = max(worst, abs(norm - 1))
        assert worst <= 1e-12


def test_c02_hs_identity(criterion):
    with criterion(2, "hs_exact equals Frobenius^2 on 25 random atomic fixtures"):
        rng = np.random.default_rng(2)
        for _ in range(25):
            sp = random_space(rng, int(rng.integers(5, 41)))
            m = random_atomic(rng, sp, int(rng.integers(1, 200)))
            fro_sq = orc.frobenius(orc.build_embedding(sp, m).matrix) ** 2
            assert cr.hs_check(sp, m).hs_exact == pytest.approx(fro_sq, rel=1e-10)


def test_c03_rank_one(criterion):
    with criterion(3, "single-atom operator norm equals w * ||k_z||^2"):
        rng = np.random.default_rng(3)
        for _ in range(20):
            sp = random_space(rng, int(rng.integers(2, 41)))
            z = random_atomic(rng, sp, 1).atoms[0].z
            w = float(rng.uniform(1e-3, 10))
            assert op_sq(sp, Measure((Atom(z, w),))) == pytest.approx(
                w * kernel_norm_sq(sp, z), rel=1e-10)


def test_c04_circle_average(criterion):
    with criterion(4, "circle r=3 against node 4 integrates to 1/7"):
        sp = geometric_space(6, ratio=4.0)
        circle = Measure((CircleUniform(3.0, 1.0),))
        got = mm.int_inv_sq_dist(circle, sp.partition, None, 4.0)
        assert abs(got - 1 / 7) <= 1e-8
        # brute force: trapezoid rule on the angle, spectrally accurate here
        theta = 2 * np.pi * np.arange(4096) / 4096
        brute = float(np.mean(1 / np.abs(3 * np.exp(1j * theta) - 4) ** 2))
        assert abs(brute - 1 / 7) <= 1e-8
        assert abs(got - brute) <= 1e-8


def _necessity_fixtures():
    out = []
    for path in CORPUS:
        inst = ins.load(path)
        out.append((path.stem, inst.space, inst.measure, inst.options.discretize))
    s64 = geometric_space(64)
    out += [("C", s64, family("4^(-n)"), 64), ("NC", s64, family("1"), 64),
            ("radial", s64, Measure((RadialPower(5, 7, 0.5, 2),)), 64)]
    rng = np.random.default_rng(5)
    for k in range(10):
        sp = random_space(rng, 30)
        out.append((f"random{k}", sp, random_atomic(rng, sp, 150), 64))
    return out


def test_c05_necessity_lower_bound(criterion):
    with criterion(5, "op_norm^2 >= max q-energy and q-energy >= A_n"):
        checked = 0
        for name, sp, m, K in _necessity_fixtures():
            carl = cr.carleson_check(sp, m)
            if math.isinf(carl.C_star):
                continue       # unbounded: op_norm is infinite, bound is vacuous
            atomic = m if m.is_atomic else mm.discretize(m, K)
            energies = orc.q_energies(sp, atomic)
            assert op_sq(sp, atomic) >= energies.max() - 1e-9, name
            A = cr.quantity_sequences(sp, atomic).A
            assert np.all(energies >= A - 1e-12 * np.maximum(A, 1.0)), name
            checked += 1
        assert checked >= 15


def test_c06_compact_fixture(criterion):
    with criterion(6, "Fixture C compact, tails strictly decreasing, tail(30) < 1e-3 op"):
        sp, m = geometric_space(64), family("4^(-n)")
        assert cr.compactness_check(sp, m).verdict is cr.Verdict.HOLDS
        s = orc.spectral_summary(orc.build_embedding(sp, m))
        assert s.converged
        tails = [s.tail_norms[k] for k in range(64)]
        assert all(b < a for a, b in zip(tails, tails[1:]))
        assert s.tail_norms[30] < 1e-3 * s.op_norm


def test_c07_noncompact_fixture(criterion):
    with criterion(7, "Fixture NC bounded, not compact, tails >= 0.9 at N=20"):
        sp, m = geometric_space(64), family("1")
        assert cr.carleson_check(sp, m).verdict is cr.Verdict.HOLDS
        comp = cr.compactness_check(sp, m)
        assert comp.verdict is cr.Verdict.FAILS
        lo, hi = comp.window
        A = cr.quantity_sequences(sp, m).A
        assert np.all(np.abs(A[lo - 1:hi] - 1.0) <= 1e-12)
        sp20 = geometric_space(20)
        s = orc.spectral_summary(orc.build_embedding(sp20, family("1", hi=20)))
        assert s.converged
        assert min(s.tail_norms[k] for k in range(20)) >= 0.9


def _ratios(seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(50):
        N = int(rng.integers(10, 41))
        sp = random_space(rng, N, 1.5, 3.0)
        assert 1.5 <= sp.gamma.sparseness_ratio <= 3.0
        # at least four atoms per node so every annulus is sampled
        m = random_atomic(rng, sp, int(rng.integers(4 * N, 201)))
        cert = cr.carleson_check(sp, m)
        assert cert.verdict is cr.Verdict.HOLDS
        out.append(op_sq(sp, m) / cert.C_star)
    return np.array(out)


def test_c08_equivalence_ratio(criterion):
    with criterion(8, f"op_norm^2 / C_* inside {RATIO_INTERVAL} for two seeds of 50"):
        a, b = _ratios(81), _ratios(82)
        for r in (a, b):
            assert np.all(np.isfinite(r)) and np.all(r > 0)
            assert RATIO_INTERVAL[0] <= r.min() and r.max() <= RATIO_INTERVAL[1]
        assert max(a.min(), b.min()) <= 2 * min(a.min(), b.min())
        assert max(a.max(), b.max()) <= 2 * min(a.max(), b.max())


def test_c09_invariance(criterion):
    with criterion(9, "scaling, monotonicity and permutation invariance"):
        rng = np.random.default_rng(9)
        sp = random_space(rng, 30)
        base = random_atomic(rng, sp, 120)
        extra = random_atomic(rng, sp, 40)
        q0, op0 = cr.quantity_sequences(sp, base), op_sq(sp, base)
        h0 = cr.hs_check(sp, base).hs_exact
        v0 = (cr.carleson_check(sp, base).verdict, cr.compactness_check(sp, base).verdict)
        for t in (1e-4, 0.3, 5.0, 2e3):
            mt = base.scaled(t)
            qt = cr.quantity_sequences(sp, mt)
            for name in ("A", "tau_sq", "mass", "D"):
                np.testing.assert_allclose(getattr(qt, name), t * getattr(q0, name), rtol=1e-10)
            assert op_sq(sp, mt) == pytest.approx(t * op0, rel=1e-10)
            assert cr.hs_check(sp, mt).hs_exact == pytest.approx(t * h0, rel=1e-10)
            assert (cr.carleson_check(sp, mt).verdict,
                    cr.compactness_check(sp, mt).verdict) == v0
        both = base + extra
        qb = cr.quantity_sequences(sp, both)
        assert np.all(qb.A >= q0.A) and np.all(qb.D >= q0.D)
        assert op_sq(sp, both) >= op0 * (1 - 1e-10)
        E = orc.build_embedding(sp, base).matrix
        for _ in range(5):
            P = E[rng.permutation(E.shape[0])][:, rng.permutation(E.shape[1])]
            assert orc.top_singular_values(P)[0][0] ** 2 == pytest.approx(op0, rel=1e-10)


BAD_INPUTS = [
    ("[sequence]\ngamma = 2^\n[weights]\nv = 1\n", 1, ":2:11:"),
    ("[sequence]\ngamma = 2^n\n[weights]\nv = 1\n[measure]\nblob r=1\n", 1, ":6:1:"),
    ("[sequence]\ngamma = 2^n\n[weights]\nv = 1\n[options]\ntruncate = x\n", 1, ":6:12:"),
    ("[sequence]\ngamma = 2^n\n", 1, ":2:1:"),
    ("[sequence]\ngamma = 2^n\n[weights]\nv = 1\n[measure]\natom z=4 w=1\n", 2, "line 6"),
    ("[sequence]\ngamma = 1\n[weights]\nv = 1\n", 2, "line 2"),
    ("[sequence]\ngamma = 2^n\n[weights]\nv = 0\n", 2, "line 4"),
    ("[sequence]\ngamma = 2^n\n[weights]\nv = 1\n[measure]\ncircle r=1/0 w=1\n", 2, ":6:"),
]


def test_c10_parser_contract(criterion, capsys, tmp_path):
    with criterion(10, "round trip, located errors with exit 1/2, byte-identical reports"):
        for path in CORPUS:
            src = ins.parse(path.read_text())
            assert ins.parse(ins.to_text(src)) == src
        for k, (text, code, loc) in enumerate(BAD_INPUTS):
            p = tmp_path / f"bad{k}.inst"
            p.write_text(text)
            with capsys.disabled():
                pass
            got = cli.main(["check", str(p)])
            _, err = capsys.readouterr()
            assert got == code, text
            assert loc in err, err
        for path in CORPUS:
            outs = []
            for _ in range(2):
                assert cli.main(["report", str(path)]) == 0
                outs.append(capsys.readouterr()[0].encode())
            assert outs[0] == outs[1]
