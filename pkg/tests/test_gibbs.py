"""Critical exponents, exact cylinder masses, RN cocycle, shadow audits."""

import math
import random

import numpy as np
import pytest

from gibbswalk.gibbs import (
    GibbsStream,
    UnsupportedRankError,
    critical_exponent,
    normalize,
    poincare_series,
    rn_holder_audit,
    rn_holder_sweep,
    shadow_integral_audit,
    shadow_lemma_audit,
    shell_slope,
    shell_sums_log,
)
from gibbswalk.potentials import Potential, flip_potential, sym_potential
from gibbswalk.stems import StemTable
from gibbswalk.words import (
    Alphabet,
    Cylinder,
    RandomReducedWord,
    inverse_letter,
    ray_word,
    translate_cylinder,
)

AB = Alphabet(2)


def rand_word(rng, n):
    w = []
    for _ in range(n):
        choices = [s for s in AB.letters if not w or s != inverse_letter(w[-1])]
        w.append(rng.choice(choices))
    return tuple(w)


class TestCriticalExponent:
    def test_zero_potential(self):
        assert critical_exponent(Potential.zero(AB)) == pytest.approx(math.log(3), abs=1e-12)

    def test_shell_count_oracle(self):
        # direct enumeration of shell sums for the zero potential
        logs = shell_sums_log(Potential.zero(AB), 8)
        for n in range(1, 9):
            assert logs[n - 1] == pytest.approx(math.log(4 * 3 ** (n - 1)), abs=1e-10)

    def test_constant_shift(self):
        lam0 = critical_exponent(Potential.zero(AB))
        assert critical_exponent(Potential.constant(AB, 0.7)) == pytest.approx(lam0 - 0.7, abs=1e-12)

    def test_slope_crosscheck(self):
        for seed in (1, 2, 3):
            rng = np.random.default_rng(seed)
            P = Potential(AB, 1, {(s,): float(v) for s, v in zip(AB.letters, rng.uniform(-0.6, 1.0, 4))})
            assert abs(shell_slope(P, 20, 40) - critical_exponent(P)) < 1e-6

    def test_rank_one_unsupported(self):
        with pytest.raises(UnsupportedRankError):
            critical_exponent(Potential.zero(Alphabet(1)))

    def test_flip_equality_and_sym_defect(self, random_potential):
        P = random_potential
        lam = critical_exponent(P)
        assert abs(critical_exponent(flip_potential(P)) - lam) <= 1e-10
        assert critical_exponent(sym_potential(P)) - lam <= 1e-10

    def test_patterson_knob(self):
        P = Potential.zero(AB)
        lam = critical_exponent(P)
        base = poincare_series(P, lam + 0.05, 30)
        corrected = poincare_series(P, lam + 0.05, 30, patterson_a=1.0)
        assert corrected > base  # the polynomial factor only enlarges terms


class TestNormalize:
    def test_uniform(self):
        Pn = normalize(Potential.zero(AB))
        assert all(v == pytest.approx(math.log(3), abs=1e-12) for v in Pn.table.values())

    def test_idempotent(self, random_potential):
        Pn = normalize(random_potential)
        assert abs(critical_exponent(Pn)) <= 1e-10
        Pnn = normalize(Pn)
        assert all(abs(Pn.table[w] - Pnn.table[w]) <= 1e-10 for w in Pn.table)

    def test_masses_invariant(self, random_potential):
        S1 = GibbsStream(random_potential)
        S2 = GibbsStream(random_potential.shifted(0.37))
        for n in range(1, 6):
            assert np.abs(S1.mass_array(n) - S2.mass_array(n)).max() <= 1e-12


class TestCylinderMasses:
    def test_uniform_closed_form(self, uniform_stream):
        for n in range(1, 9):
            arr = uniform_stream.mass_array(n)
            expect = 1.0 / (4 * 3 ** (n - 1))
            assert np.abs(arr - expect).max() <= 1e-12

    def test_additivity(self, random_stream, stream_m2):
        for S in (random_stream, stream_m2):
            for n in range(1, 7):
                arr = S.mass_array(n)
                kids = S.mass_array(n + 1).reshape(len(arr), -1).sum(axis=1)
                assert np.abs(arr - kids).max() <= 1e-12

    def test_total_mass_one(self, uniform_stream, random_stream, stream_m2):
        for S in (uniform_stream, random_stream, stream_m2):
            assert S.mass_array(1).sum() == pytest.approx(1.0, abs=1e-12)

    def test_poincare_oracle(self, random_stream, stream_m2):
        # shell-conditional truncated construction vs the Markov closed form
        for S, tol in ((random_stream, 2e-5), (stream_m2, 2e-4)):
            deep = 12
            wts = np.exp(-S.dphi_array(deep))
            tab = StemTable(AB, deep)
            total = wts.sum()
            rng = random.Random(4)
            for _ in range(20):
                w = rand_word(rng, rng.randrange(1, 6))
                lo, hi = tab.prefix_range(w)
                oracle = wts[lo:hi].sum() / total
                assert abs(oracle - S.cylinder_mass((), Cylinder(w))) <= tol

    def test_mass_from_other_point(self, uniform_stream):
        # mu_a of the full boundary: 3 * 1/4 + (1/3) * 3/4 = 1
        assert uniform_stream.total_mass_from((0,)) == pytest.approx(1.0, abs=1e-12)


class TestRadonNikodym:
    def test_uniform_values(self, uniform_stream):
        S = uniform_stream
        assert S.rn_derivative((), (0,), ray_word(AB, (0,))) == pytest.approx(3.0, abs=1e-12)
        assert S.rn_derivative((), (0,), ray_word(AB, (2,))) == pytest.approx(1.0 / 3, abs=1e-12)

    def test_integral_consistency(self, uniform_stream):
        assert 3 * 0.25 + (1 / 3) * 0.75 == pytest.approx(1.0)
        assert uniform_stream.total_mass_from((0,)) == pytest.approx(1.0, abs=1e-10)

    def test_chain_rule(self, random_stream):
        rng = random.Random(5)
        for _ in range(300):
            xi = RandomReducedWord(AB, rng.randrange(10**6))
            p, q, r = (rand_word(rng, rng.randrange(4)) for _ in range(3))
            lhs = random_stream.rn_derivative(p, q, xi) * random_stream.rn_derivative(q, r, xi)
            assert lhs == pytest.approx(random_stream.rn_derivative(p, r, xi), rel=1e-12)

    def test_equivariance(self, random_stream):
        rng = random.Random(6)
        for _ in range(60):
            g = rand_word(rng, rng.randrange(1, 4))
            w = rand_word(rng, rng.randrange(1, 4))
            c = Cylinder(w)
            lhs = random_stream.measure_from(g, [translate_cylinder(AB, g, c)])
            rhs = random_stream.cylinder_mass((), c)
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-15)


class TestShadowAudits:
    def test_uniform_ratio_constant(self, uniform_stream):
        rep = shadow_lemma_audit(uniform_stream, 8)
        assert rep.lo == pytest.approx(0.75, abs=1e-12)
        assert rep.hi == pytest.approx(0.75, abs=1e-12)

    def test_ratio_interval_stabilizes(self, random_stream):
        rep = shadow_lemma_audit(random_stream, 10)
        m = random_stream.depth_m
        head = max(max(hi for n, lo, hi in rep.rows if n <= m + 2),
                   1.0 / min(lo for n, lo, hi in rep.rows if n <= m + 2))
        for n, lo, hi in rep.rows:
            if n > m + 2:
                assert hi <= head * (1 + 1e-9) and lo >= (1 / head) * (1 - 1e-9)

    def test_uniform_integral_exact(self, uniform_stream):
        rep = shadow_integral_audit(uniform_stream, 12)
        for s, integral, scaled in rep.rows:
            assert integral == pytest.approx(3.0 ** (-s), rel=1e-12)
            assert scaled == pytest.approx(1.0, abs=1e-10)

    def test_depth_one_integral_enumeration(self, random_stream):
        rep = shadow_integral_audit(random_stream, 3)
        P = random_stream.potential
        s1 = sum(math.exp(-P.table[(t,)]) for t in AB.letters) / 4.0
        assert rep.rows[0][1] == pytest.approx(s1, rel=1e-12)

    def test_integral_bounded_oscillation(self, random_stream, stream_m2):
        for S in (random_stream, stream_m2):
            rep = shadow_integral_audit(S, 20)
            assert rep.hi / rep.lo < 10.0


class TestRnHolder:
    def test_constant_zero(self, uniform_stream):
        d_emp, ok = rn_holder_audit(uniform_stream, (0, 2, 1), eps=0.5)
        assert ok and d_emp == 0.0

    def test_depth_one_zero(self, random_stream):
        d_emp, _ = rn_holder_audit(random_stream, (2, 0, 3), eps=0.5)
        assert d_emp == 0.0

    def test_depth_two_finite_and_bounded(self, stream_m2):
        rows = rn_holder_sweep(stream_m2, 6, eps=0.5, seed=1)
        vals = [v for _, v in rows]
        assert all(math.isfinite(v) for v in vals)
        assert max(vals) < 100.0
