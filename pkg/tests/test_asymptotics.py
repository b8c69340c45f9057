import math

import numpy as np
import pytest
from scipy import special

from blaschke_lab import BlaschkeProduct, MonomialError, OrliczFunction, coeffs_of_power, sup_coeff
from blaschke_lab.asymptotics import (
    NormSweep,
    default_eps_grid,
    dyadic_ks,
    fit_decay_exponent,
    norm_sweep,
    oscillatory_integral,
    predicted_exponent,
    vdc_bound,
    vdc_lemma_bound,
)
from blaschke_lab.blaschke import phase_census
from blaschke_lab.errors import BoundUnavailableError, InsufficientDataError, ValidationError


class TestSweeps:
    def test_l2_is_one(self):
        B = BlaschkeProduct.from_zeros([0.2 - 0.5j, 0.7])
        sw = norm_sweep(B, "l2", [1, 5, 50, 400])
        assert np.allclose(sw.values, 1.0, atol=1e-8)

    def test_power4_decreasing(self, B_default):
        sw = norm_sweep(B_default, OrliczFunction.power(4), dyadic_ks(16, 4096))
        v = np.array(sw.values)
        assert np.all(np.diff(v) < 0)
        assert v[-1] < v[0] / 2  # the quarter ratio needs longer k ranges; see the acceptance suite

    def test_power15_increasing(self, B_default):
        sw = norm_sweep(B_default, "power:1.5", dyadic_ks(16, 4096))
        v = np.array(sw.values)
        assert np.all(np.diff(v) > 0)
        assert v[-1] > 2 * v[0]

    def test_threads_do_not_change_results(self, B_default, monkeypatch):
        ks = [10, 20, 40, 80]
        one = norm_sweep(B_default, "power:3", ks)
        monkeypatch.setenv("BLASCHKE_LAB_THREADS", "4")
        four = norm_sweep(B_default, "power:3", ks)
        assert one.values == four.values

    def test_csv_roundtrip(self, B_default):
        sw = norm_sweep(B_default, "sup", [16, 32])
        back = NormSweep.from_csv(sw.to_csv(), "sup")
        assert back.ks == sw.ks and back.values == sw.values

    def test_rejects_unsorted(self):
        with pytest.raises(ValidationError):
            NormSweep((4, 2), (1.0, 1.0), "sup")


class TestRateFit:
    def test_exact_power_law(self):
        ks = dyadic_ks(2, 2**12)
        sw = NormSweep(tuple(ks), tuple(k ** (-1 / 3) for k in ks), "sup")
        slope, err = fit_decay_exponent(sw)
        assert slope == pytest.approx(-1 / 3, abs=1e-12)
        assert err < 1e-12

    def test_constant(self):
        ks = tuple(range(1, 20))
        slope, _ = fit_decay_exponent(NormSweep(ks, (1.0,) * len(ks), "sup"))
        assert slope == pytest.approx(0.0, abs=1e-12)

    def test_insufficient(self):
        ks = (1, 2, 4, 8, 16)
        with pytest.raises(InsufficientDataError):
            fit_decay_exponent(NormSweep(ks, (1.0,) * 5, "sup"))

    def test_sup_sweep_slope(self, B_default):
        sw = norm_sweep(B_default, "sup", dyadic_ks(64, 8192))
        slope, _ = fit_decay_exponent(sw, 64)
        assert abs(slope + 1 / 3) <= 0.07

    @pytest.mark.parametrize("zeros", [[0, 0.5], [0.5, -0.5]])
    def test_predicted(self, zeros):
        assert predicted_exponent(BlaschkeProduct.from_zeros(zeros)) == pytest.approx(-1 / 3)

    def test_predicted_monomial(self):
        with pytest.raises(MonomialError):
            predicted_exponent(BlaschkeProduct.from_zeros([0]))


class TestVanDerCorput:
    def test_lemma_against_fresnel(self):
        S, C = special.fresnel(math.sqrt(2 / math.pi))
        exact = abs(complex(C, S)) * math.sqrt(math.pi / 2)
        quad = abs(oscillatory_integral(lambda x: x * x, 0.0, 1.0))
        assert quad == pytest.approx(exact, rel=1e-10)
        assert quad == pytest.approx(0.956, abs=1e-3)
        assert vdc_lemma_bound(2) == pytest.approx(8 / math.sqrt(2))
        assert vdc_lemma_bound(2) >= quad

    @pytest.mark.parametrize("lam", [10.0, 100.0, 1000.0])
    def test_lemma_on_quadratic_phases(self, lam):
        quad = abs(oscillatory_integral(lambda x: lam * x * x, -1.0, 1.0))
        assert quad <= vdc_lemma_bound(2 * lam)

    def test_bound_dominates_empirical(self, B_default):
        vb = vdc_bound(B_default, 10_000)
        emp = sup_coeff(coeffs_of_power(B_default, 10_000))
        assert emp <= vb.best + 1e-9
        assert vb.s == 2

    def test_best_nonincreasing_in_k(self, B_default):
        census = phase_census(B_default)
        bests = [vdc_bound(B_default, k, census=census).best for k in (10, 100, 1000, 10_000, 100_000)]
        assert all(b2 <= b1 for b1, b2 in zip(bests, bests[1:]))

    def test_formula(self, B_default):
        vb = vdc_bound(B_default, 400, [0.1])
        (eps, bound, m_eps), = vb.per_eps
        assert bound == pytest.approx((2 * 3 * eps + 8 * 3 / math.sqrt(400 * m_eps)) / (2 * math.pi))
        # M_eps against a brute-force minimum of |psi''| away from the inflections
        theta = np.linspace(0, 2 * math.pi, 400_001)
        near = np.minimum(np.abs(theta - 0), np.minimum(np.abs(theta - math.pi), np.abs(theta - 2 * math.pi)))
        kept = np.concatenate([theta[near >= eps], [eps, math.pi - eps, math.pi + eps, 2 * math.pi - eps]])
        brute = np.min(np.abs(B_default.phase_derivative(kept, 2)))
        assert m_eps == pytest.approx(brute, rel=1e-9)

    def test_empty_grid(self, B_default):
        with pytest.raises(BoundUnavailableError):
            vdc_bound(B_default, 100, [2.0])

    def test_default_grid(self):
        g = default_eps_grid()
        assert g[0] == pytest.approx(0.1) and g[-1] == pytest.approx(1e-4) and len(g) == 7
