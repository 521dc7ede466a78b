import math

import numpy as np
import pytest

from cmtomo.convolution import (
    _char_function,
    cf_product,
    common_grid,
    convolve_fft,
    marginals_for_system,
    sample_sum,
)
from cmtomo.errors import GridSizeError
from cmtomo.marginals import moments
from cmtomo.states import CoherentEven, CoherentOdd, Fock, FrameSpec, SystemSpec


def iid_system(mode, N, hbar=1.0, mu=1.0, nu=0.0):
    sys = SystemSpec(modes=(mode,) * N, hbar=hbar)
    rho = mu * mu + nu * nu
    frame = FrameSpec(mu=(mu,) * N, nu=(nu,) * N, r=0.5 * rho, R=2.0 * rho)
    return sys, frame


MIXED_SYS = SystemSpec(
    modes=(Fock(1), CoherentEven(1 + 0.5j), CoherentOdd(0.8), Fock(0)), hbar=0.7
)
MIXED_FRAME = FrameSpec(
    mu=(1.0, 0.6, 0.0, -0.8), nu=(0.0, 0.8, 1.0, 0.6), r=0.5, R=2.0
)


class TestConvolveFft:
    def test_two_vacua_gaussian(self):
        sys, frame = iid_system(Fock(0), 2)
        cm = convolve_fft(marginals_for_system(sys, frame))
        got = float(np.interp(0.0, cm.grid.xs, cm.values))
        assert got == pytest.approx(1.0 / math.sqrt(2 * math.pi), abs=1e-6)
        assert moments(cm).var == pytest.approx(1.0, rel=1e-9)

    def test_single_marginal_identity(self):
        sys, frame = iid_system(Fock(1), 1)
        (m,) = marginals_for_system(sys, frame)
        cm = convolve_fft([m])
        back = np.interp(m.grid.xs, cm.grid.xs, cm.values)
        np.testing.assert_allclose(back, m.values, atol=1e-9)

    def test_three_mode_variance(self):
        sys = SystemSpec(modes=(Fock(0), Fock(1), Fock(2)), hbar=1.0)
        frame = FrameSpec(mu=(1.0,) * 3, nu=(0.0,) * 3, r=0.5, R=2.0)
        cm = convolve_fft(marginals_for_system(sys, frame))
        assert moments(cm).var == pytest.approx(4.5, rel=1e-6)

    @pytest.mark.parametrize("N", [1, 2, 8, 64])
    def test_variance_additivity(self, N):
        sys, frame = iid_system(Fock(1), N, hbar=2.0 / N)
        marg = marginals_for_system(sys, frame)
        cm = convolve_fft(marg)
        want = sum(moments(m).var for m in marg)
        assert moments(cm).var == pytest.approx(want, rel=1e-6)
        assert abs(moments(cm).mean) < 1e-8

    def test_mixed_modes_variance_additivity(self):
        marg = marginals_for_system(MIXED_SYS, MIXED_FRAME)
        cm = convolve_fft(marg)
        want = sum(moments(m).var for m in marg)
        assert moments(cm).var == pytest.approx(want, rel=1e-6)
        assert cm.meta["clamped_mass"] < 1e-9

    def test_homogeneity_of_sum_density(self):
        lam = 2.0
        sys = SystemSpec(modes=(Fock(1), Fock(2)), hbar=1.0)
        f1 = FrameSpec(mu=(1.0, 0.6), nu=(0.0, 0.8), r=0.5, R=2.0)
        f2 = FrameSpec(mu=(lam, lam * 0.6), nu=(0.0, lam * 0.8), r=0.5 * lam ** 2, R=2.0 * lam ** 2)
        cm1 = convolve_fft(marginals_for_system(sys, f1))
        cm2 = convolve_fft(marginals_for_system(sys, f2))
        probe = np.linspace(-4, 4, 201)
        v1 = np.interp(probe, cm1.grid.xs, cm1.values)
        v2 = np.interp(lam * probe, cm2.grid.xs, cm2.values)
        np.testing.assert_allclose(v2, v1 / lam, atol=1e-6)

    def test_grid_cap(self):
        sys, frame = iid_system(Fock(0), 2)
        marg = marginals_for_system(sys, frame)
        with pytest.raises(GridSizeError):
            common_grid(marg, max_count=64)


class TestCfProduct:
    def test_vacuum_cf_closed_form(self):
        sys, frame = iid_system(Fock(0), 1)
        (m,) = marginals_for_system(sys, frame)
        ks = np.linspace(-8, 8, 161)
        got = _char_function(m, ks)
        np.testing.assert_allclose(got, np.exp(-ks ** 2 / 4), atol=1e-8)

    def test_fock1_cf_closed_form(self):
        # symbolic integration of 2 y^2 e^{-y^2}/sqrt(pi) against e^{iky}
        sys, frame = iid_system(Fock(1), 1)
        (m,) = marginals_for_system(sys, frame)
        ks = np.linspace(-8, 8, 161)
        got = _char_function(m, ks)
        want = (1 - ks ** 2 / 2) * np.exp(-ks ** 2 / 4)
        np.testing.assert_allclose(got, want, atol=1e-7)

    def test_matches_fft_three_modes(self):
        sys = SystemSpec(modes=(Fock(0), Fock(1), Fock(2)), hbar=1.0)
        frame = FrameSpec(mu=(1.0,) * 3, nu=(0.0,) * 3, r=0.5, R=2.0)
        marg = marginals_for_system(sys, frame)
        cm = convolve_fft(marg)
        cf = cf_product(marg, grid=cm.grid)
        tv = 0.5 * np.trapezoid(np.abs(cm.values - cf.values), dx=cm.grid.dx)
        assert tv < 1e-6

    def test_matches_fft_mixed_modes(self):
        marg = marginals_for_system(MIXED_SYS, MIXED_FRAME)
        cm = convolve_fft(marg)
        cf = cf_product(marg, grid=cm.grid)
        tv = 0.5 * np.trapezoid(np.abs(cm.values - cf.values), dx=cm.grid.dx)
        assert tv < 1e-6


class TestSampleSum:
    def test_deterministic_for_fixed_seed(self):
        sys, frame = iid_system(Fock(1), 3)
        a = sample_sum(sys, frame, 5000, seed=123)
        b = sample_sum(sys, frame, 5000, seed=123)
        assert a.tobytes() == b.tobytes()

    def test_seed_changes_stream(self):
        sys, frame = iid_system(Fock(1), 3)
        a = sample_sum(sys, frame, 5000, seed=123)
        b = sample_sum(sys, frame, 5000, seed=124)
        assert a.tobytes() != b.tobytes()

    def test_vacuum_variance(self):
        sys, frame = iid_system(Fock(0), 1)
        s = sample_sum(sys, frame, 10 ** 6, seed=7)
        assert s.var() == pytest.approx(0.5, abs=2e-3)
        assert s.mean() == pytest.approx(0.0, abs=2e-3)

    def test_ks_against_fft_cdf(self):
        sys = SystemSpec(modes=(Fock(0), Fock(1), Fock(2)), hbar=1.0)
        frame = FrameSpec(mu=(1.0,) * 3, nu=(0.0,) * 3, r=0.5, R=2.0)
        marg = marginals_for_system(sys, frame)
        cm = convolve_fft(marg)
        samples = np.sort(sample_sum(sys, frame, 10 ** 6, seed=99, marginals=marg))
        mid = 0.5 * (cm.values[1:] + cm.values[:-1]) * cm.grid.dx
        cdf = np.concatenate([[0.0], np.cumsum(mid)])
        cdf /= cdf[-1]
        emp = np.searchsorted(samples, cm.grid.xs, side="right") / len(samples)
        ks = float(np.max(np.abs(emp - cdf)))
        assert ks < 0.005

    def test_cat_modes_sampleable(self):
        sys = SystemSpec(modes=(CoherentEven(1.5), CoherentOdd(1.0)), hbar=1.0)
        frame = FrameSpec(mu=(0.0, 1.0), nu=(1.0, 0.0), r=0.5, R=2.0)
        marg = marginals_for_system(sys, frame)
        s = sample_sum(sys, frame, 200000, seed=5, marginals=marg)
        want = sum(moments(m).var for m in marg)
        assert s.var() == pytest.approx(want, rel=0.02)
