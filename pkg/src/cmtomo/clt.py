"""Gaussianization and classical-limit experiments for the summed observable.

Two scans: growing the mode count N at fixed total energy (the summed
distribution approaches a Gaussian, controlled by the Lyapunov ratio
S_N), and shrinking hbar at fixed N (the distribution concentrates at
zero).  S_N is scale-free, hence independent of hbar by construction.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .convolution import CenterOfMassDensity, convolve_fft, marginals_for_system
from .marginals import Moments, fock_abs3_dimensionless, fock_var_closed, moments
from .states import Fock, FrameSpec, SystemSpec, energy, hbar_for_fixed_energy


@dataclass(frozen=True)
class CltReport:
    """One scan point: Lyapunov ratio, variance bracket, Gaussian distances."""

    N: int
    hbar: float
    S_N: float
    sigma2: float
    rE: float
    RE: float
    ks_distance: float
    tv_distance: float
    mass_in_epsilon: float
    gaussian_mass: float
    epsilon: float


def lyapunov_ratio(per_mode_moments: list[Moments]) -> float:
    """(sum_j E|x_j|^3) / (sum_j Var x_j)^{3/2}."""
    var_total = 0.0
    abs3_total = 0.0
    for m in per_mode_moments:
        if not m.var > 0:
            raise ValueError("every per-mode variance must be positive")
        var_total += m.var
        abs3_total += m.abs3
    return abs3_total / var_total ** 1.5


def per_mode_moments(sys: SystemSpec, frame: FrameSpec,
                     marginals=None) -> list[Moments]:
    """Mean/variance/absolute third moment per mode.

    Number states use the closed variance and the exact dimensionless
    third moment; superposition modes use grid quadrature of their
    density (the trusted oracle path).
    """
    out = []
    for i, mode in enumerate(sys.modes):
        mu, nu = frame.mu[i], frame.nu[i]
        if isinstance(mode, Fock):
            s3 = (sys.hbar * (mu * mu + nu * nu)) ** 1.5
            out.append(Moments(mean=0.0,
                               var=fock_var_closed(mode.n, mu, nu, sys.hbar),
                               abs3=s3 * fock_abs3_dimensionless(mode.n)))
        else:
            if marginals is None:
                marginals = marginals_for_system(sys, frame)
            out.append(moments(marginals[i]))
    return out


def sigma2_closed(sys: SystemSpec, frame: FrameSpec) -> float:
    """Variance of the summed observable: closed form for number states,
    quadrature for superposition modes."""
    return float(sum(m.var for m in per_mode_moments(sys, frame)))


def gaussian_distance(d: CenterOfMassDensity, sigma2: float) -> dict:
    """Kolmogorov-Smirnov and total-variation distance to N(0, sigma2).

    Both cumulative distributions are built with the same cumulative
    trapezoid on the density's grid, so the comparison is free of
    quadrature bias between the two curves.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    xs = d.grid.xs
    dx = d.grid.dx
    g = np.exp(-xs * xs / (2.0 * sigma2)) / math.sqrt(2.0 * math.pi * sigma2)
    cd = _cumtrapz(d.values, dx)
    cg = _cumtrapz(g, dx)
    ks = float(np.max(np.abs(cd - cg)))
    tv = float(0.5 * np.trapezoid(np.abs(d.values - g), dx=dx))
    return {"ks": ks, "tv": tv}


def _cumtrapz(values: np.ndarray, dx: float) -> np.ndarray:
    mid = 0.5 * (values[1:] + values[:-1]) * dx
    return np.concatenate([[0.0], np.cumsum(mid)])


def mass_within(d: CenterOfMassDensity, epsilon: float) -> float:
    """Probability mass of the density inside [-epsilon, epsilon]."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    cdf = _cumtrapz(d.values, d.grid.dx)
    xs = d.grid.xs
    hi = float(np.interp(epsilon, xs, cdf, left=0.0, right=cdf[-1]))
    lo = float(np.interp(-epsilon, xs, cdf, left=0.0, right=cdf[-1]))
    return hi - lo


def gaussian_mass_within(sigma2: float, epsilon: float) -> float:
    """erf mass of N(0, sigma2) inside [-epsilon, epsilon]."""
    return math.erf(epsilon / math.sqrt(2.0 * sigma2))


def _report_for(sys: SystemSpec, frame: FrameSpec, epsilon: float) -> CltReport:
    marginals = marginals_for_system(sys, frame)
    pm = per_mode_moments(sys, frame, marginals)
    s_n = lyapunov_ratio(pm)
    sigma2 = float(sum(m.var for m in pm))
    cm = convolve_fft(marginals)
    dist = gaussian_distance(cm, sigma2)
    e_total = energy(sys)
    return CltReport(
        N=sys.n_modes,
        hbar=sys.hbar,
        S_N=s_n,
        sigma2=sigma2,
        rE=frame.r * e_total,
        RE=frame.R * e_total,
        ks_distance=dist["ks"],
        tv_distance=dist["tv"],
        mass_in_epsilon=mass_within(cm, epsilon),
        gaussian_mass=gaussian_mass_within(sigma2, epsilon),
        epsilon=epsilon,
    )


def _run_points(worker, points, threads: int):
    if threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(worker, points))
    return [worker(p) for p in points]


def _cycle(pattern, N):
    return [pattern[i % len(pattern)] for i in range(N)]


def n_scan(modes_schedule, frame_schedule, E: float, N_list,
           r: float, R: float, epsilon: float = 0.1, threads: int = 1) -> list[CltReport]:
    """Fixed-energy scan over the mode count.

    modes_schedule: cycled pattern of number-state levels (bounded sup).
    frame_schedule: cycled pattern of (mu, nu) pairs with r < mu^2+nu^2 < R.
    For each N the scale is hbar = E / (N/2 + sum n_i), the unique value
    holding the total energy at E.
    """
    levels = [int(n) for n in modes_schedule]
    pairs = [(float(m), float(n)) for (m, n) in frame_schedule]

    def point(N: int) -> CltReport:
        modes = tuple(Fock(n) for n in _cycle(levels, N))
        hbar = hbar_for_fixed_energy(E, modes)
        sys = SystemSpec(modes=modes, hbar=hbar)
        mus, nus = zip(*_cycle(pairs, N))
        frame = FrameSpec(mu=mus, nu=nus, r=r, R=R)
        return _report_for(sys, frame, epsilon)

    return _run_points(point, list(N_list), threads)


def hbar_scan(sys_base: SystemSpec, frame: FrameSpec, hbar_list,
              epsilon: float, threads: int = 1) -> list[CltReport]:
    """Classical-limit scan: recompute everything at each hbar.

    hbar_list must be strictly decreasing; the reported mass inside
    [-epsilon, epsilon] then grows toward one as the summed variance
    (linear in hbar) collapses.
    """
    values = [float(h) for h in hbar_list]
    if any(b >= a for a, b in zip(values, values[1:])):
        raise ValueError("hbar_list must be strictly decreasing")

    def point(hbar: float) -> CltReport:
        sys = SystemSpec(modes=sys_base.modes, hbar=hbar)
        return _report_for(sys, frame, epsilon)

    return _run_points(point, values, threads)
