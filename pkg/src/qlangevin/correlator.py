"""Frequency grids, biphoton wavefunctions, Glauber correlations and oracles.

Conventions
-----------
The anti-Stokes (mode 1) detuning ``varpi`` labels every frequency sample and
the relative time is ``tau = t1 - t2``. A spectral density ``S(varpi)`` maps
to the time domain as

    psi(tau) = (1 / 2 pi) * integral S(varpi) exp(-i varpi tau) d varpi

which is evaluated with an FFT on a uniform grid ``varpi in [-W, W)``.
Carrier phases and vacuum propagation delays are dropped.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import curve_fit

from . import mat2
from .errors import ConfigError, GridUnresolvedError
from .phenomodel import (
    BACKWARD,
    FORWARD,
    CouplingSpec,
    SecondMomentSpectra,
    macro_forcing,
    propagate_moments,
)

GRID_RTOL = 1e-3

# spectral densities behind each wavefunction ordering
ORDERING_KEYS = {"21": "a2_a1", "12": "a1_a2"}


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform grid ``varpi_k = -W + k dw`` with ``n_points * dw = 2 W``."""

    n_points: int = 2**14
    span: float = 1.0

    def __post_init__(self):
        n = self.n_points
        if n < 2 or n & (n - 1):
            raise ConfigError("n_points must be a power of two")
        if not self.span > 0:
            raise ConfigError("span must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.span / self.n_points

    @property
    def varpi(self) -> np.ndarray:
        return -self.span + self.spacing * np.arange(self.n_points)

    @property
    def dtau(self) -> float:
        return np.pi / self.span

    @property
    def tau(self) -> np.ndarray:
        return self.dtau * (np.arange(self.n_points) - self.n_points // 2)

    def doubled(self) -> "FrequencyGrid":
        return FrequencyGrid(2 * self.n_points, self.span)


def default_span(omega_c: complex, gamma13: float, gamma12: float = 0.0) -> float:
    """``8 max(|Omega_c|, EIT half-width)`` with half-width ``|Omega_c|^2 / (4 gamma13)``."""
    halfwidth = abs(omega_c) ** 2 / (4 * (gamma13 + gamma12)) if gamma13 + gamma12 > 0 else abs(omega_c)
    return 8 * max(abs(omega_c), halfwidth)


def to_time(spectrum, grid: FrequencyGrid) -> np.ndarray:
    """``(1/2pi) sum S(varpi) exp(-i varpi tau) dw`` on ``grid.tau``."""
    s = np.asarray(spectrum, dtype=complex)
    n = grid.n_points
    k = np.arange(n)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    out = np.fft.fft(s * sign) * grid.spacing / (2 * np.pi)
    phase = np.where((k - n // 2) % 2 == 0, 1.0, -1.0)
    return out * phase


# ---------------------------------------------------------------------------
# spectra sources


SpectraSource = Callable[..., SecondMomentSpectra]


def macro_source(spec: CouplingSpec) -> SpectraSource:
    def source(varpi, nln: bool = False):
        forcing = None if nln else macro_forcing(spec, varpi)
        return propagate_moments(spec, forcing, varpi, nln=nln)

    return source


def forcing_source(spec: CouplingSpec, forcing_fn) -> SpectraSource:
    """Spectra with a forcing covariance built by ``forcing_fn(varpi)``."""

    def source(varpi, nln: bool = False):
        forcing = None if nln else forcing_fn(varpi)
        return propagate_moments(spec, forcing, varpi, nln=nln)

    return source


def rates(spectra: SecondMomentSpectra, grid: FrequencyGrid | None = None) -> tuple[float, float]:
    """Photon rates ``R_m = (1/2pi) integral <a_m^dagger a_m> d varpi`` (trapezoid)."""
    w = spectra.varpi
    n1 = spectra.correlation("a1dag_a1").real
    n2 = spectra.correlation("a2dag_a2").real
    return float(np.trapezoid(n1, w) / (2 * np.pi)), float(np.trapezoid(n2, w) / (2 * np.pi))


def biphoton_wavefunction(
    source,
    grid: FrequencyGrid,
    ordering: str = "21",
    noise: str = "full",
    check_grid: bool = False,
) -> np.ndarray:
    """Relative two-photon wavefunction on ``grid.tau``.

    Parameters
    ----------
    source : SecondMomentSpectra or callable
        Precomputed spectra on ``grid`` or a spectra source
        ``source(varpi, nln=...)``. The grid check needs a callable.
    ordering : {"21", "12"}
        ``"21"`` transforms ``<a2 a1>``, ``"12"`` transforms ``<a1 a2>``.
    noise : {"full", "NLN"}
        ``"NLN"`` keeps only the boundary (input-field) contribution.
    check_grid : bool
        Recompute on a grid with twice the points and raise
        :class:`GridUnresolvedError` if the result moves by more than
        ``1e-3`` of its peak.
    """
    if ordering not in ORDERING_KEYS:
        raise ConfigError("ordering must be '21' or '12'")
    if noise not in ("full", "NLN"):
        raise ConfigError("noise must be 'full' or 'NLN'")
    nln = noise == "NLN"
    spectra = source(grid.varpi, nln=nln) if callable(source) else source
    psi = to_time(spectra.correlation(ORDERING_KEYS[ordering]), grid)
    if check_grid:
        if not callable(source):
            raise ConfigError("grid check needs a spectra source callable")
        fine = grid.doubled()
        psi_f = to_time(source(fine.varpi, nln=nln).correlation(ORDERING_KEYS[ordering]), fine)
        n = grid.n_points
        common = psi_f[n // 2 : n // 2 + n]
        dev = np.max(np.abs(common - psi)) / max(np.max(np.abs(psi_f)), 1e-300)
        if dev > GRID_RTOL:
            raise GridUnresolvedError(f"wavefunction changed by {dev:.2e} under grid doubling")
    return psi


def cross_term(source, grid: FrequencyGrid, noise: str = "full") -> np.ndarray:
    """Transform of ``<a2^dagger a1>``; identically zero for real coupling."""
    spectra = source(grid.varpi, nln=noise == "NLN") if callable(source) else source
    return to_time(spectra.correlation("a2dag_a1"), grid)


@dataclass(frozen=True)
class TemporalObservables:
    tau: np.ndarray
    psi21: np.ndarray
    psi12: np.ndarray
    phi: np.ndarray
    G2_21: np.ndarray
    G2_12: np.ndarray
    g2_21: np.ndarray
    g2_12: np.ndarray
    r1: float
    r2: float


def glauber_g2(psi, phi, r1: float, r2: float) -> tuple[np.ndarray, np.ndarray]:
    """``G2 = |psi|^2 + |phi|^2 + R1 R2`` and ``g2 = G2 / (R1 R2)``."""
    psi = np.asarray(psi)
    phi = np.zeros_like(psi) if phi is None else np.asarray(phi)
    big = np.abs(psi) ** 2 + np.abs(phi) ** 2 + r1 * r2
    rr = r1 * r2
    with np.errstate(divide="ignore", invalid="ignore"):
        small = big / rr if rr > 0 else np.where(big == 0, 1.0, np.inf)
    return big, small


def temporal_observables(source, grid: FrequencyGrid, noise: str = "full", check_grid: bool = False) -> TemporalObservables:
    nln = noise == "NLN"
    spectra = source(grid.varpi, nln=nln) if callable(source) else source
    psi21 = biphoton_wavefunction(source if check_grid else spectra, grid, "21", noise, check_grid)
    psi12 = biphoton_wavefunction(spectra, grid, "12", noise)
    phi = cross_term(spectra, grid)
    r1, r2 = rates(spectra, grid)
    g21, n21 = glauber_g2(psi21, phi, r1, r2)
    g12, n12 = glauber_g2(psi12, phi, r1, r2)
    return TemporalObservables(grid.tau, psi21, psi12, phi, g21, g12, n21, n12, r1, r2)


# ---------------------------------------------------------------------------
# analytic oracles


def _sinhc(x):
    return mat2._sinhc(x)


def analytic_abcd(spec: CouplingSpec, varpi=0.0) -> np.ndarray:
    """Closed-form input-output matrix.

    Forward: ``q = a1 - a2* - i dk`` and ``r = sqrt(q^2 + 4 kappa^2)``.
    Backward: ``q = a1 + a2* - i dk`` and ``r = sqrt(q^2 - 4 kappa^2)``.
    Every expression is even in ``r`` so the square-root branch is irrelevant.
    """
    a1, a2, kappa = spec.parameters(varpi)
    a2c = np.conj(a2)
    L = spec.length
    dk = spec.delta_k
    if spec.geometry == FORWARD:
        q = a1 - a2c - 1j * dk
        r = np.sqrt(q * q + 4 * kappa * kappa)
        x = 0.5 * r * L
        ch = np.cosh(x)
        sh_r = 0.5 * L * _sinhc(x)  # sinh(x) / r
        env = np.exp(-0.5 * (a1 + a2c) * L)
        a = (ch - q * sh_r) * env
        b = 2j * kappa * sh_r * env
        c = -b
        d = (ch + q * sh_r) * env
    else:
        q = a1 + a2c - 1j * dk
        r = np.sqrt(q * q - 4 * kappa * kappa)
        x = 0.5 * r * L
        ch = np.cosh(x)
        sh_r = 0.5 * L * _sinhc(x)
        den = q * sh_r + ch
        a = np.exp(-0.5 * (a1 - a2c) * L) / den
        b = 2j * kappa * sh_r / den
        c = -b
        d = np.exp(0.5 * (a1 - a2c) * L) / den
    ph = np.exp(1j * spec.theta)
    return mat2.cmat2(a, b * ph, c / ph, d)


def _sinc(z):
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z * z / 6.0, np.sin(zs) / zs)


@dataclass(frozen=True)
class PerturbationParams:
    """Small-gain description of pair generation on a frequency grid.

    ``delta_k_m = i alpha_m`` are the complex wavenumber shifts of the two
    modes, ``delta_k_tilde`` the complex phase mismatch entering the sinc and
    ``phi_func`` the longitudinal detuning function, so that the
    boundary pair amplitude is approximately ``i kappa L phi_func``.
    """

    delta_k_tilde: np.ndarray
    phi_func: np.ndarray
    q: np.ndarray
    delta_k_m: tuple


def perturbation_params(spec: CouplingSpec, varpi=0.0, channel2: str = "gain") -> PerturbationParams:
    """Sinc-exponential factors for the gain (``B D*``) or loss (``A C*``) ordering."""
    if channel2 not in ("gain", "loss"):
        raise ConfigError("channel2 must be 'gain' or 'loss'")
    a1, a2, _ = spec.parameters(varpi)
    k1, k2 = 1j * a1, 1j * a2
    dk = spec.delta_k
    L = spec.length
    back = spec.geometry == BACKWARD
    if channel2 == "gain":
        q = a1 + np.conj(a2) - 1j * dk if back else a1 - np.conj(a2) - 1j * dk
        if back:
            dkt = k1 - np.conj(k2) + dk
            phase = k1 - np.conj(k2) + 2 * k2
        else:
            dkt = k1 + np.conj(k2) + dk
            phase = k1 - np.conj(k2) + 2 * k2 + dk
    else:
        q = a1 + np.conj(a2) - 1j * dk if back else a1 - np.conj(a2) - 1j * dk
        if back:
            dkt = np.conj(k1) - k2 + dk
            phase = 2 * k1 - np.conj(k1) + k2
        else:
            dkt = np.conj(k1) + k2 + dk
            phase = 2 * k1 - np.conj(k1) + k2 + dk
    phi = _sinc(0.5 * dkt * L) * np.exp(0.5j * phase * L)
    return PerturbationParams(dkt, phi, q, (k1, k2))


def smallgain_sinc(spec: CouplingSpec, varpi=0.0, channel2: str = "gain") -> np.ndarray:
    """Small-gain estimate of ``B D*`` (gain) or ``A C*`` (loss).

    Valid for ``|kappa| << |q|``; a warning is issued above ``|kappa/q| = 0.1``.
    """
    _, _, kappa = spec.parameters(varpi)
    pp = perturbation_params(spec, varpi, channel2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(kappa) / np.abs(pp.q)
    if np.any(ratio > 0.1):
        warnings.warn("small-gain form used with |kappa/q| > 0.1", stacklevel=2)
    ph = np.exp(1j * spec.theta)
    if channel2 == "gain":
        return 1j * kappa * ph * spec.length * pp.phi_func
    # C carries kappa e^{-i theta}, so A C* picks up kappa* e^{+i theta}
    return 1j * np.conj(kappa) * ph * spec.length * pp.phi_func


def perturbation_wavefunction(kappa_func, pert: PerturbationParams | None, length: float, grid: FrequencyGrid) -> np.ndarray:
    """``psi(tau) = (i L / 2 pi) integral kappa Phi exp(-i varpi tau) d varpi``.

    ``pert = None`` means perfect phase matching (``Phi = 1``).
    """
    kap = kappa_func(grid.varpi) if callable(kappa_func) else np.asarray(kappa_func)
    phi = 1.0 if pert is None else pert.phi_func
    return to_time(1j * length * kap * phi, grid)


@dataclass(frozen=True)
class RabiParams:
    omega_e: float
    gamma_e: float
    j_amp: float

    @classmethod
    def from_atoms(cls, levels, drive, ensemble) -> "RabiParams":
        from .atomsfwm import _pump_factor, collective_couplings

        det = abs(drive.omega_c) ** 2 - (levels.gamma13 - levels.gamma12) ** 2
        if det <= 0:
            raise ConfigError("effective Rabi frequency is not real (|Omega_c| <= |g13 - g12|)")
        omega_e = float(np.sqrt(det))
        k_as, k_s = collective_couplings(levels, ensemble)
        j = -np.sqrt(k_as * k_s) * abs(_pump_factor(drive, levels)) / (4 * omega_e)
        return cls(omega_e, 0.5 * (levels.gamma12 + levels.gamma13), float(j))

    def kappa(self, varpi) -> np.ndarray:
        """Two-pole coupling spectrum."""
        w = np.asarray(varpi, dtype=float)
        return self.j_amp * (
            1 / (w - self.omega_e / 2 + 1j * self.gamma_e) - 1 / (w + self.omega_e / 2 + 1j * self.gamma_e)
        )


def rabi_analytic(rp: RabiParams, length: float) -> Callable[[np.ndarray], np.ndarray]:
    """Damped Rabi wavefunction ``-2 i L J e^{-g tau} sin(W tau / 2)`` for ``tau >= 0``."""

    def psi(tau):
        tau = np.asarray(tau, dtype=float)
        pos = tau >= 0
        t = np.where(pos, tau, 0.0)
        val = -2j * length * rp.j_amp * np.exp(-rp.gamma_e * t) * np.sin(0.5 * rp.omega_e * t)
        return np.where(pos, val, 0.0)

    return psi


@dataclass(frozen=True)
class RabiFit:
    omega: float
    decay: float
    amplitude: float


def fit_rabi(tau, psi, gamma_guess: float, omega_guess: float, window: float = 6.0) -> RabiFit:
    """Fit ``|psi|^2 = P e^{-Gamma tau} sin^2(W tau / 2)`` for ``0 <= tau <= window / gamma``.

    Returns the oscillation frequency ``W`` of ``|psi|^2`` and its envelope
    decay rate ``Gamma``.
    """
    tau = np.asarray(tau)
    y = np.abs(psi) ** 2
    sel = (tau >= 0) & (tau <= window / gamma_guess)
    t, yy = tau[sel], y[sel]
    scale = yy.max()

    def model(t, p, w, g):
        return p * np.exp(-g * t) * np.sin(0.5 * w * t) ** 2

    popt, _ = curve_fit(
        model, t, yy / scale, p0=(1.0, omega_guess, 2 * gamma_guess), maxfev=20000
    )
    return RabiFit(omega=abs(popt[1]), decay=popt[2], amplitude=popt[0] * scale)


@dataclass(frozen=True)
class ComplexKappaReport:
    pair_21: np.ndarray
    pair_12: np.ndarray
    first_order: np.ndarray
    max_deviation: float
    bound: float
    branch_deviation: dict
    symmetry_deviation: float
    symmetry_deviation_literal: float
    passed: bool


def complex_kappa_shortL_check(spec: CouplingSpec, grid: FrequencyGrid | None = None, bound_factor: float = 4.0) -> ComplexKappaReport:
    """Short-medium check for a lossless, phase-matched, complex-coupling medium.

    The exact pair spectra ``<a2 a1>`` and ``<a1 a2>`` must equal
    ``(i/2)(kappa + kappa*) L`` within ``bound_factor * (|M| L)^2``. The time
    symmetry ``psi(tau) = psi*(-tau)`` is checked in the gauge ``theta = -pi/2``,
    which removes the constant factor ``i`` in front of the real spectrum;
    the literal ``theta = 0`` deviation is reported alongside.
    """
    a1, a2, _ = spec.parameters(0.0)
    if np.any(np.abs(a1) > 0) or np.any(np.abs(a2) > 0) or spec.delta_k != 0:
        raise ConfigError("complex-kappa check needs alpha1 = alpha2 = delta_k = 0")
    grid = grid or FrequencyGrid(2**12, 1.0)
    w = grid.varpi
    base = spec.with_(theta=0.0)
    sp = propagate_moments(base, None, w)
    _, _, kappa = base.parameters(w)
    first = 0.5j * (kappa + np.conj(kappa)) * base.length
    mnorm = np.abs(kappa) * base.length
    if np.any(mnorm > 1e-2):
        raise ConfigError("complex-kappa check needs |M| L <= 1e-2")
    p21 = sp.correlation("a2_a1")
    p12 = sp.correlation("a1_a2")
    dev = np.maximum(np.abs(p21 - first), np.abs(p12 - first))
    bound = bound_factor * mnorm**2 + 1e-15
    ok_pair = bool(np.all(dev <= bound))
    # the sign of Im(kappa) selects which square-root branch the noise uses
    ratio = dev / bound
    branches = {}
    for label, sel in (("zeta>0", kappa.imag > 0), ("zeta<0", kappa.imag < 0)):
        branches[label] = float(np.max(ratio[sel])) if np.any(sel) else None

    def sym_dev(psi):
        rev = np.conj(psi[::-1])
        # tau grid is tau_m = (m - n/2) dtau, so reversing maps m -> n - 1 - m;
        # shift by one sample to land on -tau_m
        rev = np.roll(rev, 1)
        return float(np.max(np.abs(psi[1:] - rev[1:])) / np.max(np.abs(psi)))

    psi_lit = to_time(p21, grid)
    gauged = propagate_moments(base.with_(theta=-np.pi / 2), None, w).correlation("a2_a1")
    psi_g = to_time(gauged, grid)
    sd = sym_dev(psi_g)
    return ComplexKappaReport(
        p21, p12, first, float(np.max(ratio)), float(np.max(bound)), branches, sd, sym_dev(psi_lit), ok_pair and sd <= 1e-2
    )
