"""Macroscopic quantum Langevin model of two phase-conjugated modes.

The mode vector is ``v = (a1, a2^dagger)`` and obeys

    dv/dz = M v + N_R (f1, f2^dagger) + N_I (f1^dagger, f2)

with vacuum-correlated forcing. Noise matrices follow from the commutator
deficit of the coupling matrix, and the second moments of the output
ports are obtained in closed form per frequency sample.

All routines are vectorized over a frequency array ``varpi``; material
parameters may be constants or callables of ``varpi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Union

import numpy as np

from . import mat2
from .errors import ConfigError, SingularBoundaryError

Param = Union[complex, float, Callable[[np.ndarray], np.ndarray]]

FORWARD = "forward"
BACKWARD = "backward"
GEOMETRIES = (FORWARD, BACKWARD)

SINGULAR_RTOL = 1e-14

_E1 = np.diag([1.0, 0.0]).astype(complex)
_E2 = np.diag([0.0, 1.0]).astype(complex)
_SZ = np.diag([1.0, -1.0]).astype(complex)
_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _eval(p: Param, varpi) -> np.ndarray:
    if callable(p):
        return np.asarray(p(varpi), dtype=complex)
    return np.broadcast_to(np.asarray(p, dtype=complex), np.shape(varpi))


@dataclass(frozen=True)
class CouplingSpec:
    """Macroscopic two-mode medium.

    Parameters
    ----------
    alpha1, alpha2 : complex or callable
        Complex field attenuation coefficients in 1/m. A positive real part
        is loss, a negative real part gain, the imaginary part is dispersion.
        Callables are evaluated on the frequency grid.
    delta_k : float
        Vacuum phase mismatch in rad/m.
    kappa : complex or callable
        Nonlinear coupling coefficient in 1/m.
    theta : float
        Gauge phase in rad.
    geometry : {"forward", "backward"}
    length : float
        Medium length in m.
    """

    alpha1: Param = 0.0
    alpha2: Param = 0.0
    delta_k: float = 0.0
    kappa: Param = 0.0
    theta: float = 0.0
    geometry: str = FORWARD
    length: float = 1.0

    def __post_init__(self):
        if self.geometry not in GEOMETRIES:
            raise ConfigError(f"geometry must be one of {GEOMETRIES}, got {self.geometry!r}")
        if not self.length > 0:
            raise ConfigError("length must be positive")
        if abs(self.theta) > np.pi:
            raise ConfigError("|theta| must not exceed pi")

    def parameters(self, varpi=0.0):
        """Return ``(alpha1, alpha2, kappa)`` evaluated at ``varpi``."""
        varpi = np.asarray(varpi, dtype=float)
        return _eval(self.alpha1, varpi), _eval(self.alpha2, varpi), _eval(self.kappa, varpi)

    def with_(self, **changes) -> "CouplingSpec":
        return replace(self, **changes)


def gauge_unitary(theta: float) -> np.ndarray:
    return np.diag([np.exp(0.5j * theta), np.exp(-0.5j * theta)])


def coupling_matrix(spec: CouplingSpec, varpi=0.0, geometry: str | None = None) -> np.ndarray:
    """Coupling matrix ``M`` in the gauge ``spec.theta``.

    ``geometry`` overrides ``spec.geometry``; it is used to obtain the
    forward matrix of the same medium when building backward noise.
    """
    geometry = geometry or spec.geometry
    a1, a2, kappa = spec.parameters(varpi)
    half_dk = 0.5j * spec.delta_k
    ph = np.exp(1j * spec.theta)
    m12 = 1j * kappa * ph
    if geometry == FORWARD:
        return mat2.cmat2(-a1 + half_dk, m12, -1j * kappa / ph, -np.conj(a2) - half_dk)
    return mat2.cmat2(-a1 + half_dk, m12, 1j * kappa / ph, np.conj(a2) - half_dk)


@dataclass(frozen=True)
class NoiseMatrices:
    """Real and imaginary parts of the Langevin noise matrix."""

    n_r: np.ndarray
    n_i: np.ndarray

    @property
    def n(self) -> np.ndarray:
        return self.n_r + 1j * self.n_i


def noise_matrices(spec: CouplingSpec, varpi=0.0) -> NoiseMatrices:
    """Principal-branch noise matrix, built in the ``theta = 0`` gauge.

    ``N_F = sqrt(-(M_F + conj(M_F)))`` of the forward matrix; the backward
    geometry flips the sign of the second row. The commutator deficit is
    only real in the ``theta = 0`` gauge, so other gauges are reached by
    rotating the forcing covariance (see :func:`forcing_covariance_macro`).
    """
    m_f = coupling_matrix(spec.with_(theta=0.0), varpi, geometry=FORWARD)
    deficit = -(m_f + np.conj(m_f))
    # the deficit is real up to rounding; dropping the residue keeps the
    # principal branch deterministic on the negative real axis
    n = mat2.sqrtm2(deficit.real.astype(complex))
    if spec.geometry == BACKWARD:
        n = _SZ @ n
    return _split(n)


def _split(n: np.ndarray) -> NoiseMatrices:
    return NoiseMatrices(np.ascontiguousarray(n.real), np.ascontiguousarray(n.imag))


@dataclass(frozen=True)
class ForcingCovariance:
    """Per-unit-length second moments of the forcing vector ``F``.

    ``c_ff_dag[i, j] = <F_i F_j^dagger>``, ``c_fdag_f[i, j] = <F_i^dagger F_j>``,
    ``c_ff[i, j] = <F_i F_j>`` and ``c_fdag_fdag[i, j] = <F_i^dagger F_j^dagger>``.
    """

    c_ff_dag: np.ndarray
    c_fdag_f: np.ndarray
    c_ff: np.ndarray
    c_fdag_fdag: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.c_fdag_fdag is None:
            object.__setattr__(self, "c_fdag_fdag", np.conj(mat2.transpose(self.c_ff)))

    def gauge(self, theta: float) -> "ForcingCovariance":
        """Covariance of ``U F`` with ``U = diag(e^{i theta/2}, e^{-i theta/2})``."""
        if theta == 0:
            return self
        u = gauge_unitary(theta)
        uc = np.conj(u)
        return ForcingCovariance(
            u @ self.c_ff_dag @ uc,
            uc @ self.c_fdag_f @ u,
            u @ self.c_ff @ u,
            uc @ self.c_fdag_fdag @ uc,
        )

    def max_abs_difference(self, other: "ForcingCovariance") -> float:
        return max(
            float(np.max(np.abs(getattr(self, k) - getattr(other, k))))
            for k in ("c_ff_dag", "c_fdag_f", "c_ff", "c_fdag_fdag")
        )


def forcing_covariance_macro(nm: NoiseMatrices, theta: float = 0.0) -> ForcingCovariance:
    """Forcing covariance implied by vacuum-correlated ``f`` operators.

    With ``u = (f1, f2^dagger)`` and ``w = (f1^dagger, f2)`` the only nonzero
    vacuum moments are ``<u u^dagger> = diag(1, 0)``, ``<w w^dagger> = diag(0, 1)``,
    ``<u w^T> = diag(1, 0)`` and ``<w u^T> = diag(0, 1)``.
    """
    nr = np.asarray(nm.n_r, dtype=complex)
    ni = np.asarray(nm.n_i, dtype=complex)
    nrt = mat2.transpose(nr)
    nit = mat2.transpose(ni)
    cov = ForcingCovariance(
        c_ff_dag=nr @ _E1 @ nrt + ni @ _E2 @ nit,
        c_fdag_f=nr @ _E2 @ nrt + ni @ _E1 @ nit,
        c_ff=nr @ _E1 @ nit + ni @ _E2 @ nrt,
    )
    return cov.gauge(theta)


def macro_forcing(spec: CouplingSpec, varpi=0.0) -> ForcingCovariance:
    return forcing_covariance_macro(noise_matrices(spec, varpi), spec.theta)


def equivalent_noise_variants(nm: NoiseMatrices) -> list[NoiseMatrices]:
    """Sign-flipped noise matrices that describe the same physics.

    Negating a column of ``N_R`` together with the matching column of
    ``N_I`` relabels ``f_m -> -f_m``, which leaves every vacuum moment
    unchanged. The four column-sign patterns are returned.
    """
    out = []
    for s1 in (1.0, -1.0):
        for s2 in (1.0, -1.0):
            d = np.diag([s1, s2])
            out.append(NoiseMatrices(nm.n_r @ d, nm.n_i @ d))
    return out


def backward_sqrt_form(spec: CouplingSpec, varpi=0.0) -> NoiseMatrices:
    """Backward noise matrix written directly as a square root.

    ``sqrt(Q + Q*)`` with ``Q = [[-M11, M12], [-M21, M22]]`` of the backward
    matrix; equals the principal choice with its second column negated.
    """
    m = coupling_matrix(spec.with_(theta=0.0, geometry=BACKWARD), varpi)
    q = m * np.array([[-1.0, 1.0], [-1.0, 1.0]])
    q = q + np.conj(q)
    return _split(mat2.sqrtm2(q.real.astype(complex)))


def transfer_forward(spec: CouplingSpec, varpi=0.0):
    """Forward transfer matrix ``e^{M L}`` and the noise kernel ``z -> e^{M (L - z)}``."""
    m = coupling_matrix(spec, varpi, geometry=FORWARD)
    abcd = mat2.expm2(m, spec.length)

    def kernel(z):
        return mat2.expm2(m, spec.length - np.asarray(z, dtype=float))

    return abcd, kernel


def rearrange_backward(ebar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map ``e^{M_B L}`` to the input-output matrix and the noise prefactor.

    Raises
    ------
    SingularBoundaryError
        If ``|D-bar|`` falls below ``1e-14`` times the matrix scale.
    """
    ab, bb, cb, db = ebar[..., 0, 0], ebar[..., 0, 1], ebar[..., 1, 0], ebar[..., 1, 1]
    scale = np.maximum(np.max(np.abs(ebar), axis=(-1, -2)), 1.0)
    if np.any(np.abs(db) < SINGULAR_RTOL * scale):
        raise SingularBoundaryError("backward boundary problem is singular (|D-bar| ~ 0)")
    a = ab - bb * cb / db
    b = bb / db
    c = -cb / db
    d = 1.0 / db
    abcd = mat2.cmat2(a, b, c, d)
    pref = mat2.cmat2(np.ones_like(b), -b, np.zeros_like(b), -d)
    return abcd, pref


def transfer_backward(spec: CouplingSpec, varpi=0.0):
    """Backward input-output matrix, noise prefactor and kernel."""
    m = coupling_matrix(spec, varpi, geometry=BACKWARD)
    abcd, pref = rearrange_backward(mat2.expm2(m, spec.length))

    def kernel(z):
        return mat2.expm2(m, spec.length - np.asarray(z, dtype=float))

    return abcd, pref, kernel


# named correlations: (block, row, col) with mode vector v = (a1, a2^dagger)
CORRELATIONS = {
    "a1_a1dag": ("m_aad", 0, 0),
    "a1dag_a1": ("m_ada", 0, 0),
    "a2_a2dag": ("m_ada", 1, 1),
    "a2dag_a2": ("m_aad", 1, 1),
    "a1_a1": ("m_aa", 0, 0),
    "a1dag_a1dag": ("m_adad", 0, 0),
    "a1_a2": ("m_aad", 0, 1),
    "a2dag_a1dag": ("m_aad", 1, 0),
    "a1_a2dag": ("m_aa", 0, 1),
    "a2_a1dag": ("m_adad", 1, 0),
    "a1dag_a2": ("m_adad", 0, 1),
    "a2dag_a1": ("m_aa", 1, 0),
    "a2_a1": ("m_ada", 1, 0),
    "a1dag_a2dag": ("m_ada", 0, 1),
    "a2_a2": ("m_adad", 1, 1),
    "a2dag_a2dag": ("m_aa", 1, 1),
}


@dataclass(frozen=True)
class SecondMomentSpectra:
    """Output-port second moments on a frequency grid.

    Blocks have shape ``(n, 2, 2)``: ``m_aad = <v v^dagger>``,
    ``m_ada = <v_i^dagger v_j>``, ``m_aa = <v_i v_j>`` and
    ``m_adad = <v_i^dagger v_j^dagger>``. Use :meth:`correlation` with a key of
    :data:`CORRELATIONS` to pull out individual field correlations.
    """

    varpi: np.ndarray
    m_aad: np.ndarray
    m_ada: np.ndarray
    m_aa: np.ndarray
    m_adad: np.ndarray

    @property
    def comm1(self) -> np.ndarray:
        return (self.m_aad[..., 0, 0] - self.m_ada[..., 0, 0]).real

    @property
    def comm2(self) -> np.ndarray:
        return (self.m_ada[..., 1, 1] - self.m_aad[..., 1, 1]).real

    def correlation(self, name: str) -> np.ndarray:
        block, i, j = CORRELATIONS[name]
        return getattr(self, block)[..., i, j]

    def max_commutator_deviation(self) -> float:
        return float(max(np.max(np.abs(self.comm1 - 1)), np.max(np.abs(self.comm2 - 1))))


def propagate_moments(
    spec: CouplingSpec,
    forcing: ForcingCovariance | None = None,
    varpi=0.0,
    nln: bool = False,
) -> SecondMomentSpectra:
    """Output second moments for vacuum inputs.

    Parameters
    ----------
    spec : CouplingSpec
    forcing : ForcingCovariance, optional
        Defaults to the macroscopic prescription for ``spec``.
    varpi : array_like
        Frequency samples in rad/s.
    nln : bool
        Drop the Langevin noise contribution and keep only the boundary term.
    """
    varpi = np.atleast_1d(np.asarray(varpi, dtype=float))
    m = coupling_matrix(spec, varpi)
    length = spec.length
    if spec.geometry == FORWARD:
        t = mat2.expm2(m, length)
        p = None
    else:
        t, p = rearrange_backward(mat2.expm2(m, length))

    tc = np.conj(t)
    m_aad = t @ _E1 @ mat2.dagger(t)
    m_ada = tc @ _E2 @ mat2.transpose(t)
    m_aa = np.zeros_like(m_aad)

    if not nln:
        if forcing is None:
            forcing = macro_forcing(spec, varpi)
        x = mat2.exp_moment_integral(m, forcing.c_ff_dag, length, "H")
        y = mat2.exp_moment_integral(np.conj(m), forcing.c_fdag_f, length, "H")
        zz = mat2.exp_moment_integral(m, forcing.c_ff, length, "T")
        if p is not None:
            pc = np.conj(p)
            x = p @ x @ mat2.dagger(p)
            y = pc @ y @ mat2.transpose(p)
            zz = p @ zz @ mat2.transpose(p)
        m_aad = m_aad + x
        m_ada = m_ada + y
        m_aa = m_aa + zz

    m_adad = np.conj(mat2.transpose(m_aa))
    return SecondMomentSpectra(varpi, m_aad, m_ada, m_aa, m_adad)


def classify_symmetry(m, tol: float = 1e-12) -> str | None:
    """Classify ``H = i m`` as ``"PT"``, ``"APT"`` or ``None``.

    PT means ``sx H^* sx = H``, APT means ``sx H^* sx = -H``.
    """
    h = 1j * mat2.as_cmat2(m)
    img = _SX @ np.conj(h) @ _SX
    scale = max(float(np.max(np.abs(h))), 1.0)
    if np.max(np.abs(img - h)) <= tol * scale:
        return "PT"
    if np.max(np.abs(img + h)) <= tol * scale:
        return "APT"
    return None
