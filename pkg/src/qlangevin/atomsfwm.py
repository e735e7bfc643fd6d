"""Microscopic double-Lambda four-level model of spontaneous four-wave mixing.

Levels are numbered 1..4 as in the usual Rb-85 scheme: ``|1>``, ``|2>`` are
hyperfine ground states, ``|3>`` (D1) couples to ``|2>`` through the coupling
laser and emits anti-Stokes photons on 3->1, ``|4>`` (D2) is reached from
``|1>`` by the detuned pump and emits Stokes photons on 4->2.

All rates are angular (rad/s), lengths are in metres. The collective
coupling constants ``K_as = n |mu13|^2 omega_as / (2 c eps0 hbar)`` and the
Stokes analogue are fixed by the optical depth, so no absolute dipole
moment or beam area enters any observable.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import constants as sc

from . import mat2
from .errors import ConfigError, SingularDriftError
from .phenomodel import BACKWARD, FORWARD, CouplingSpec, ForcingCovariance, coupling_matrix

MHZ = 2 * np.pi * 1e6

D1_WAVELENGTH = 794.979e-9
D2_WAVELENGTH = 780.241e-9

# index order used for noise-operator vectors and diffusion blocks
NOISE_PAIRS = ((1, 2), (4, 2), (1, 3), (4, 3))


def _idx(j: int, k: int) -> int:
    return 4 * (j - 1) + (k - 1)


@dataclass(frozen=True)
class AtomicLevels:
    """Decay, dephasing and transition frequencies of the four-level atom."""

    gamma31: float
    gamma32: float
    gamma41: float
    gamma42: float
    gamma12: float
    gamma13: float
    gamma23: float
    gamma14: float
    gamma24: float
    gamma34: float
    omega13: float = 2 * np.pi * sc.c / D1_WAVELENGTH
    omega24: float = 2 * np.pi * sc.c / D2_WAVELENGTH

    def __post_init__(self):
        rates = [getattr(self, n) for n in self.__dataclass_fields__ if n.startswith("gamma")]
        if min(rates) < 0:
            raise ConfigError("decay and dephasing rates must be non-negative")

    @property
    def gamma3(self) -> float:
        return self.gamma31 + self.gamma32

    @property
    def gamma4(self) -> float:
        return self.gamma41 + self.gamma42

    def dephasing(self, j: int, k: int) -> float:
        a, b = sorted((j, k))
        return getattr(self, f"gamma{a}{b}")

    @classmethod
    def rb85(cls, gamma3=6.0 * MHZ, gamma4=6.0 * MHZ, gamma12=0.03 * MHZ, gamma_opt=3.0 * MHZ):
        """Laser-cooled Rb-85 rates; ``gamma34`` follows the radiative limit."""
        return cls(
            gamma31=5 / 9 * gamma3,
            gamma32=4 / 9 * gamma3,
            gamma41=4 / 9 * gamma4,
            gamma42=5 / 9 * gamma4,
            gamma12=gamma12,
            gamma13=gamma_opt,
            gamma23=gamma_opt,
            gamma14=gamma_opt,
            gamma24=gamma_opt,
            gamma34=0.5 * (gamma3 + gamma4),
        )


@dataclass(frozen=True)
class DriveParams:
    """Classical pump and coupling fields.

    ``omega_p`` and ``omega_c`` are complex Rabi frequencies, ``delta_p`` is the
    pump detuning from the 1->4 transition (all rad/s).
    """

    omega_p: complex
    omega_c: complex
    delta_p: float

    def check_ground_state(self, levels: AtomicLevels, factor: float = 10.0) -> bool:
        ok = abs(self.delta_p) >= factor * max(abs(self.omega_p), levels.gamma4)
        if not ok:
            warnings.warn(
                "pump detuning is not large compared with the pump Rabi frequency and "
                "the 4-level linewidth; the ground-state expansion may be inaccurate",
                stacklevel=2,
            )
        return ok


@dataclass(frozen=True)
class EnsembleParams:
    """Atomic medium: optical depth on 1->3, length (m) and vacuum mismatch (rad/m)."""

    od: float
    length: float
    delta_k: float = 0.0

    def __post_init__(self):
        if not (self.od > 0 and self.length > 0):
            raise ConfigError("od and length must be positive")


@dataclass(frozen=True)
class SteadyState:
    """Expectation values ``sigma[j-1, k-1] = <sigma_jk>``."""

    sigma: np.ndarray

    def __getitem__(self, jk: tuple[int, int]) -> complex:
        j, k = jk
        return self.sigma[j - 1, k - 1]

    @classmethod
    def ground(cls) -> "SteadyState":
        s = np.zeros((4, 4), dtype=complex)
        s[0, 0] = 1.0
        return cls(s)


def hamiltonian_matrix(drive: DriveParams, varpi: float = 0.0) -> np.ndarray:
    """Semiclassical drift matrix ``O`` with the quantum fields set to zero."""
    o = np.zeros((4, 4), dtype=complex)
    o[0, 3] = drive.omega_p / 2
    o[3, 0] = np.conj(drive.omega_p) / 2
    o[1, 2] = drive.omega_c / 2
    o[2, 1] = np.conj(drive.omega_c) / 2
    o[1, 1] = varpi
    o[2, 2] = varpi
    o[3, 3] = drive.delta_p
    return -o


def drift_superoperator(levels: AtomicLevels, drive: DriveParams, varpi: float = 0.0) -> np.ndarray:
    """16x16 matrix ``L`` with ``A_jk = sum_ab L[jk, ab] sigma_ab``.

    Built from ``dS/dt = i (O S - S O) + G(S)``.
    """
    o = hamiltonian_matrix(drive, varpi)
    lop = np.zeros((16, 16), dtype=complex)
    for j in range(1, 5):
        for k in range(1, 5):
            row = _idx(j, k)
            for a in range(1, 5):
                # (O S)_jk = sum_a O_ja S_ak ; (S O)_jk = sum_a S_ja O_ak
                lop[row, _idx(a, k)] += 1j * o[j - 1, a - 1]
                lop[row, _idx(j, a)] -= 1j * o[a - 1, k - 1]
            if j != k:
                lop[row, row] -= levels.dephasing(j, k)
    lop[_idx(1, 1), _idx(3, 3)] += levels.gamma31
    lop[_idx(1, 1), _idx(4, 4)] += levels.gamma41
    lop[_idx(2, 2), _idx(3, 3)] += levels.gamma32
    lop[_idx(2, 2), _idx(4, 4)] += levels.gamma42
    lop[_idx(3, 3), _idx(3, 3)] -= levels.gamma3
    lop[_idx(4, 4), _idx(4, 4)] -= levels.gamma4
    return lop


def steady_state(levels: AtomicLevels, drive: DriveParams) -> SteadyState:
    """Exact steady state of the driven four-level Bloch equations.

    The ``varpi`` terms shift levels 2 and 3 together and no classical field
    links the {1, 4} and {2, 3} manifolds, so the solution does not depend on
    ``varpi`` and is computed at ``varpi = 0``. One population
    equation is replaced by the trace condition.
    """
    lop = drift_superoperator(levels, drive, 0.0)
    rhs = np.zeros(16, dtype=complex)
    lop[_idx(1, 1), :] = 0.0
    for a in range(1, 5):
        lop[_idx(1, 1), _idx(a, a)] = 1.0
    rhs[_idx(1, 1)] = 1.0
    if np.linalg.matrix_rank(lop) < 16:
        raise SingularDriftError("steady-state system is rank deficient")
    sol = np.linalg.solve(lop, rhs).reshape(4, 4)
    sol = 0.5 * (sol + sol.conj().T)
    return SteadyState(sol)


@dataclass(frozen=True)
class DiffusionTensor:
    """Diffusion coefficients ``D[jk, j'k']`` stored as a 16x16 array.

    Entries outside the computed blocks are ``nan`` when the tensor comes
    from the closed forms.
    """

    full: np.ndarray

    def __getitem__(self, key) -> complex:
        (j, k), (jp, kp) = key
        return self.full[_idx(j, k), _idx(jp, kp)]

    def block(self, rows, cols) -> np.ndarray:
        r = [_idx(*p) for p in rows]
        c = [_idx(*p) for p in cols]
        return self.full[np.ix_(r, c)]

    def anti_normal_block(self) -> np.ndarray:
        """``<f_mu_nu f_mu'nu'^dagger>`` block, rows ``NOISE_PAIRS``, cols reversed pairs."""
        return self.block(NOISE_PAIRS, [(b, a) for a, b in NOISE_PAIRS])

    def normal_block(self) -> np.ndarray:
        """``<f_mu_nu^dagger f_mu'nu'>`` block, rows reversed pairs, cols ``NOISE_PAIRS``."""
        return self.block([(b, a) for a, b in NOISE_PAIRS], NOISE_PAIRS)

    def same_block(self) -> np.ndarray:
        return self.block(NOISE_PAIRS, NOISE_PAIRS)


def diffusion_tensor(state: SteadyState, levels: AtomicLevels) -> DiffusionTensor:
    """Closed-form diffusion coefficients for the two SFWM noise blocks."""
    s = state
    g12, g3, g4 = levels.gamma12, levels.gamma3, levels.gamma4
    g31, g41, g32, g42 = levels.gamma31, levels.gamma41, levels.gamma32, levels.gamma42
    d = np.full((16, 16), np.nan, dtype=complex)

    def put(a, b, value):
        d[_idx(*a), _idx(*b)] = value

    rows61 = NOISE_PAIRS
    cols61 = ((2, 1), (2, 4), (3, 1), (3, 4))
    for a in rows61:
        for b in cols61:
            put(a, b, 0.0)
    put((1, 2), (2, 1), 2 * g12 * s[1, 1] + g31 * s[3, 3] + g41 * s[4, 4])
    put((1, 2), (2, 4), g12 * s[1, 4])
    put((4, 2), (2, 1), g12 * s[4, 1])
    put((1, 3), (3, 1), g3 * s[1, 1] + g31 * s[3, 3] + g41 * s[4, 4])
    put((1, 3), (3, 4), g3 * s[1, 4])
    put((4, 3), (3, 1), g3 * s[4, 1])
    put((4, 3), (3, 4), g3 * s[4, 4])

    for a in cols61:
        for b in rows61:
            put(a, b, 0.0)
    put((2, 1), (1, 2), 2 * g12 * s[2, 2] + g32 * s[3, 3] + g42 * s[4, 4])
    put((2, 1), (1, 3), g12 * s[2, 3])
    put((2, 4), (4, 2), g4 * s[2, 2] + g32 * s[3, 3] + g42 * s[4, 4])
    put((2, 4), (4, 3), g4 * s[2, 3])
    put((3, 1), (1, 2), g12 * s[3, 2])
    put((3, 4), (4, 2), g4 * s[3, 2])
    put((3, 4), (4, 3), g4 * s[3, 3])
    return DiffusionTensor(d)


def einstein_oracle(state: SteadyState, levels: AtomicLevels, drive: DriveParams) -> DiffusionTensor:
    """Diffusion tensor from the generalized Einstein relation.

    ``D[jk, j'k'] = d/dt<s_jk s_j'k'> - <A_jk s_j'k'> - <s_jk A_j'k'>`` with the
    operator product rule ``s_ab s_cd = delta_bc s_ad``. Every entry of the
    16x16 tensor is evaluated.
    """
    lop = drift_superoperator(levels, drive, 0.0)
    sig = state.sigma
    a_exp = (lop @ sig.reshape(16)).reshape(4, 4)  # <A_jk>
    lop4 = lop.reshape(4, 4, 4, 4)  # [j, k, a, b]
    # <A_jk s_j'k'> = sum_a L[jk, a j'] <s_a k'>
    left = np.einsum("jkap,aq->jkpq", lop4, sig)  # indices: j k j' k'
    # <s_jk A_j'k'> = sum_b L[j'k', k b] <s_j b>
    right = np.einsum("pqkb,jb->jkpq", lop4, sig)
    eye = np.eye(4)
    first = np.einsum("kp,jq->jkpq", eye, a_exp)
    d = first - left - right
    return DiffusionTensor(d.reshape(16, 16))


def t_of_varpi(varpi, levels: AtomicLevels, drive: DriveParams) -> np.ndarray:
    varpi = np.asarray(varpi, dtype=float)
    return abs(drive.omega_c) ** 2 - 4 * (varpi + 1j * levels.gamma13) * (varpi + 1j * levels.gamma12)


@dataclass(frozen=True)
class BetaCoefficients:
    """Ground-state noise expansion coefficients.

    ``beta_as`` and ``beta_s`` map a level pair in :data:`NOISE_PAIRS` to a
    complex array over the frequency grid.
    """

    beta_as: dict
    beta_s: dict
    t_of_varpi: np.ndarray

    def vector(self, which: str) -> np.ndarray:
        src = self.beta_as if which == "as" else self.beta_s
        return np.stack([src[p] for p in NOISE_PAIRS], axis=-1)


def beta_coefficients(varpi, levels: AtomicLevels, drive: DriveParams) -> BetaCoefficients:
    varpi = np.asarray(varpi, dtype=float)
    t = t_of_varpi(varpi, levels, drive)
    oc, op, dp = drive.omega_c, drive.omega_p, drive.delta_p
    d24 = dp - 1j * levels.gamma24
    d34 = dp - 1j * levels.gamma34
    w12 = varpi + 1j * levels.gamma12
    w13 = varpi + 1j * levels.gamma13
    beta_as = {
        (1, 2): 2j * oc / t,
        (1, 3): -4j * w12 / t,
        (4, 2): -1j * oc * op / (t * d24),
        (4, 3): 2j * op * w12 / (t * d34),
    }
    one = np.ones_like(t)
    beta_s = {
        (1, 2): 2j * w13 * np.conj(op) / (t * d24),
        (1, 3): -1j * np.conj(op) * np.conj(oc) / (t * d24),
        (4, 2): -1j / d24 * one,
        (4, 3): -1j * np.conj(oc) / (2 * d24 * d34) * one,
    }
    return BetaCoefficients(beta_as, beta_s, t)


def collective_couplings(levels: AtomicLevels, ensemble: EnsembleParams) -> tuple[float, float]:
    """``(K_as, K_s)`` in rad/(s m) calibrated from the optical depth.

    With the coupling field off the resonant anti-Stokes attenuation is
    ``alpha_as(0) = K_as / gamma13``, so ``2 alpha_as L = OD`` fixes ``K_as``.
    ``K_s`` follows from the Weisskopf-Wigner dipole ratio
    ``|mu24|^2/|mu13|^2 = (G42/G31) (w13/w24)^3`` and ``w_s/w_as = w24/w13``.
    """
    k_as = ensemble.od * levels.gamma13 / (2 * ensemble.length)
    k_s = k_as * (levels.gamma42 / levels.gamma31) * (levels.omega13 / levels.omega24) ** 2
    return k_as, k_s


def estimated_density(levels: AtomicLevels, ensemble: EnsembleParams) -> float:
    """Atom density implied by ``K_as`` and a radiative-limit D1 dipole.

    Only a consistency figure; no observable depends on it.
    """
    k_as, _ = collective_couplings(levels, ensemble)
    w = levels.omega13
    mu2 = 3 * np.pi * sc.epsilon_0 * sc.hbar * sc.c**3 * levels.gamma31 / w**3
    return k_as * 2 * sc.c * sc.epsilon_0 * sc.hbar / (mu2 * w)


@dataclass(frozen=True)
class Susceptibilities:
    """Linear and nonlinear optical response on a frequency grid.

    ``chi3_as`` and ``chi3_s`` hold the products ``chi3 E_p E_c`` (and the
    conjugate-field analogue), the combination that enters the coupling.
    """

    chi_as: np.ndarray
    chi_s: np.ndarray
    chi3_as: np.ndarray
    chi3_s: np.ndarray
    alpha_as: np.ndarray
    alpha_s: np.ndarray
    kappa_as: np.ndarray
    kappa_s: np.ndarray
    kappa: np.ndarray
    theta: float


def _pump_factor(drive: DriveParams, levels: AtomicLevels) -> complex:
    return drive.omega_p * drive.omega_c / (drive.delta_p + 1j * levels.gamma14)


def susceptibilities(varpi, levels: AtomicLevels, drive: DriveParams, ensemble: EnsembleParams) -> Susceptibilities:
    varpi = np.asarray(varpi, dtype=float)
    t = t_of_varpi(varpi, levels, drive)
    k_as, k_s = collective_couplings(levels, ensemble)
    w_as, w_s = levels.omega13, levels.omega24
    x = _pump_factor(drive, levels)
    theta = float(np.angle(x))
    pop = abs(drive.omega_p) ** 2 / (drive.delta_p**2 + levels.gamma14**2)

    alpha_as = -4j * k_as * (varpi + 1j * levels.gamma12) / t
    alpha_s = -1j * k_s * (varpi - 1j * levels.gamma13) / np.conj(t) * pop
    chi_as = 1j * (2 * sc.c / w_as) * alpha_as
    chi_s = 1j * (2 * sc.c / w_s) * alpha_s
    gk = np.sqrt(k_as * k_s)
    kappa = gk * abs(x) / t
    kappa_as = gk * x / t
    kappa_s = gk * np.conj(x) / t
    pref = 2 * sc.c / np.sqrt(w_as * w_s)
    return Susceptibilities(
        chi_as=chi_as,
        chi_s=chi_s,
        chi3_as=pref * kappa_as,
        chi3_s=np.conj(pref * kappa_s),
        alpha_as=alpha_as,
        alpha_s=alpha_s,
        kappa_as=kappa_as,
        kappa_s=kappa_s,
        kappa=kappa,
        theta=theta,
    )


@dataclass(frozen=True)
class AtomicScenario:
    """Bundle of the three parameter groups plus the steady state in use.

    ``state`` selects the expectations that feed the diffusion tensor:
    ``"full"`` (exact Bloch steady state) or ``"ground"`` (all population in
    ``|1>``).
    """

    levels: AtomicLevels
    drive: DriveParams
    ensemble: EnsembleParams
    state: str = "full"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def steady(self) -> SteadyState:
        if "ss" not in self._cache:
            if self.state == "ground":
                self._cache["ss"] = SteadyState.ground()
            elif self.state == "full":
                self._cache["ss"] = steady_state(self.levels, self.drive)
            else:
                raise ConfigError(f"unknown steady-state choice {self.state!r}")
        return self._cache["ss"]

    def susceptibilities(self, varpi) -> Susceptibilities:
        return susceptibilities(varpi, self.levels, self.drive, self.ensemble)

    def coupling_spec(self, geometry: str = BACKWARD) -> CouplingSpec:
        """Macroscopic description (anti-Stokes = mode 1, Stokes = mode 2)."""
        return CouplingSpec(
            alpha1=lambda w: self.susceptibilities(w).alpha_as,
            alpha2=lambda w: self.susceptibilities(w).alpha_s,
            delta_k=self.ensemble.delta_k,
            kappa=lambda w: self.susceptibilities(w).kappa,
            theta=0.0,
            geometry=geometry,
            length=self.ensemble.length,
        )


def micro_coupling_matrix(varpi, scenario: AtomicScenario, geometry: str = BACKWARD) -> np.ndarray:
    return coupling_matrix(scenario.coupling_spec(geometry), varpi)


def micro_forcing_covariance(varpi, scenario: AtomicScenario, geometry: str = BACKWARD) -> ForcingCovariance:
    """Forcing covariance of ``(F_as, -+F_s^dagger)`` from atomic noise.

    Each component is ``i sqrt(K) sum beta_mu_nu f_mu_nu`` with a gauge phase
    ``e^{-+i theta/2}``; the Stokes component changes sign between the
    backward (``-F_s^dagger``) and forward (``+F_s^dagger``) equations.
    """
    if geometry not in (FORWARD, BACKWARD):
        raise ConfigError(f"unknown geometry {geometry!r}")
    levels, drive = scenario.levels, scenario.drive
    beta = beta_coefficients(varpi, levels, drive)
    dt = diffusion_tensor(scenario.steady(), levels)
    k_as, k_s = collective_couplings(levels, scenario.ensemble)
    theta = float(np.angle(_pump_factor(drive, levels)))
    sign = 1.0 if geometry == BACKWARD else -1.0

    c1 = 1j * np.sqrt(k_as) * np.exp(-0.5j * theta) * beta.vector("as")
    c2 = sign * 1j * np.sqrt(k_s) * np.exp(0.5j * theta) * beta.vector("s")
    c = np.stack([c1, c2], axis=-2)  # (..., 2, 4)
    d61 = dt.anti_normal_block()
    d62 = dt.normal_block()
    c_ff_dag = c @ d61 @ mat2.dagger(c)
    c_fdag_f = np.conj(c) @ d62 @ mat2.transpose(c)
    # <f_mu_nu f_mu'nu'> vanishes identically for mu, mu' in {1,4} and nu, nu' in {2,3}
    c_ff = np.zeros_like(c_ff_dag)
    return ForcingCovariance(c_ff_dag, c_fdag_f, c_ff)


def micro_forcing_from_tensor(varpi, scenario: AtomicScenario, dt: DiffusionTensor, geometry: str = BACKWARD) -> ForcingCovariance:
    """Same as :func:`micro_forcing_covariance` but with a supplied tensor,
    including the ``<F F>`` block from ``dt.same_block()``."""
    levels, drive = scenario.levels, scenario.drive
    beta = beta_coefficients(varpi, levels, drive)
    k_as, k_s = collective_couplings(levels, scenario.ensemble)
    theta = float(np.angle(_pump_factor(drive, levels)))
    sign = 1.0 if geometry == BACKWARD else -1.0
    c1 = 1j * np.sqrt(k_as) * np.exp(-0.5j * theta) * beta.vector("as")
    c2 = sign * 1j * np.sqrt(k_s) * np.exp(0.5j * theta) * beta.vector("s")
    c = np.stack([c1, c2], axis=-2)
    return ForcingCovariance(
        c @ dt.anti_normal_block() @ mat2.dagger(c),
        np.conj(c) @ dt.normal_block() @ mat2.transpose(c),
        c @ dt.same_block() @ mat2.transpose(c),
    )
