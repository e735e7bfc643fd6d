import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlangevin.atomsfwm import (
    MHZ,
    AtomicLevels,
    AtomicScenario,
    DriveParams,
    EnsembleParams,
    SteadyState,
    beta_coefficients,
    collective_couplings,
    diffusion_tensor,
    einstein_oracle,
    estimated_density,
    micro_coupling_matrix,
    micro_forcing_covariance,
    micro_forcing_from_tensor,
    steady_state,
    susceptibilities,
    t_of_varpi,
)
from qlangevin.correlator import RabiParams
from qlangevin.errors import ConfigError
from qlangevin.phenomodel import BACKWARD, FORWARD, propagate_moments

LEVELS = AtomicLevels.rb85()
GROUP_DELAY = DriveParams(1.2 * MHZ, 12 * MHZ, 500 * MHZ)
RABI = DriveParams(1.2 * MHZ, 24 * MHZ, 500 * MHZ)
ENSEMBLE = EnsembleParams(80.0, 0.02, 127.0)


def test_levels_totals_and_validation():
    assert np.isclose(LEVELS.gamma3, 6 * MHZ)
    assert np.isclose(LEVELS.gamma4, LEVELS.gamma41 + LEVELS.gamma42)
    with pytest.raises(ConfigError):
        AtomicLevels(*([-1.0] + [1.0] * 9))
    with pytest.raises(ConfigError):
        EnsembleParams(0.0, 0.02)


def test_ground_state_warning():
    with pytest.warns(UserWarning):
        assert not DriveParams(1 * MHZ, 1 * MHZ, 2 * MHZ).check_ground_state(LEVELS)
    assert GROUP_DELAY.check_ground_state(LEVELS)


def test_undriven_steady_state():
    s = steady_state(LEVELS, DriveParams(0.0, 12 * MHZ, 500 * MHZ))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1.0
    assert np.allclose(s.sigma, expected, atol=1e-12)


def test_excited_population_matches_perturbation():
    s = steady_state(LEVELS, GROUP_DELAY)
    oracle = abs(GROUP_DELAY.omega_p / (2 * GROUP_DELAY.delta_p)) ** 2
    assert abs(s[4, 4].real / oracle - 1) < 0.1


drives = st.builds(
    DriveParams,
    st.floats(0.0, 20.0).map(lambda x: x * MHZ),
    st.floats(0.5, 40.0).map(lambda x: x * MHZ),
    st.floats(-800.0, 800.0).map(lambda x: x * MHZ),
)


@settings(max_examples=50, deadline=None)
@given(drives)
def test_steady_state_is_a_density_matrix(drive):
    s = steady_state(LEVELS, drive).sigma
    assert np.isclose(np.trace(s).real, 1.0, atol=1e-12)
    assert np.allclose(s, s.conj().T)
    d = np.diag(s).real
    assert np.all(d >= -1e-12) and np.all(d <= 1 + 1e-12)


def test_beta_examples():
    w = np.array([0.0, 3 * MHZ])
    b = beta_coefficients(w, LEVELS, GROUP_DELAY)
    assert np.allclose(b.beta_s[(4, 2)], -1j / (GROUP_DELAY.delta_p - 1j * LEVELS.gamma24))
    off = DriveParams(1.2 * MHZ, 0.0, 500 * MHZ)
    assert np.isclose(beta_coefficients(0.0, LEVELS, off).beta_as[(1, 3)], 1 / LEVELS.gamma13)
    assert b.vector("as").shape == (2, 4)


def test_t_zeros_at_rabi_poles():
    rp = RabiParams.from_atoms(LEVELS, RABI, ENSEMBLE)
    oc, g13, g12 = abs(RABI.omega_c), LEVELS.gamma13, LEVELS.gamma12
    for sign in (1, -1):
        z = sign * rp.omega_e / 2 - 1j * rp.gamma_e
        t = oc**2 - 4 * (z + 1j * g13) * (z + 1j * g12)
        assert abs(t) <= 1e-12 * oc**2
    w = np.linspace(-50, 50, 11) * MHZ
    assert np.allclose(t_of_varpi(w, LEVELS, RABI), oc**2 - 4 * (w + 1j * g13) * (w + 1j * g12), rtol=0, atol=0)


def test_kappa_two_pole_form():
    w = np.random.default_rng(0).uniform(-100, 100, 50) * MHZ
    sus = susceptibilities(w, LEVELS, RABI, ENSEMBLE)
    rp = RabiParams.from_atoms(LEVELS, RABI, ENSEMBLE)
    two_pole = rp.kappa(w)
    assert np.max(np.abs(sus.kappa - two_pole)) <= 1e-12 * np.max(np.abs(sus.kappa))


def test_kappa_phases():
    w = np.linspace(-40, 40, 9) * MHZ
    sus = susceptibilities(w, LEVELS, GROUP_DELAY, ENSEMBLE)
    assert np.allclose(sus.kappa_as, sus.kappa * np.exp(1j * sus.theta), rtol=1e-12)
    assert np.allclose(sus.kappa_s, sus.kappa * np.exp(-1j * sus.theta), rtol=1e-12)
    assert np.allclose(sus.kappa_as * sus.kappa_s, sus.kappa**2, rtol=1e-12)


def test_perfect_eit_and_od_calibration():
    lv = LEVELS.__class__(**{**LEVELS.__dict__, "gamma12": 0.0})
    assert np.isclose(susceptibilities(0.0, lv, GROUP_DELAY, ENSEMBLE).chi_as, 0.0)
    off = DriveParams(1.2 * MHZ, 0.0, 500 * MHZ)
    a = susceptibilities(0.0, LEVELS, off, ENSEMBLE).alpha_as
    assert np.isclose(2 * a.real * ENSEMBLE.length, ENSEMBLE.od)


def test_density_is_a_loose_consistency_figure():
    n = estimated_density(LEVELS, ENSEMBLE)
    assert 1e16 < n < 1e17
    k_as, k_s = collective_couplings(LEVELS, ENSEMBLE)
    assert 0 < k_s / k_as < 2


def test_diffusion_ground_state_examples():
    d = diffusion_tensor(SteadyState.ground(), LEVELS)
    assert np.isclose(d[(1, 2), (2, 1)], 2 * LEVELS.gamma12)
    assert np.isclose(d[(1, 3), (3, 1)], LEVELS.gamma3)
    assert d[(1, 2), (2, 4)] == 0
    assert np.allclose(d.normal_block(), 0)


@pytest.mark.parametrize("drive", [GROUP_DELAY, RABI])
@pytest.mark.parametrize("state", ["full", "ground"])
def test_einstein_relation(drive, state):
    ss = steady_state(LEVELS, drive) if state == "full" else SteadyState.ground()
    closed = diffusion_tensor(ss, LEVELS)
    oracle = einstein_oracle(ss, LEVELS, drive)
    for c, o in ((closed.anti_normal_block(), oracle.anti_normal_block()), (closed.normal_block(), oracle.normal_block())):
        assert np.max(np.abs(c - o)) <= 1e-12 * np.max(np.abs(oracle.anti_normal_block()))


def test_einstein_named_entries():
    ss = steady_state(LEVELS, GROUP_DELAY)
    o = einstein_oracle(ss, LEVELS, GROUP_DELAY)
    expected = 2 * LEVELS.gamma12 * ss[1, 1] + LEVELS.gamma31 * ss[3, 3] + LEVELS.gamma41 * ss[4, 4]
    assert np.isclose(o[(1, 2), (2, 1)], expected, rtol=1e-10)
    assert np.isclose(o[(3, 4), (4, 3)], LEVELS.gamma4 * ss[3, 3], rtol=1e-10, atol=1e-12 * LEVELS.gamma4)
    assert np.allclose(einstein_oracle(SteadyState.ground(), LEVELS, GROUP_DELAY).normal_block(), 0)


@pytest.mark.parametrize(
    "geometry, m21_sign, m22_sign",
    [(BACKWARD, 1, 1), (FORWARD, -1, -1)],
)
def test_micro_coupling_matrix(geometry, m21_sign, m22_sign):
    scen = AtomicScenario(LEVELS, GROUP_DELAY, ENSEMBLE)
    w = np.array([0.0, 2 * MHZ])
    m = micro_coupling_matrix(w, scen, geometry)
    sus = scen.susceptibilities(w)
    assert np.allclose(m[:, 1, 0], m21_sign * 1j * sus.kappa)
    assert np.allclose(m[:, 1, 1], m22_sign * np.conj(sus.alpha_s) - 0.5j * ENSEMBLE.delta_k)


def test_fluctuation_dissipation_limit():
    off = DriveParams(1.2 * MHZ, 0.0, 500 * MHZ)
    scen = AtomicScenario(LEVELS, off, ENSEMBLE, state="ground")
    cov = micro_forcing_covariance(np.array([0.0]), scen)
    alpha = scen.susceptibilities(0.0).alpha_as
    assert np.isclose(cov.c_ff_dag[0, 0, 0], 2 * alpha.real)


def test_ground_state_normal_block_vanishes():
    scen = AtomicScenario(LEVELS, GROUP_DELAY, ENSEMBLE, state="ground")
    cov = micro_forcing_covariance(np.linspace(-20, 20, 7) * MHZ, scen)
    assert np.allclose(cov.c_fdag_f, 0)
    assert np.allclose(cov.c_ff, 0)


def test_same_block_from_oracle_is_zero():
    scen = AtomicScenario(LEVELS, GROUP_DELAY, ENSEMBLE)
    dt = einstein_oracle(scen.steady(), LEVELS, GROUP_DELAY)
    w = np.linspace(-20, 20, 7) * MHZ
    full = micro_forcing_from_tensor(w, scen, dt)
    assert np.allclose(full.c_ff, 0)
    assert full.max_abs_difference(micro_forcing_covariance(w, scen)) <= 1e-12 * np.max(np.abs(full.c_ff_dag))


@pytest.mark.parametrize("drive", [GROUP_DELAY, RABI])
@pytest.mark.parametrize("geometry", [BACKWARD, FORWARD])
def test_micro_commutators(drive, geometry):
    scen = AtomicScenario(LEVELS, drive, ENSEMBLE if drive is GROUP_DELAY else EnsembleParams(0.1, 0.002, 127.0))
    w = np.linspace(-100, 100, 401) * MHZ
    sp = propagate_moments(scen.coupling_spec(geometry), micro_forcing_covariance(w, scen, geometry), w)
    assert sp.max_commutator_deviation() <= 1e-5


def test_unknown_state_rejected():
    with pytest.raises(ConfigError):
        AtomicScenario(LEVELS, GROUP_DELAY, ENSEMBLE, state="thermal").steady()
