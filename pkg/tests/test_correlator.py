import numpy as np
import pytest

from qlangevin.correlator import (
    FrequencyGrid,
    RabiParams,
    analytic_abcd,
    biphoton_wavefunction,
    complex_kappa_shortL_check,
    cross_term,
    default_span,
    fit_rabi,
    glauber_g2,
    macro_source,
    perturbation_params,
    perturbation_wavefunction,
    rabi_analytic,
    smallgain_sinc,
    temporal_observables,
    to_time,
)
from qlangevin.atomsfwm import MHZ, AtomicLevels, DriveParams
from qlangevin.errors import ConfigError, GridUnresolvedError, SingularBoundaryError
from qlangevin.phenomodel import BACKWARD, FORWARD, CouplingSpec, transfer_backward, transfer_forward
from qlangevin.runner.config import preset


def test_grid_layout():
    g = FrequencyGrid(8, 4.0)
    assert np.allclose(g.varpi, [-4, -3, -2, -1, 0, 1, 2, 3])
    assert np.isclose(g.dtau, np.pi / 4)
    assert g.tau[4] == 0
    assert g.doubled().n_points == 16 and g.doubled().span == 4.0
    with pytest.raises(ConfigError):
        FrequencyGrid(12, 1.0)


def test_default_span_rule():
    assert np.isclose(default_span(12.0, 3.0, 0.0), 96.0)
    assert np.isclose(default_span(40.0, 1.0, 0.0), 8 * 400.0)


def test_to_time_matches_direct_sum():
    g = FrequencyGrid(64, 5.0)
    s = np.exp(-g.varpi**2) * (1 + 0.3j * g.varpi)
    direct = (s[None, :] * np.exp(-1j * g.varpi[None, :] * g.tau[:, None])).sum(axis=1) * g.spacing / (2 * np.pi)
    assert np.allclose(to_time(s, g), direct, atol=1e-14)


def test_parseval():
    g = FrequencyGrid(2**12, 40.0)
    s = 1 / (g.varpi - 1.0 + 0.5j)
    psi = to_time(s, g)
    lhs = np.sum(np.abs(psi) ** 2) * g.dtau
    rhs = np.sum(np.abs(s) ** 2) * g.spacing / (2 * np.pi)
    assert abs(lhs - rhs) <= 1e-8 * rhs


def test_lorentzian_transform_is_causal_exponential():
    g = FrequencyGrid(2**14, 400.0)
    s = 1j / (g.varpi + 1j)
    psi = to_time(s, g)
    t = g.tau
    sel = (t > 0.5) & (t < 4)
    assert np.allclose(psi[sel], np.exp(-t[sel]), atol=2e-3)
    assert np.max(np.abs(psi[t < -0.5])) < 2e-3


def test_grid_check_flags_unresolved_spectrum():
    spec = CouplingSpec(kappa=lambda w: 0.3 / (w - 0.2 + 1e-3j), length=1.0)
    with pytest.raises(GridUnresolvedError):
        biphoton_wavefunction(macro_source(spec), FrequencyGrid(64, 2.0), check_grid=True)


def test_grid_check_passes_for_smooth_spectrum():
    spec = CouplingSpec(kappa=lambda w: 0.05 * np.exp(-(w**2)), length=1.0)
    psi = biphoton_wavefunction(macro_source(spec), FrequencyGrid(256, 10.0), check_grid=True)
    assert np.max(np.abs(psi)) > 0


def test_ordering_and_noise_validation():
    src = macro_source(CouplingSpec(kappa=0.1))
    with pytest.raises(ConfigError):
        biphoton_wavefunction(src, FrequencyGrid(8, 1.0), ordering="33")
    with pytest.raises(ConfigError):
        biphoton_wavefunction(src, FrequencyGrid(8, 1.0), noise="half")


def test_g2_without_correlations_is_one():
    big, small = glauber_g2(np.zeros(5), np.zeros(5), 2.0, 3.0)
    assert np.allclose(big, 6.0)
    assert np.allclose(small, 1.0)


def test_real_kappa_has_no_cross_term():
    spec = CouplingSpec(kappa=lambda w: 0.2 / (1 + w**2), alpha1=0.05, alpha2=0.02, length=1.0)
    g = FrequencyGrid(512, 20.0)
    assert np.max(np.abs(cross_term(macro_source(spec), g))) < 1e-14


def test_temporal_observables_shapes():
    spec = CouplingSpec(kappa=lambda w: 0.2 / (1 + w**2), length=1.0)
    g = FrequencyGrid(256, 20.0)
    obs = temporal_observables(macro_source(spec), g)
    assert obs.psi21.shape == obs.tau.shape
    assert obs.r1 > 0 and obs.r2 > 0
    assert np.allclose(obs.G2_21, np.abs(obs.psi21) ** 2 + np.abs(obs.phi) ** 2 + obs.r1 * obs.r2)


specs = [
    CouplingSpec(alpha1=0.3 - 0.1j, alpha2=0.2 + 0.4j, kappa=0.5 + 0.2j, delta_k=0.7, theta=0.3, length=1.3),
    CouplingSpec(alpha1=-0.2, alpha2=0.1j, kappa=0.9, delta_k=-1.1, theta=-1.0, geometry=BACKWARD, length=0.8),
    CouplingSpec(kappa=1e-9, delta_k=0.4, length=2.0),
]


@pytest.mark.parametrize("spec", specs)
def test_analytic_abcd_matches_exponential(spec):
    num = (transfer_backward if spec.geometry == BACKWARD else transfer_forward)(spec)[0]
    assert np.allclose(analytic_abcd(spec), num, atol=1e-13)


def test_analytic_abcd_zero_coupling_limit():
    spec = CouplingSpec(alpha1=0.3, alpha2=0.1, delta_k=0.6, kappa=0.0, length=1.5)
    abcd = analytic_abcd(spec)
    assert np.isclose(abcd[0, 0], np.exp((-0.3 + 0.3j) * 1.5))
    assert np.isclose(abcd[1, 1], np.exp((-0.1 - 0.3j) * 1.5))
    assert np.allclose([abcd[0, 1], abcd[1, 0]], 0)


def test_backward_pole_in_closed_form():
    spec = CouplingSpec(kappa=np.pi / 2 * (1 - 1e-9), geometry=BACKWARD)
    assert np.max(np.abs(analytic_abcd(spec))) > 1e6
    with pytest.raises(SingularBoundaryError):
        transfer_backward(spec.with_(kappa=np.pi / 2))


def test_smallgain_phase_matched_limit():
    # q = 0 here, so the validity warning is expected
    spec = CouplingSpec(kappa=1e-4, length=2.0)
    pp = perturbation_params(spec)
    assert np.isclose(abs(pp.phi_func), 1.0)
    with pytest.warns(UserWarning):
        assert np.isclose(smallgain_sinc(spec), 1j * 1e-4 * 2.0)


def test_smallgain_warns_outside_validity():
    with pytest.warns(UserWarning):
        smallgain_sinc(CouplingSpec(kappa=0.5, alpha1=0.1, length=1.0))


@pytest.mark.parametrize("geometry", [FORWARD, BACKWARD])
@pytest.mark.parametrize("channel2", ["gain", "loss"])
def test_smallgain_matches_exact_pair_amplitude(geometry, channel2):
    spec = CouplingSpec(alpha1=0.4 + 0.2j, alpha2=-0.1 + 0.3j, kappa=1e-4 * np.exp(0.5j), delta_k=1.5, theta=0.4, geometry=geometry, length=1.2)
    abcd = analytic_abcd(spec)
    a, b, c, d = abcd[0, 0], abcd[0, 1], abcd[1, 0], abcd[1, 1]
    exact = b * np.conj(d) if channel2 == "gain" else a * np.conj(c)
    approx = smallgain_sinc(spec, channel2=channel2)
    assert abs(approx - exact) <= 1e-3 * abs(exact)


def test_phase_matched_perturbation_is_plain_transform():
    g = FrequencyGrid(1024, 50.0)
    kap = lambda w: 0.01 / (w + 1j)
    assert np.allclose(perturbation_wavefunction(kap, None, 2.0, g), to_time(2j * kap(g.varpi), g))


def test_perturbation_matches_langevin_group_delay():
    cfg = preset("group_delay")
    g = cfg.grid()
    spec = cfg.spec("forward")
    src = macro_source(spec)
    psi = biphoton_wavefunction(src, g, "21", "NLN")
    pert = perturbation_params(spec, g.varpi, "gain")
    kap = spec.parameters(g.varpi)[2] * np.exp(1j * spec.theta)
    approx = perturbation_wavefunction(kap, pert, spec.length, g)
    assert np.max(np.abs(psi - approx)) <= 0.05 * np.max(np.abs(psi))
    loss = perturbation_params(spec, g.varpi, "loss")
    assert np.max(np.abs(loss.phi_func - pert.phi_func)) > 0.1


LEVELS = AtomicLevels.rb85()
RABI = DriveParams(1.2 * MHZ, 24 * MHZ, 500 * MHZ)


def test_rabi_params_reject_overdamped_drive():
    with pytest.raises(ConfigError):
        RabiParams.from_atoms(LEVELS, DriveParams(1.2 * MHZ, 1 * MHZ, 500 * MHZ), preset("rabi").ensemble)


def test_rabi_analytic_shape():
    rp = RabiParams.from_atoms(LEVELS, RABI, preset("rabi").ensemble)
    psi = rabi_analytic(rp, 0.002)
    period = 2 * np.pi / rp.omega_e
    assert np.all(psi(np.linspace(-1e-6, -1e-9, 5)) == 0)
    assert np.allclose(psi(np.array([period, 2 * period])), 0, atol=1e-12 * np.max(np.abs(psi(np.linspace(0, period, 50)))))
    t0 = 0.25 * period
    assert np.isclose(abs(psi(t0 + period)) / abs(psi(t0)), np.exp(-rp.gamma_e * period))


def test_rabi_analytic_is_transform_of_two_pole_kappa():
    rp = RabiParams.from_atoms(LEVELS, RABI, preset("rabi").ensemble)
    g = FrequencyGrid(2**16, 400 * rp.omega_e)
    psi = perturbation_wavefunction(rp.kappa, None, 0.002, g)
    ref = rabi_analytic(rp, 0.002)(g.tau)
    sel = np.abs(g.tau) > 5 * g.dtau
    assert np.max(np.abs(psi - ref)[sel]) <= 1e-2 * np.max(np.abs(ref))


def test_fit_rabi_recovers_parameters():
    t = np.linspace(-1, 10, 4000)
    psi = np.where(t >= 0, np.exp(-0.5 * t) * np.sin(1.5 * t), 0)
    fit = fit_rabi(t, psi, gamma_guess=0.6, omega_guess=2.8)
    assert np.isclose(fit.omega, 3.0, rtol=1e-6)
    assert np.isclose(fit.decay, 1.0, rtol=1e-6)


@pytest.mark.parametrize(
    "kappa, expected",
    [(1e-3j, 0.0), (1e-3, 1e-3j), (1e-3 * (1 + 0.5j), 1e-3j)],
)
def test_complex_kappa_first_order(kappa, expected):
    spec = CouplingSpec(kappa=kappa, length=1.0)
    rep = complex_kappa_shortL_check(spec, FrequencyGrid(64, 1.0))
    assert np.allclose(rep.first_order, expected)
    assert rep.max_deviation <= 1.0


def test_complex_kappa_check_report():
    spec = CouplingSpec(kappa=lambda w: 5e-3 * np.exp(1j * np.pi * np.tanh(w)) / (1 + w**2), length=1.0)
    rep = complex_kappa_shortL_check(spec, FrequencyGrid(2**10, 20.0))
    assert rep.passed
    assert rep.branch_deviation["zeta>0"] is not None and rep.branch_deviation["zeta<0"] is not None
    assert rep.symmetry_deviation < 1e-12


def test_complex_kappa_check_rejects_loss():
    with pytest.raises(ConfigError):
        complex_kappa_shortL_check(CouplingSpec(kappa=1e-3, alpha1=0.1))
