import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlangevin import mat2
from qlangevin.errors import ConfigError, SingularBoundaryError
from qlangevin.phenomodel import (
    BACKWARD,
    CORRELATIONS,
    FORWARD,
    CouplingSpec,
    NoiseMatrices,
    equivalent_noise_variants,
    backward_sqrt_form,
    classify_symmetry,
    coupling_matrix,
    forcing_covariance_macro,
    macro_forcing,
    noise_matrices,
    propagate_moments,
    rearrange_backward,
    transfer_backward,
    transfer_forward,
)


def test_spec_validation():
    with pytest.raises(ConfigError):
        CouplingSpec(length=0.0)
    with pytest.raises(ConfigError):
        CouplingSpec(theta=4.0)
    with pytest.raises(ConfigError):
        CouplingSpec(geometry="sideways")


@pytest.mark.parametrize(
    "geometry, theta, expected",
    [
        (FORWARD, 0.0, [[0, 0.7j], [-0.7j, 0]]),
        (BACKWARD, 0.0, [[0, 0.7j], [0.7j, 0]]),
        (FORWARD, np.pi / 2, [[0, -0.7], [-0.7, 0]]),
    ],
)
def test_coupling_matrix_examples(geometry, theta, expected):
    spec = CouplingSpec(kappa=0.7, theta=theta, geometry=geometry)
    assert np.allclose(coupling_matrix(spec), expected)


def test_callable_parameters_follow_grid():
    spec = CouplingSpec(alpha1=lambda w: 0.1 * w, kappa=lambda w: w**2)
    w = np.array([0.0, 1.0, 2.0])
    m = coupling_matrix(spec, w)
    assert m.shape == (3, 2, 2)
    assert np.allclose(m[:, 0, 0], -0.1 * w)
    assert np.allclose(m[:, 0, 1], 1j * w**2)


@pytest.mark.parametrize(
    "spec, n_r, n_i",
    [
        (CouplingSpec(alpha1=0.5, alpha2=0.18, kappa=0.3), np.diag([1.0, 0.6]), np.zeros((2, 2))),
        (CouplingSpec(alpha1=0.5, alpha2=-0.5), np.diag([1.0, 0.0]), np.diag([0.0, 1.0])),
        (CouplingSpec(alpha1=0.5, alpha2=0.18, kappa=0.3, geometry=BACKWARD), np.diag([1.0, -0.6]), np.zeros((2, 2))),
    ],
)
def test_noise_matrix_special_cases(spec, n_r, n_i):
    nm = noise_matrices(spec)
    assert np.allclose(nm.n_r, n_r)
    assert np.allclose(nm.n_i, n_i)


def test_loss_only_covariance():
    spec = CouplingSpec(alpha1=0.5, alpha2=0.18)
    cov = macro_forcing(spec)
    assert np.allclose(cov.c_ff_dag, np.diag([1.0, 0.0]))
    assert np.allclose(cov.c_fdag_f, np.diag([0.0, 0.36]))
    assert np.allclose(cov.c_ff, 0)


def test_zero_noise_matrix_gives_zero_covariance():
    cov = forcing_covariance_macro(NoiseMatrices(np.zeros((2, 2)), np.zeros((2, 2))))
    for block in (cov.c_ff_dag, cov.c_fdag_f, cov.c_ff, cov.c_fdag_fdag):
        assert np.allclose(block, 0)


def _case3_split_form(zeta):
    base = np.array([[1.0, 1.0], [-1.0, 1.0]])
    if zeta > 0:
        return NoiseMatrices(np.sqrt(zeta) * base, np.zeros((2, 2)))
    return NoiseMatrices(np.zeros((2, 2)), np.sqrt(-zeta) * base)


@pytest.mark.parametrize("zeta", [1.0, -1.0, 0.37, -2.5])
def test_case3_branch_equivalence(zeta):
    spec = CouplingSpec(kappa=0.8 + 1j * zeta)
    ours = macro_forcing(spec)
    split = forcing_covariance_macro(_case3_split_form(zeta))
    assert ours.max_abs_difference(split) <= 1e-12


def test_equivalent_variants_agree():
    spec = CouplingSpec(alpha1=0.4 - 0.2j, alpha2=-0.1 + 0.3j, kappa=0.6 * np.exp(0.4j), delta_k=0.5, geometry=BACKWARD)
    nm = noise_matrices(spec)
    ref = forcing_covariance_macro(nm)
    variants = equivalent_noise_variants(nm) + [backward_sqrt_form(spec)]
    assert len(variants) == 5
    for v in variants:
        assert forcing_covariance_macro(v).max_abs_difference(ref) <= 1e-12


def test_backward_sqrt_form_is_column_flip():
    spec = CouplingSpec(alpha1=0.3, alpha2=0.1 + 0.2j, kappa=0.5 - 0.2j, geometry=BACKWARD)
    assert np.allclose(backward_sqrt_form(spec).n, noise_matrices(spec).n @ np.diag([1, -1]))


def test_rearrange_backward_example():
    abcd, pref = rearrange_backward(np.array([[2.0, 1.0], [1.0, 2.0]], dtype=complex))
    assert np.allclose(abcd, [[1.5, 0.5], [-0.5, 0.5]])
    assert np.allclose(pref, [[1.0, -0.5], [0.0, -0.5]])


def test_backward_decoupled():
    spec = CouplingSpec(delta_k=1.3, geometry=BACKWARD, length=0.7)
    abcd = transfer_backward(spec)[0]
    ph = np.exp(0.5j * 1.3 * 0.7)
    assert np.allclose(abcd, np.diag([ph, ph]))


def test_backward_pole_detected():
    # lossless backward medium: D-bar = cos(kappa L), pole at kappa L = pi / 2
    spec = CouplingSpec(kappa=np.pi / 2, geometry=BACKWARD)
    with pytest.raises(SingularBoundaryError):
        transfer_backward(spec)


def test_forward_lossless_pdc():
    spec = CouplingSpec(kappa=1.0)
    abcd = transfer_forward(spec)[0]
    a, b = abcd[0, 0], abcd[0, 1]
    assert np.isclose(abs(a) ** 2 - abs(b) ** 2, 1.0)
    sp = propagate_moments(spec, varpi=np.zeros(3))
    assert np.allclose(sp.correlation("a1dag_a1"), np.sinh(1.0) ** 2)
    assert np.allclose(sp.comm1, 1) and np.allclose(sp.comm2, 1)


def test_pure_loss_keeps_vacuum():
    spec = CouplingSpec(alpha1=0.8, alpha2=0.3, length=2.0)
    full = propagate_moments(spec, varpi=np.zeros(1))
    nln = propagate_moments(spec, varpi=np.zeros(1), nln=True)
    assert np.allclose(full.comm1, 1)
    assert np.allclose(full.correlation("a1dag_a1"), 0)
    assert np.allclose(nln.comm1, np.exp(-2 * 0.8 * 2.0))


def test_correlation_table_is_complete():
    assert len(CORRELATIONS) == 16
    assert len({v for v in CORRELATIONS.values()}) == 16


@pytest.mark.parametrize(
    "spec, expected",
    [
        (CouplingSpec(kappa=0.7), "APT"),
        (CouplingSpec(kappa=0.7, alpha1=0.2, alpha2=0.2, geometry=BACKWARD), "PT"),
        (CouplingSpec(kappa=0.7, alpha1=0.2, alpha2=0.9, delta_k=0.3, geometry=BACKWARD), None),
    ],
)
def test_classify_symmetry(spec, expected):
    assert classify_symmetry(coupling_matrix(spec)) == expected


rates = st.floats(-1.0, 2.0)
specs = st.builds(
    CouplingSpec,
    alpha1=st.builds(complex, rates, rates),
    alpha2=st.builds(complex, rates, rates),
    delta_k=st.floats(-3, 3),
    kappa=st.builds(complex, st.floats(-0.8, 0.8), st.floats(-0.8, 0.8)),
    theta=st.floats(-np.pi, np.pi),
    geometry=st.sampled_from([FORWARD, BACKWARD]),
    length=st.floats(0.1, 1.0),
)


def _safe_moments(spec, **kw):
    try:
        return propagate_moments(spec, varpi=np.zeros(1), **kw)
    except SingularBoundaryError:
        return None


@settings(max_examples=200, deadline=None)
@given(specs)
def test_commutators_preserved(spec):
    sp = _safe_moments(spec)
    if sp is None:
        return
    assert sp.max_commutator_deviation() <= 1e-9 * max(1.0, float(np.max(np.abs(sp.m_aad))))


@settings(max_examples=100, deadline=None)
@given(specs, st.floats(-np.pi, np.pi))
def test_gauge_moduli_invariant(spec, theta):
    a = _safe_moments(spec.with_(theta=0.0))
    b = _safe_moments(spec.with_(theta=theta))
    if a is None or b is None:
        return
    for name in CORRELATIONS:
        assert np.allclose(np.abs(a.correlation(name)), np.abs(b.correlation(name)), rtol=0, atol=1e-12 * max(1.0, np.max(np.abs(a.m_aad))))


@settings(max_examples=100, deadline=None)
@given(specs)
def test_covariances_are_hermitian(spec):
    cov = macro_forcing(spec)
    for block in (cov.c_ff_dag, cov.c_fdag_f):
        assert np.allclose(block, mat2.dagger(block), atol=1e-12)
        assert np.all(np.diag(block).real >= -1e-12)
