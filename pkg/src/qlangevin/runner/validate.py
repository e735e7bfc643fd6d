"""Machine-checkable validation campaign.

Each ``criterion_*`` function returns a list of :class:`CheckRecord`; the
report passes only if every record passes.
"""

from __future__ import annotations

import platform
import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy
import scipy.linalg

from .. import mat2
from ..atomsfwm import MHZ, AtomicScenario, diffusion_tensor, einstein_oracle
from ..correlator import (
    FrequencyGrid,
    RabiParams,
    analytic_abcd,
    biphoton_wavefunction,
    complex_kappa_shortL_check,
    fit_rabi,
    smallgain_sinc,
    temporal_observables,
    perturbation_params,
)
from ..phenomodel import (
    BACKWARD,
    CORRELATIONS,
    FORWARD,
    GEOMETRIES,
    CouplingSpec,
    backward_sqrt_form,
    equivalent_noise_variants,
    forcing_covariance_macro,
    noise_matrices,
    propagate_moments,
    transfer_backward,
    transfer_forward,
)
from .config import ScenarioConfig, preset
from .runs import spectra_source


@dataclass(frozen=True)
class CheckRecord:
    """One check. ``kind="max"`` passes when deviation <= tolerance,
    ``kind="min"`` when deviation > tolerance."""

    name: str
    max_abs_deviation: float
    tolerance: float
    passed: bool
    kind: str = "max"

    @classmethod
    def upper(cls, name, dev, tol):
        dev = float(dev)
        return cls(name, dev, float(tol), bool(dev <= tol))

    @classmethod
    def lower(cls, name, dev, tol):
        dev = float(dev)
        return cls(name, dev, float(tol), bool(dev > tol), "min")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _rel_linf(a, b, peak=None) -> float:
    peak = max(np.max(np.abs(a)), np.max(np.abs(b))) if peak is None else peak
    if peak == 0:
        return 0.0
    return float(np.max(np.abs(a - b)) / peak)


def _atomic_presets(names=("group_delay", "rabi"), **kw) -> list[ScenarioConfig]:
    return [preset(n, **kw) for n in names]


# 1 -------------------------------------------------------------------------


def criterion_1(configs=None) -> list[CheckRecord]:
    """Macroscopic commutators stay at one on every grid point."""
    out = []
    for cfg in configs or _atomic_presets():
        w = cfg.grid().varpi
        for geo in GEOMETRIES:
            sp = spectra_source(cfg, "macro", geo)(w)
            out.append(CheckRecord.upper(f"macro_commutator_{cfg.preset}_{geo}", sp.max_commutator_deviation(), 1e-9))
    return out


# 2 -------------------------------------------------------------------------


def criterion_2(configs=None, states=("full", "ground")) -> list[CheckRecord]:
    """Microscopic commutator deviation for each steady-state choice."""
    out = []
    for cfg in configs or _atomic_presets():
        w = cfg.grid().varpi
        for state in states:
            c = cfg.with_(state=state)
            for geo in GEOMETRIES:
                sp = spectra_source(c, "micro", geo)(w)
                out.append(CheckRecord.upper(f"micro_commutator_{cfg.preset}_{geo}_{state}", sp.max_commutator_deviation(), 1e-5))
    return out


# 3 -------------------------------------------------------------------------


def macro_micro_deviations(cfg: ScenarioConfig) -> dict[str, float]:
    w = cfg.grid().varpi
    mac = spectra_source(cfg, "macro")(w)
    mic = spectra_source(cfg, "micro")(w)
    return {name: _rel_linf(mac.correlation(name), mic.correlation(name)) for name in CORRELATIONS}


def criterion_3(configs=None) -> list[CheckRecord]:
    """Macro and micro spectra agree to 2% of each observable's peak."""
    out = []
    for cfg in configs or _atomic_presets():
        for name, dev in macro_micro_deviations(cfg).items():
            out.append(CheckRecord.upper(f"macro_vs_micro_{cfg.preset}_{name}", dev, 0.02))
    return out


# 4 -------------------------------------------------------------------------


def random_spec(rng, geometry=None, max_kappa=1.0) -> CouplingSpec:
    geometry = geometry or GEOMETRIES[rng.integers(2)]
    return CouplingSpec(
        alpha1=complex(rng.uniform(-0.5, 2), rng.uniform(-2, 2)),
        alpha2=complex(rng.uniform(-0.5, 2), rng.uniform(-2, 2)),
        delta_k=float(rng.uniform(-3, 3)),
        kappa=complex(rng.uniform(0, max_kappa) * np.exp(1j * rng.uniform(-np.pi, np.pi))),
        theta=float(rng.uniform(-np.pi, np.pi)),
        geometry=geometry,
        length=float(rng.uniform(0.1, 1.5)),
    )


def criterion_4(n_specs: int = 1000, seed: int = 4) -> list[CheckRecord]:
    """Closed-form ABCD against the matrix-exponential transfer."""
    rng = np.random.default_rng(seed)
    w = np.linspace(-2, 2, 5)
    worst = {FORWARD: 0.0, BACKWARD: 0.0}
    for _ in range(n_specs):
        spec = random_spec(rng)
        exact = transfer_forward(spec, w)[0] if spec.geometry == FORWARD else transfer_backward(spec, w)[0]
        worst[spec.geometry] = max(worst[spec.geometry], float(np.max(np.abs(analytic_abcd(spec, w) - exact))))
    return [CheckRecord.upper(f"analytic_abcd_{g}", v, 1e-10) for g, v in worst.items()]


# 5 -------------------------------------------------------------------------


def smallgain_errors(spec: CouplingSpec, channel2: str, ratios) -> list[float]:
    """Relative error of the sinc form against exact products at ``|kappa/q|`` ratios."""
    q = abs(complex(perturbation_params(spec, 0.0, channel2).q))
    errs = []
    for r in ratios:
        s = spec.with_(kappa=r * q)
        t = analytic_abcd(s, 0.0)
        a, b, c, d = t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1]
        exact = b * np.conj(d) if channel2 == "gain" else a * np.conj(c)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            approx = smallgain_sinc(s, 0.0, channel2)
        errs.append(float(np.max(np.abs(approx - exact) / np.abs(exact))))
    return errs


def criterion_5(n_specs: int = 20, seed: int = 5) -> list[CheckRecord]:
    rng = np.random.default_rng(seed)
    ratios = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5]
    out = []
    for geo in GEOMETRIES:
        for ch in ("gain", "loss"):
            at = 0.0
            worst_step = 0.0
            for _ in range(n_specs):
                spec = random_spec(rng, geo).with_(alpha1=complex(rng.uniform(0.1, 2), rng.uniform(-2, 2)), alpha2=complex(rng.uniform(0.1, 2), rng.uniform(-2, 2)), theta=0.0)
                errs = smallgain_errors(spec, ch, ratios)
                at = max(at, errs[2])
                # successive error ratios; monotone decrease means every ratio < 1
                worst_step = max(worst_step, max(e2 / e1 for e1, e2 in zip(errs, errs[1:])))
            out.append(CheckRecord.upper(f"smallgain_{geo}_{ch}_at_1e-3", at, 0.01))
            out.append(CheckRecord.upper(f"smallgain_{geo}_{ch}_decade_ratio", worst_step, 1.0 - 1e-12))
    return out


# 6 -------------------------------------------------------------------------


def criterion_6(configs=None) -> list[CheckRecord]:
    """Operator ordering: NLN reproduces G2_21 but not G2_12."""
    out = []
    for cfg in configs or _atomic_presets():
        grid = cfg.grid()
        src = spectra_source(cfg, "macro")
        full = temporal_observables(src, grid, "full", check_grid=True)
        nln = temporal_observables(src, grid, "NLN")
        peak = float(np.max(full.G2_21))
        out.append(CheckRecord.upper(f"nln_G2_21_{cfg.preset}", _rel_linf(nln.G2_21, full.G2_21, peak), 0.01))
        out.append(CheckRecord.lower(f"nln_G2_12_deviation_{cfg.preset}", _rel_linf(nln.G2_12, full.G2_12, peak), 0.10))
        out.append(CheckRecord.upper(f"exchange_G2_{cfg.preset}", _rel_linf(full.G2_21, full.G2_12, peak), 0.01))
    return out


# 7 -------------------------------------------------------------------------

# The default span leaves a truncation ripple just before tau = 0 whose size
# scales as 1 / span; the causality check doubles the span.
CAUSALITY_SPAN_FACTOR = 2


def criterion_7(cfg: ScenarioConfig | None = None) -> list[CheckRecord]:
    cfg = cfg or preset("rabi")
    grid = cfg.grid()
    src = spectra_source(cfg, "macro")
    psi = biphoton_wavefunction(src, grid, check_grid=True)
    rp = RabiParams.from_atoms(cfg.levels, cfg.drive, cfg.ensemble)
    fit = fit_rabi(grid.tau, psi, rp.gamma_e, rp.omega_e)
    wide = FrequencyGrid(grid.n_points, CAUSALITY_SPAN_FACTOR * grid.span)
    psi_w = biphoton_wavefunction(src, wide, check_grid=True)
    causal = np.max(np.abs(psi_w[wide.tau < 0])) / np.max(np.abs(psi_w))
    return [
        CheckRecord.upper("rabi_fit_frequency", abs(fit.omega / rp.omega_e - 1), 0.02),
        CheckRecord.upper("rabi_fit_decay", abs(fit.decay / (2 * rp.gamma_e) - 1), 0.05),
        CheckRecord.upper("rabi_causality", causal, 1e-3),
    ]


def default_grid_causality(cfg: ScenarioConfig | None = None) -> float:
    cfg = cfg or preset("rabi")
    grid = cfg.grid()
    psi = biphoton_wavefunction(spectra_source(cfg, "macro"), grid)
    return float(np.max(np.abs(psi[grid.tau < 0])) / np.max(np.abs(psi)))


# 8 -------------------------------------------------------------------------


def _cov_diff(a, b) -> float:
    return max(
        float(np.max(np.abs(a.c_ff_dag - b.c_ff_dag))),
        float(np.max(np.abs(a.c_fdag_f - b.c_fdag_f))),
        float(np.max(np.abs(a.c_ff - b.c_ff))),
        float(np.max(np.abs(a.c_fdag_fdag - b.c_fdag_fdag))),
    )


def _spectra_diff(a, b) -> float:
    return max(float(np.max(np.abs(getattr(a, k) - getattr(b, k)))) for k in ("m_aad", "m_ada", "m_aa", "m_adad"))


def branch_equivalence(spec: CouplingSpec, w) -> tuple[float, float]:
    nm = noise_matrices(spec, w)
    ref_cov = forcing_covariance_macro(nm, spec.theta)
    ref = propagate_moments(spec, ref_cov, w)
    variants = equivalent_noise_variants(nm)
    if spec.geometry == BACKWARD:
        variants.append(backward_sqrt_form(spec, w))
    cov_dev = spec_dev = 0.0
    for v in variants:
        cov = forcing_covariance_macro(v, spec.theta)
        cov_dev = max(cov_dev, _cov_diff(cov, ref_cov))
        spec_dev = max(spec_dev, _spectra_diff(propagate_moments(spec, cov, w), ref))
    return cov_dev, spec_dev


def criterion_8(n_specs: int = 200, seed: int = 8) -> list[CheckRecord]:
    rng = np.random.default_rng(seed)
    cov = spd = 0.0
    w = np.linspace(-1, 1, 7)
    for _ in range(n_specs):
        c, s = branch_equivalence(random_spec(rng), w)
        cov, spd = max(cov, c), max(spd, s)
    out = [CheckRecord.upper("branch_covariance_random", cov, 1e-12), CheckRecord.upper("branch_spectra_random", spd, 1e-12)]
    for cfg in _atomic_presets():
        c, s = branch_equivalence(cfg.spec(BACKWARD), cfg.grid().varpi)
        out.append(CheckRecord.upper(f"branch_covariance_{cfg.preset}", c, 1e-12))
        out.append(CheckRecord.upper(f"branch_spectra_{cfg.preset}", s, 1e-12))
    return out


# 9 -------------------------------------------------------------------------


def gauge_deviation(spec: CouplingSpec, w, thetas) -> float:
    ref = propagate_moments(spec.with_(theta=0.0), None, w)
    worst = 0.0
    for th in thetas:
        sp = propagate_moments(spec.with_(theta=float(th)), None, w)
        for name in CORRELATIONS:
            worst = max(worst, float(np.max(np.abs(np.abs(sp.correlation(name)) - np.abs(ref.correlation(name))))))
        worst = max(worst, float(np.max(np.abs(np.abs(sp.comm1) - np.abs(ref.comm1)))))
        worst = max(worst, float(np.max(np.abs(np.abs(sp.comm2) - np.abs(ref.comm2)))))
    return worst


def criterion_9(n_specs: int = 50, seed: int = 9) -> list[CheckRecord]:
    rng = np.random.default_rng(seed)
    thetas = np.linspace(-np.pi, np.pi, 9)
    w = np.linspace(-1, 1, 5)
    worst = max(gauge_deviation(random_spec(rng), w, thetas) for _ in range(n_specs))
    out = [CheckRecord.upper("gauge_random", worst, 1e-12)]
    for cfg in _atomic_presets():
        for geo in GEOMETRIES:
            out.append(CheckRecord.upper(f"gauge_{cfg.preset}_{geo}", gauge_deviation(cfg.spec(geo), cfg.grid().varpi[::16], thetas), 1e-12))
    return out


# 10 ------------------------------------------------------------------------


def einstein_deviation(scenario: AtomicScenario) -> float:
    """Closed-form vs Einstein-relation diffusion, relative to the largest entry."""
    closed = diffusion_tensor(scenario.steady(), scenario.levels)
    oracle = einstein_oracle(scenario.steady(), scenario.levels, scenario.drive)
    blocks = [(closed.anti_normal_block(), oracle.anti_normal_block()), (closed.normal_block(), oracle.normal_block())]
    scale = max(float(np.max(np.abs(o))) for _, o in blocks)
    return max(float(np.max(np.abs(c - o))) for c, o in blocks) / scale


def criterion_10(states=("full", "ground")) -> list[CheckRecord]:
    out = []
    for cfg in _atomic_presets():
        for state in states:
            out.append(CheckRecord.upper(f"einstein_{cfg.preset}_{state}", einstein_deviation(cfg.with_(state=state).scenario()), 1e-12))
    return out


# 11 ------------------------------------------------------------------------


def criterion_11() -> list[CheckRecord]:
    out = []
    grid = FrequencyGrid(2**12, 1.0)
    for geo in GEOMETRIES:
        for kappa in (1.0, 1j, 1 + 0.5j, 1 - 0.5j):
            spec = CouplingSpec(0.0, 0.0, 0.0, kappa, 0.0, geo, 1e-3)
            r = complex_kappa_shortL_check(spec, grid)
            out.append(CheckRecord.upper(f"complex_kappa_{geo}_{kappa}", r.max_deviation, 1.0))
    # frequency-dependent two-pole coupling: Im(kappa) changes sign across the grid
    rp = RabiParams(omega_e=24 * MHZ, gamma_e=1.5 * MHZ, j_amp=1.0)
    g = FrequencyGrid(2**14, 384 * MHZ)
    peak = np.max(np.abs(rp.kappa(g.varpi)))
    for geo in GEOMETRIES:
        spec = CouplingSpec(0.0, 0.0, 0.0, lambda w: rp.kappa(w) / peak, 0.0, geo, 5e-3)
        r = complex_kappa_shortL_check(spec, g)
        for label, dev in r.branch_deviation.items():
            out.append(CheckRecord.upper(f"complex_kappa_twopole_{geo}_{label}", dev, 1.0))
        out.append(CheckRecord.upper(f"time_reversal_twopole_{geo}", r.symmetry_deviation, 0.01))
    return out


# 12 ------------------------------------------------------------------------


def _random_cmat(rng, n, scale=1.0):
    return scale * (rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2)))


def mat2_property_suite(n: int = 100_000, seed: int = 12) -> dict[str, float]:
    """Worst-case residuals of the kernel over ``n`` random instances each."""
    rng = np.random.default_rng(seed)
    res = {}

    x = _random_cmat(rng, n)
    lam = np.linalg.eigvals(x)
    keep = ~np.any((np.abs(lam.imag) < 1e-6) & (lam.real <= 0), axis=-1)
    x = x[keep]
    r = mat2.sqrtm2(x)
    res["sqrt_square"] = float(np.max(np.max(np.abs(r @ r - x), axis=(-1, -2)) / np.max(np.abs(x), axis=(-1, -2))))
    ev = np.linalg.eigvals(r)
    res["sqrt_right_half_plane"] = float(max(0.0, -np.min(ev.real)))

    m = _random_cmat(rng, n)
    s1, s2 = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    lhs = mat2.expm2(m, s1) @ mat2.expm2(m, s2)
    rhs = mat2.expm2(m, s1 + s2)
    res["exp_group_law"] = float(np.max(np.max(np.abs(lhs - rhs), axis=(-1, -2)) / np.maximum(np.max(np.abs(rhs), axis=(-1, -2)), 1.0)))
    ref = scipy.linalg.expm(m * s1[:, None, None])
    res["exp_power_series"] = float(np.max(np.max(np.abs(mat2.expm2(m, s1) - ref), axis=(-1, -2)) / np.max(np.abs(ref), axis=(-1, -2))))

    lam, vecs, deg = mat2.eig2(m)
    ok = ~deg
    rec = vecs[ok] @ (lam[ok][..., :, None] * mat2.inv2(vecs[ok]))
    res["eig_reconstruction"] = float(np.max(np.max(np.abs(rec - m[ok]), axis=(-1, -2)) / np.max(np.abs(m[ok]), axis=(-1, -2))))

    # stable generators against composite Gauss-Legendre with scipy's expm
    a = _random_cmat(rng, n) - 2.5 * np.eye(2)
    c = _random_cmat(rng, n)
    length = 1.0
    nodes, weights = np.polynomial.legendre.leggauss(24)
    panels = 4
    total = np.zeros_like(c)
    for p in range(panels):
        lo, hi = p * length / panels, (p + 1) * length / panels
        for z, wt in zip(0.5 * (hi - lo) * nodes + 0.5 * (hi + lo), 0.5 * (hi - lo) * weights):
            e = scipy.linalg.expm(a * z)
            total += wt * (e @ c @ mat2.dagger(e))
    got = mat2.exp_moment_integral(a, c, length)
    res["moment_integral"] = float(np.max(np.abs(got - total) / np.maximum(np.max(np.abs(total), axis=(-1, -2), keepdims=True), 1e-300)))
    return res


MAT2_TOLERANCES = {
    "sqrt_square": 1e-12,
    "sqrt_right_half_plane": 1e-12,
    "exp_group_law": 1e-10,
    "exp_power_series": 1e-12,
    "eig_reconstruction": 1e-10,
    "moment_integral": 1e-8,
}


def criterion_12(n: int = 100_000) -> list[CheckRecord]:
    res = mat2_property_suite(n)
    return [CheckRecord.upper(f"mat2_{k}", v, MAT2_TOLERANCES[k]) for k, v in res.items()]


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
    11: criterion_11,
    12: criterion_12,
}

ORACLE_CRITERIA = (4, 5, 10, 12)


def run_validation(selected=None, config: ScenarioConfig | None = None) -> dict:
    """Run the chosen criteria and return a JSON-ready report."""
    records = []
    for key in selected or sorted(CRITERIA):
        for rec in CRITERIA[key]():
            d = rec.as_dict()
            d["criterion"] = key
            records.append(d)
    return {
        "pass": all(r["pass"] for r in records),
        "records": records,
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
        "config": config.echo() if config is not None else None,
    }
