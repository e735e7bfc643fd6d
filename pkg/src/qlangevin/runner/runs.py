"""Spectra and biphoton runs that write data files plus a manifest."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..atomsfwm import MHZ, micro_forcing_covariance
from ..correlator import forcing_source, macro_source, temporal_observables
from ..phenomodel import CORRELATIONS
from . import io
from .config import ScenarioConfig


def spectra_source(cfg: ScenarioConfig, model: str, geometry: str | None = None):
    """Callable ``source(varpi, nln=False)`` for the macro or micro model."""
    geometry = geometry or cfg.geometry
    spec = cfg.spec(geometry)
    if model == "macro":
        return macro_source(spec)
    scenario = cfg.scenario()
    return forcing_source(spec, lambda w: micro_forcing_covariance(w, scenario, geometry))


def _prepare(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def run_spectra(cfg: ScenarioConfig, out_dir=None) -> list[Path]:
    """Write one CSV per correlation and commutator, per model.

    Files are ``<model>[_nln]_<name>.csv`` with columns
    ``varpi_over_2pi_MHz,re,im``; commutator files hold
    ``varpi_over_2pi_MHz,value_minus_one``.
    """
    out = _prepare(out_dir or cfg.output_dir)
    grid = cfg.grid()
    x = grid.varpi / MHZ
    files = []
    modes = [False, True] if cfg.nln else [False]
    for model in cfg.models():
        source = spectra_source(cfg, model)
        for nln in modes:
            tag = f"{model}_nln" if nln else model
            sp = source(grid.varpi, nln=nln)
            for name in CORRELATIONS:
                val = sp.correlation(name)
                files.append(io.write_csv(out / f"{tag}_{name}.csv", ["varpi_over_2pi_MHz", "re", "im"], [x, val.real, val.imag]))
            for cname, val in (("comm1", sp.comm1), ("comm2", sp.comm2)):
                files.append(io.write_csv(out / f"{tag}_{cname}.csv", ["varpi_over_2pi_MHz", "value_minus_one"], [x, (val - 1).real]))
            if cfg.plot:
                files.append(io.write_svg(out / f"{tag}_a1dag_a1.svg", x, sp.correlation("a1dag_a1").real, "varpi/2pi (MHz)", "<a1+ a1>"))
    io.write_manifest(out, files, {"kind": "spectra", "config": cfg.echo(), "grid": _grid_meta(grid)})
    return files


def run_biphoton(cfg: ScenarioConfig, out_dir=None) -> list[Path]:
    """Write ``tau_us,G2_21,G2_12,g2,psi_re,psi_im`` per model and noise mode."""
    out = _prepare(out_dir or cfg.output_dir)
    grid = cfg.grid()
    files = []
    modes = ["full", "NLN"] if cfg.nln else ["full"]
    for model in cfg.models():
        source = spectra_source(cfg, model)
        for noise in modes:
            obs = temporal_observables(source, grid, noise)
            stem = f"{model}_biphoton_{noise.lower()}"
            tau_us = obs.tau * 1e6
            files.append(
                io.write_csv(
                    out / f"{stem}.csv",
                    ["tau_us", "G2_21", "G2_12", "g2", "psi_re", "psi_im"],
                    [tau_us, obs.G2_21, obs.G2_12, obs.g2_21, obs.psi21.real, obs.psi21.imag],
                )
            )
            if cfg.plot:
                files.append(io.write_svg(out / f"{stem}.svg", tau_us, obs.G2_21, "tau (us)", "G2_21"))
    io.write_manifest(out, files, {"kind": "biphoton", "config": cfg.echo(), "grid": _grid_meta(grid)})
    return files


def _grid_meta(grid) -> dict:
    return {"points": grid.n_points, "span_MHz": grid.span / MHZ, "dtau_us": grid.dtau * 1e6, "spacing_MHz": grid.spacing / MHZ}


def rectangular_sinc_check(width: float, grid) -> float:
    """Peak-normalised deviation of the transform of a box spectrum from its sinc.

    A box ``S = 1`` on ``|varpi| < width`` transforms to
    ``sin(width tau) / (pi tau)``.
    """
    from ..correlator import to_time

    w = grid.varpi
    s = np.where(np.abs(w) < width, 1.0, 0.0)
    s = np.where(np.isclose(np.abs(w), width), 0.5, s)
    psi = to_time(s, grid)
    ref = width / np.pi * np.sinc(width * grid.tau / np.pi)
    return float(np.max(np.abs(psi - ref)) / (width / np.pi))
