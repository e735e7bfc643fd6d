"""Deterministic CSV/JSON writers and a minimal SVG line plot."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> Path:
    """Write equal-length columns with 17 significant digits."""
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    n = len(cols[0])
    if any(len(c) != n for c in cols):
        raise ValueError("columns must have equal length")
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c[i]) for c in cols) for i in range(n))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path: Path) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out_dir: Path, files: list[Path], meta: dict, name: str = "manifest.json") -> Path:
    """List every emitted file with its content hash."""
    out_dir = Path(out_dir)
    entries = [{"file": Path(f).name, "sha256": sha256(f)} for f in sorted(files)]
    path = out_dir / name
    path.write_text(json.dumps({**meta, "files": entries}, indent=2, sort_keys=True) + "\n")
    return path


def write_json(path: Path, payload: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_svg(path: Path, x, y, xlabel: str = "", ylabel: str = "", width: int = 640, height: int = 400) -> Path:
    """Single polyline with a box frame and axis labels."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    pad = 50
    x0, x1 = float(x.min()), float(x.max())
    y0, y1 = float(y.min()), float(y.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    px = pad + (x - x0) / (x1 - x0) * (width - 2 * pad)
    py = height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))
    svg = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">\n'
        f'<rect x="{pad}" y="{pad}" width="{width - 2 * pad}" height="{height - 2 * pad}" fill="none" stroke="black"/>\n'
        f'<polyline fill="none" stroke="steelblue" stroke-width="1" points="{pts}"/>\n'
        f'<text x="{width / 2}" y="{height - 10}" text-anchor="middle">{xlabel} [{x0:.3g}, {x1:.3g}]</text>\n'
        f'<text x="12" y="{height / 2}" transform="rotate(-90 12 {height / 2})" text-anchor="middle">{ylabel} [{y0:.3g}, {y1:.3g}]</text>\n'
        "</svg>\n"
    )
    path = Path(path)
    path.write_text(svg)
    return path
