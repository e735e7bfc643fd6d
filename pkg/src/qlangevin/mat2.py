"""Closed-form complex 2x2 linear algebra.

Every function accepts a single matrix of shape ``(2, 2)`` or a stack of
matrices of shape ``(..., 2, 2)`` and works elementwise over the leading
axes, so a whole frequency grid is processed in one call.
"""

from __future__ import annotations

import numpy as np

from .errors import DefectiveMatrixError, Mat2OverflowError

DEGENERACY_RTOL = 1e-8
EXP_ARGUMENT_LIMIT = 700.0
SMALL_RATE = 1e-10
QUAD_RTOL = 1e-13
EIGVEC_MIN_SINE = 1e-2

_I2 = np.eye(2, dtype=complex)
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def as_cmat2(m) -> np.ndarray:
    """Validate and return ``m`` as a complex array of 2x2 matrices."""
    arr = np.asarray(m, dtype=complex)
    if arr.ndim < 2 or arr.shape[-2:] != (2, 2):
        raise ValueError(f"expected (..., 2, 2) matrices, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix entries must be finite")
    return arr


def cmat2(e11, e12, e21, e22) -> np.ndarray:
    """Assemble matrices from four (broadcastable) entry arrays."""
    e11, e12, e21, e22 = np.broadcast_arrays(*(np.asarray(e, dtype=complex) for e in (e11, e12, e21, e22)))
    out = np.empty(e11.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = e11
    out[..., 0, 1] = e12
    out[..., 1, 0] = e21
    out[..., 1, 1] = e22
    return as_cmat2(out)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def transpose(m: np.ndarray) -> np.ndarray:
    return np.swapaxes(m, -1, -2)


def det2(m: np.ndarray) -> np.ndarray:
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def inv2(m: np.ndarray) -> np.ndarray:
    d = det2(m)
    adj = np.empty_like(m)
    adj[..., 0, 0] = m[..., 1, 1]
    adj[..., 1, 1] = m[..., 0, 0]
    adj[..., 0, 1] = -m[..., 0, 1]
    adj[..., 1, 0] = -m[..., 1, 0]
    return adj / d[..., None, None]


def _ldexp(z: np.ndarray, e: np.ndarray) -> np.ndarray:
    return np.ldexp(z.real, e) + 1j * np.ldexp(z.imag, e)


def _normalise(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact power-of-two rescaling to O(1) entries; returns ``(m', e)`` with ``m = m' 2^e``."""
    scale = np.max(np.maximum(np.abs(m.real), np.abs(m.imag)), axis=(-1, -2))
    _, e = np.frexp(scale)
    return _ldexp(m, -e[..., None, None]), e


def _eigvals(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # normalise so products of entries neither underflow nor overflow
    mn, e = _normalise(m)
    big, small = _eigvals_unit(mn)
    return _ldexp(big, e), _ldexp(small, e)


def _eigvals_unit(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    half_tr = 0.5 * (a + d)
    disc = (0.5 * (a - d)) ** 2 + b * c
    w = np.sqrt(disc)
    # pick the root without cancellation, recover the other from the determinant
    plus = half_tr + w
    minus = half_tr - w
    big = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    small = np.where(np.abs(plus) >= np.abs(minus), minus, plus)
    # entries are O(1) here, so a tiny root only arises from cancellation-free data
    nz = np.abs(big) > 1e-150
    small = np.where(nz, det2(m) / np.where(nz, big, 1.0), small)
    # real input with real spectrum: keep eigenvalues exactly real so the
    # square-root branch cut is resolved deterministically
    real_spec = np.all(m.imag == 0, axis=(-1, -2)) & (disc.real >= 0)
    big = np.where(real_spec, big.real + 0j, big)
    small = np.where(real_spec, small.real + 0j, small)
    return big, small


def principal_sqrt(z) -> np.ndarray:
    """Scalar principal square root, negative reals mapped to ``+i``."""
    z = np.asarray(z, dtype=complex)
    r = np.sqrt(z)
    on_cut = (z.imag == 0) & (z.real < 0)
    return np.where(on_cut, 1j * np.sqrt(np.abs(z.real)), r)


def eig2(m):
    """Eigenvalues, unit eigenvectors (as columns) and a degeneracy flag.

    The flag is raised when the eigenvalues coincide to within
    ``1e-8 * max(|l1|, |l2|, 1)``; the eigenvector matrix is then
    ill-conditioned or singular and callers should not invert it.
    """
    m = as_cmat2(m)
    l1, l2 = _eigvals(m)
    lam = np.stack([l1, l2], axis=-1)
    scale = np.maximum(np.maximum(np.abs(l1), np.abs(l2)), 1.0)
    degenerate = np.abs(l1 - l2) < DEGENERACY_RTOL * scale
    # eigenvectors are scale free: build them from the normalised matrix
    m, e = _normalise(m)
    l1, l2 = _ldexp(l1, -e), _ldexp(l2, -e)

    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    cols = []
    for k, l in enumerate((l1, l2)):
        u = np.stack([b, l - a], axis=-1)
        v = np.stack([l - d, c], axis=-1)
        nu = np.linalg.norm(u, axis=-1)
        nv = np.linalg.norm(v, axis=-1)
        vec = np.where((nu >= nv)[..., None], u, v)
        nrm = np.maximum(nu, nv)
        unit = np.zeros(m.shape[:-2] + (2,), dtype=complex)
        unit[..., k] = 1.0
        tiny = nrm <= 1e-300
        vec = np.where(tiny[..., None], unit, vec / np.where(tiny, 1.0, nrm)[..., None])
        cols.append(vec)
    vecs = np.stack(cols, axis=-1)
    return lam, vecs, degenerate


def _check_exponent(m: np.ndarray, s) -> None:
    s = np.abs(np.asarray(s, dtype=float))
    if np.any(np.abs(m) * s[..., None, None] > EXP_ARGUMENT_LIMIT):
        raise Mat2OverflowError("|entry * length| exceeds 700 in matrix exponential")


def _sinhc(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    return np.where(small, 1.0 + x * x / 6.0 + x**4 / 120.0, np.sinh(xs) / xs)


def expm2(m, s=1.0) -> np.ndarray:
    """Matrix exponential ``exp(m * s)``.

    Uses the Cayley-Hamilton form ``e^{ts}[cosh(ws) I + s sinhc(ws) (m - tI)]``
    when ``|w s| <= 1`` and the spectral-projector form otherwise, where
    ``t`` is the half trace and ``w`` the half eigenvalue gap.
    """
    m = as_cmat2(m)
    s = np.asarray(s, dtype=float)
    _check_exponent(m, s)
    a, b, c, d = m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]
    t = 0.5 * (a + d)
    w = np.sqrt((0.5 * (a - d)) ** 2 + b * c)
    x = w * s
    n = m - t[..., None, None] * _I2

    near = np.abs(x) <= 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ch = np.exp(t * s)[..., None, None] * (
            np.cosh(x)[..., None, None] * _I2 + (s * _sinhc(x))[..., None, None] * n
        )
        w_safe = np.where(near, 1.0, w)
        p1 = (n + w_safe[..., None, None] * _I2) / (2.0 * w_safe)[..., None, None]
        p2 = _I2 - p1
        sp = (
            np.exp((t + w_safe) * s)[..., None, None] * p1
            + np.exp((t - w_safe) * s)[..., None, None] * p2
        )
    return np.where(near[..., None, None], ch, sp)


def sqrtm2(m) -> np.ndarray:
    """Principal matrix square root.

    Eigenvalues of the result lie in the closed right half-plane; a negative
    real eigenvalue ``-r`` maps to ``+i sqrt(r)``. Built from the 2x2 identity
    ``sqrt(X) = (X + sqrt(l1) sqrt(l2) I) / (sqrt(l1) + sqrt(l2))``.
    """
    m = as_cmat2(m)
    l1, l2 = _eigvals(m)
    r1, r2 = principal_sqrt(l1), principal_sqrt(l2)
    tau = r1 + r2
    scale = np.max(np.abs(m), axis=(-1, -2))
    null = np.abs(r1) + np.abs(r2) <= 1e-14 * np.sqrt(scale)
    if np.any(null & (scale > 0)):
        raise DefectiveMatrixError("nilpotent matrix has no primary square root")
    tau_safe = np.where(null | (tau == 0), 1.0, tau)
    out = (m + (r1 * r2)[..., None, None] * _I2) / tau_safe[..., None, None]
    # l1 - l2 = (r1 - r2)(r1 + r2): when the roots straddle the branch cut,
    # r1 + r2 cancels; write X = tI + N with N^2 = w^2 I instead, so that
    # sqrt(X) = (s+ + s-)/2 I + (s+ - s-)/(2w) N with s+- = sqrt(t +- w)
    straddle = ~null & (np.abs(tau) < np.abs(r1 - r2))
    if np.any(straddle):
        out[straddle] = _sqrt_split(m[straddle])
    return np.where(null[..., None, None], 0.0, out)


def _sqrt_split(m: np.ndarray) -> np.ndarray:
    mn, e = _normalise(m)
    # keep the exponent even so the rescaling of the root stays exact
    odd = e % 2 != 0
    mn = np.where(odd[..., None, None], 0.5 * mn, mn)
    e = e + odd
    a, b, c, d = mn[..., 0, 0], mn[..., 0, 1], mn[..., 1, 0], mn[..., 1, 1]
    t = 0.5 * (a + d)
    n = mn - t[..., None, None] * _I2
    nscale = np.max(np.abs(n), axis=(-1, -2))
    nscale = np.where(nscale > 0, nscale, 1.0)
    h = 0.5 * (a - d) / nscale
    w = nscale * np.sqrt(h * h + (b / nscale) * (c / nscale))
    sp, sm = principal_sqrt(t + w), principal_sqrt(t - w)
    alpha = 0.5 * (sp + sm)
    beta = (sp - sm) / (2 * w)
    root = alpha[..., None, None] * _I2 + beta[..., None, None] * n
    return _ldexp(root, (e // 2)[..., None, None])


def _phi1(z: np.ndarray) -> np.ndarray:
    """``(e^z - 1) / z`` with the removable singularity filled in."""
    small = np.abs(z) < SMALL_RATE
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0, np.expm1(zs) / zs)


def _right_factor(e: np.ndarray, adjoint: str) -> np.ndarray:
    return dagger(e) if adjoint == "H" else transpose(e)


def _quad_moment(m, c, length, adjoint):
    """Composite Gauss-Legendre, panels doubled until converged."""

    def panel_sum(npanel):
        edges = np.linspace(0.0, length, npanel + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        s = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        wts = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        e = expm2(m[..., None, :, :], s)
        integrand = e @ c[..., None, :, :] @ _right_factor(e, adjoint)
        return np.einsum("...kij,k->...ij", integrand, wts)

    npanel = 1
    prev = panel_sum(npanel)
    while npanel < 4096:
        npanel *= 2
        cur = panel_sum(npanel)
        err = np.max(np.abs(cur - prev))
        ref = max(np.max(np.abs(cur)), 1e-300)
        if err <= QUAD_RTOL * ref:
            return cur
        prev = cur
    return cur


def exp_moment_integral(m, c, length: float, adjoint: str = "H") -> np.ndarray:
    """Integral of ``e^{m s} c (e^{m s})^adjoint`` for ``s`` in ``[0, length]``.

    ``adjoint`` is ``"H"`` (conjugate transpose) or ``"T"`` (transpose). In the
    eigenbasis each entry integrates to ``(e^{(li + lj') L} - 1)/(li + lj')``
    with ``lj'`` the conjugated (``"H"``) or plain (``"T"``) eigenvalue.
    Samples flagged degenerate by :func:`eig2`, or whose unit eigenvectors
    are nearly parallel, fall back to quadrature.
    """
    if adjoint not in ("H", "T"):
        raise ValueError("adjoint must be 'H' or 'T'")
    m = as_cmat2(m)
    c = as_cmat2(c)
    m, c = np.broadcast_arrays(m, c)
    length = float(length)
    _check_exponent(m, 2.0 * length)

    lam, vecs, degenerate = eig2(m)
    # nearly parallel eigenvectors (close to an exceptional point) amplify
    # rounding in the eigenbasis; quadrature is used for those samples too
    degenerate = degenerate | (np.abs(det2(vecs)) < EIGVEC_MIN_SINE)
    out = np.empty(m.shape, dtype=complex)
    ok = ~degenerate
    if np.any(ok):
        v = vecs[ok]
        vinv = inv2(v)
        lm = lam[ok]
        mu = np.conj(lm) if adjoint == "H" else lm
        mid = vinv @ c[ok] @ _right_factor(vinv, adjoint)
        rates = lm[..., :, None] + mu[..., None, :]
        weights = length * _phi1(rates * length)
        out[ok] = v @ (mid * weights) @ _right_factor(v, adjoint)
    if np.any(degenerate):
        out[degenerate] = _quad_moment(m[degenerate], c[degenerate], length, adjoint)
    return out
