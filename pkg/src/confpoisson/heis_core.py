"""Heisenberg group geometry and the operators ``L`` and ``L_a``.

Points of ``H^(2n+1)`` are stored as real arrays of shape ``(..., 2n+1)``
ordered ``(x_1, y_1, ..., x_n, y_n, t)`` with ``z_j = x_j + i y_j``.  Group
law: ``(z, t)(z', t') = (z + z', t + t' + 2 Im(z . conj(z')))``.

Grid operators act on :class:`~confpoisson.euclid_field.GridField` samples
whose axes follow the same ordering; stencils are second order and the
one-cell margin is marked invalid.
"""

from __future__ import annotations

import numpy as np

from .euclid_field import GridField, interior_mask


def split(p: np.ndarray):
    """Return ``(x, y, t)`` with ``x, y`` of shape ``(..., n)``."""
    p = np.asarray(p, float)
    zz = p[..., :-1]
    return zz[..., 0::2], zz[..., 1::2], p[..., -1]


def join(x: np.ndarray, y: np.ndarray, t: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    out = np.empty(x.shape[:-1] + (2 * n + 1,))
    out[..., 0:-1:2] = x
    out[..., 1:-1:2] = y
    out[..., -1] = t
    return out


def symplectic(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """``Im(z . conj(z'))`` for the complex parts of ``p`` and ``q``."""
    x, y, _ = split(p)
    u, v, _ = split(q)
    return np.sum(y * u - x * v, axis=-1)


def heis_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    x, y, t = split(p)
    u, v, s = split(q)
    return join(x + u, y + v, t + s + 2.0 * symplectic(p, q))


def heis_inv(p: np.ndarray) -> np.ndarray:
    return -np.asarray(p, float)


def koranyi_norm(p: np.ndarray) -> np.ndarray:
    """``(|z|^4 + t^2)^(1/4)``."""
    x, y, t = split(p)
    r2 = np.sum(x * x + y * y, axis=-1)
    return (r2 * r2 + t * t) ** 0.25


def dilate(p: np.ndarray, r: float) -> np.ndarray:
    """Parabolic dilation ``(z, t) -> (r z, r^2 t)``."""
    p = np.array(p, float)
    p[..., :-1] *= r
    p[..., -1] *= r * r
    return p


def embed_boundary(q: np.ndarray) -> np.ndarray:
    """``(z', t') in H^(2n-1) -> (z', 0, t') in H^(2n+1)``."""
    q = np.asarray(q, float)
    zeros = np.zeros(q.shape[:-1] + (2,))
    return np.concatenate([q[..., :-1], zeros, q[..., -1:]], axis=-1)


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------

def _d1(u, ax, h):
    return (np.roll(u, -1, ax) - np.roll(u, 1, ax)) / (2.0 * h)


def _d2(u, ax, h):
    return (np.roll(u, -1, ax) - 2.0 * u + np.roll(u, 1, ax)) / (h * h)


def _dmix(u, a1, h1, a2, h2):
    """Symmetric four-point stencil for the mixed second derivative."""
    pp = np.roll(np.roll(u, -1, a1), -1, a2)
    mm = np.roll(np.roll(u, 1, a1), 1, a2)
    pm = np.roll(np.roll(u, -1, a1), 1, a2)
    mp = np.roll(np.roll(u, 1, a1), -1, a2)
    return (pp + mm - pm - mp) / (4.0 * h1 * h2)


def _coords(u: GridField):
    return np.meshgrid(*u.axes(), indexing="ij", sparse=True)


def _cr_laplacian_samples(u: GridField, pairs: int, t_axis: int = -1) -> np.ndarray:
    """CR Laplacian on the first ``pairs`` complex coordinates.

    Expanded form ``sum_j (d_xj^2 + d_yj^2) + 4|z|^2 d_t^2
    + 4 sum_j (y_j d_xj d_t - x_j d_yj d_t)``; axes other than the pairs and
    ``t_axis`` (e.g. ``rho``) are left alone.
    """
    t_axis = t_axis % u.ndim
    s = u.samples
    h = u.spacing
    c = _coords(u)
    out = np.zeros_like(s)
    r2 = 0.0
    for j in range(pairs):
        ix, iy = 2 * j, 2 * j + 1
        out = out + _d2(s, ix, h[ix]) + _d2(s, iy, h[iy])
        out = out + 4.0 * c[iy] * _dmix(s, ix, h[ix], t_axis, h[t_axis]) \
            - 4.0 * c[ix] * _dmix(s, iy, h[iy], t_axis, h[t_axis])
        r2 = r2 + c[ix] ** 2 + c[iy] ** 2
    return out + 4.0 * r2 * _d2(s, t_axis, h[t_axis])


def apply_cr_laplacian(u: GridField) -> GridField:
    """CR Laplacian ``L`` on a grid over ``(x_1, y_1, ..., x_n, y_n, t)``."""
    pairs = (u.ndim - 1) // 2
    mask = interior_mask(u.dims)
    return u.with_samples(np.where(mask, _cr_laplacian_samples(u, pairs), 0.0), mask)


def apply_L_a(u: GridField, a: float) -> GridField:
    """``|z_n|^2 L u + a (x_n d_xn + y_n d_yn) u``; ``z_n`` is the last pair."""
    pairs = (u.ndim - 1) // 2
    c = _coords(u)
    ix, iy = 2 * pairs - 2, 2 * pairs - 1
    h = u.spacing
    lu = _cr_laplacian_samples(u, pairs)
    euler = c[ix] * _d1(u.samples, ix, h[ix]) + c[iy] * _d1(u.samples, iy, h[iy])
    out = (c[ix] ** 2 + c[iy] ** 2) * lu + a * euler
    mask = interior_mask(u.dims)
    return u.with_samples(np.where(mask, out, 0.0), mask)


def radial_reduced_apply(u: GridField, a: float) -> GridField:
    """``rho^2 (L' + (a+1) rho^-1 d_rho + d_rho^2 + 4 rho^2 d_t^2)``.

    Grid axes ``(x_1, y_1, ..., x_(n-1), y_(n-1), rho, t)``; ``L'`` is the CR
    Laplacian in ``(z', t)``.  The ``rho`` axis must stay away from 0 (use
    a half-cell offset), where the reduced form is singular.
    """
    pairs = (u.ndim - 2) // 2
    c = _coords(u)
    h = u.spacing
    ir, it = u.ndim - 2, u.ndim - 1
    rho = c[ir]
    s = u.samples
    lp = _cr_laplacian_samples(u, pairs, it)
    out = rho ** 2 * (lp + (a + 1.0) / rho * _d1(s, ir, h[ir]) + _d2(s, ir, h[ir])
                      + 4.0 * rho ** 2 * _d2(s, it, h[it]))
    mask = interior_mask(u.dims)
    return u.with_samples(np.where(mask, out, 0.0), mask)


def biradial_reduced_apply(u: GridField, n: int, a: float) -> GridField:
    """``L_a`` on functions of ``(R, rho, t)`` with ``R = |z'|``, ``rho = |z_n|``.

    For ``u`` invariant under unitary rotations of ``z'`` the reduced
    operator is ``rho^2 (d_R^2 + (2n-3)/R d_R + 4 R^2 d_t^2 + d_rho^2
    + (a+1)/rho d_rho + 4 rho^2 d_t^2)``.  ``R`` and ``rho`` axes must avoid 0.
    """
    R, rho, _ = _coords(u)
    h = u.spacing
    s = u.samples
    lp = _d2(s, 0, h[0]) + (2 * n - 3) / R * _d1(s, 0, h[0]) + 4.0 * R ** 2 * _d2(s, 2, h[2])
    out = rho ** 2 * (lp + _d2(s, 1, h[1]) + (a + 1.0) / rho * _d1(s, 1, h[1])
                      + 4.0 * rho ** 2 * _d2(s, 2, h[2]))
    mask = interior_mask(u.dims)
    return u.with_samples(np.where(mask, out, 0.0), mask)
