"""Euclidean Poisson transforms for ``Delta_a = x_n^2 Delta + a x_n d_n``.

Two independent realisations of ``P_a`` are provided: direct quadrature of
the kernel integral and a Fourier multiplier acting on sampled boundary data.
Higher transforms ``P_{a,j}``, the boundary operators ``D_{a,j}``, the
continuous family ``P_{a,nu,eps}`` and the profile ODE live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import special as _sp

from . import quadrature as quad
from .euclid_field import GridField, dft, trace_index
from .params import ModelParams, ParameterRangeError
from .specfun import (AccuracyError, c_real, c_real_higher, gamma_fn,
                      gauss_2f1, gegenbauer_two_var, pochhammer)

Evaluable = Callable[[np.ndarray], np.ndarray]


class ToleranceNotMet(AccuracyError):
    """Quadrature refinement stopped before reaching the tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class BoundaryData:
    """Boundary function, either evaluable anywhere or sampled on a grid.

    Attributes
    ----------
    func : callable or None
        Maps an array of points ``(..., dim)`` to values ``(...)``.
    grid : GridField or None
        Samples on a uniform boundary grid.
    decay : float
        Hint for the algebraic decay exponent (``inf`` for Gaussians).
    support_radius : float or None
        Radius of a ball around the origin containing the support, if any.
    """

    func: Optional[Evaluable] = None
    grid: Optional[GridField] = None
    decay: float = math.inf
    support_radius: Optional[float] = None

    @property
    def mode(self) -> str:
        return "closed_form" if self.func is not None else "sampled"

    def __call__(self, y: np.ndarray) -> np.ndarray:
        if self.func is None:
            raise TypeError("sampled boundary data cannot be evaluated off-grid")
        return self.func(y)

    def sample(self, dims: Sequence[int], spacing) -> "BoundaryData":
        g = GridField.centered(dims, spacing, self.func)
        return BoundaryData(self.func, g, self.decay, self.support_radius)


def constant_one() -> BoundaryData:
    return BoundaryData(lambda y: np.ones(np.shape(y)[:-1]), decay=0.0)


def gaussian(center: Sequence[float], widths, amplitude: float = 1.0) -> BoundaryData:
    """``amplitude * exp(-sum ((y - center)/widths)^2 / 2)``."""
    center = np.asarray(center, float)
    widths = np.broadcast_to(np.asarray(widths, float), center.shape)

    def f(y):
        z = (np.asarray(y) - center) / widths
        with np.errstate(over="ignore"):
            return amplitude * np.exp(-0.5 * np.sum(z * z, axis=-1))
    return BoundaryData(f)


def bump(center: Sequence[float], radius: float = 1.0) -> BoundaryData:
    """Smooth compactly supported ``exp(-1/(1-r^2))`` profile."""
    center = np.asarray(center, float)

    def f(y):
        with np.errstate(over="ignore"):
            r2 = np.sum(((np.asarray(y) - center) / radius) ** 2, axis=-1)
        out = np.zeros_like(r2)
        inside = r2 < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
        return out
    return BoundaryData(f, support_radius=float(np.linalg.norm(center)) + radius)


def kinv_boundary(params: ModelParams) -> BoundaryData:
    """``(1 + |y|^2)^(-(a+n-2)/2)``, the boundary value of the invariant solution."""
    e = -(params.a + params.n - 2) / 2.0

    def f(y):
        return (1.0 + np.sum(np.asarray(y) ** 2, axis=-1)) ** e
    return BoundaryData(f, decay=-2 * e)


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def poisson_kernel_real(x: np.ndarray, y: np.ndarray, params: ModelParams) -> np.ndarray:
    """``c |x_n|^(1-a) / (|x' - y|^2 + x_n^2)^((n-a)/2)``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    n, a = params.n, params.a
    xn = x[..., -1]
    r2 = np.sum((x[..., :-1] - y) ** 2, axis=-1)
    return c_real(n, a) * np.abs(xn) ** (1 - a) / (r2 + xn ** 2) ** ((n - a) / 2.0)


def higher_kernel_real(x: np.ndarray, y: np.ndarray, j: int, params: ModelParams) -> np.ndarray:
    """Order-``j`` kernel ``c_j x_n^j |x_n|^(1-a-2j) / (...)^((n-a)/2 - j)``."""
    x = np.asarray(x, float)
    n, a = params.n, params.a
    xn = x[..., -1]
    r2 = np.sum((x[..., :-1] - np.asarray(y, float)) ** 2, axis=-1)
    return (c_real_higher(n, a, j) * xn ** j * np.abs(xn) ** (1 - a - 2 * j)
            / (r2 + xn ** 2) ** ((n - a) / 2.0 - j))


# ---------------------------------------------------------------------------
# Quadrature realisation
# ---------------------------------------------------------------------------

def _cos_sin(rule: quad.Rule1D) -> Tuple[np.ndarray, np.ndarray]:
    """cos and sin of the nodes of a rule on (0, pi/2), endpoint-accurate."""
    return np.sin(rule.d_hi), np.sin(rule.d_lo)


def _compactified(f: BoundaryData, pts: np.ndarray, n: int, cos_exp: complex,
                  tol: float, level: int, sphere_res: int, max_level: int = 8,
                  budget: int = 2_000_000) -> Tuple[np.ndarray, np.ndarray]:
    """``int_{S^(n-2)} int_0^(pi/2) sin^(n-2) cos^e f(x' + |x_n| tan(phi) w)``.

    The substitution ``y = x' + |x_n| tan(phi) w`` maps the boundary onto a
    bounded domain and removes the dependence of the weights on ``x_n``.
    The sphere and polar rules carry separate nested error estimates and are
    refined independently until both are below ``tol``.
    """
    pts = np.atleast_2d(np.asarray(pts, float))
    xp = pts[:, :-1]
    s = np.abs(pts[:, -1])
    m = n - 2
    ce = complex(cos_exp)
    cplx = ce.imag != 0.0
    out = np.zeros(len(pts), complex if cplx else float)
    err = np.zeros(len(pts))
    todo = np.arange(len(pts))
    sph_level = 0
    while True:
        rule = quad.tanh_sinh(0.0, 0.5 * math.pi, level, endpoint_exponent=min(ce.real, 0.0))
        sph = quad.sphere_rule(m, sphere_res)
        c, sn = _cos_sin(rule)
        if cplx:
            wphi = sn ** m * np.exp(ce * np.log(c))
        else:
            wphi = sn ** m * c ** ce.real
        tan = sn / c
        na, nf = sph.size, rule.size
        pstep = max(1, budget // (na * nf * (n - 1)))
        fstep = max(1, min(nf, budget // (na * (n - 1))))
        full = np.zeros(len(todo), out.dtype)
        e_ang = np.zeros(len(todo))
        e_rad = np.zeros(len(todo))
        for p0 in range(0, len(todo), pstep):
            idx = todo[p0:p0 + pstep]
            acc = np.zeros((3, len(idx)), out.dtype)
            for f0 in range(0, nf, fstep):
                fs = slice(f0, f0 + fstep)
                disp = s[idx, None, None] * tan[None, None, fs]               # (P,1,F)
                y = xp[idx, None, None, :] + disp[..., None] * sph.points[None, :, None, :]
                vals = f(y) * wphi[fs]                                         # (P,A,F)
                inner = vals @ rule.w[fs]
                acc[0] += inner @ sph.w
                acc[1] += inner @ sph.w_coarse
                acc[2] += (vals @ rule.w_coarse[fs]) @ sph.w
            loc = slice(p0, p0 + len(idx))
            full[loc] = acc[0]
            e_ang[loc] = np.abs(acc[0] - acc[1])
            e_rad[loc] = np.abs(acc[0] - acc[2])
        out[todo] = full
        err[todo] = e_ang + e_rad
        scale = tol * np.maximum(1.0, np.abs(full))
        bad_ang = e_ang > scale
        bad_rad = e_rad > scale
        if not np.any(bad_ang | bad_rad):
            return out, err
        if (np.any(bad_rad) and level >= max_level) or (np.any(bad_ang) and sph_level >= max_level - 3):
            worst = float(err[todo].max())
            raise ToleranceNotMet(f"quadrature error {worst:.3e} above tol {tol:.1e}", worst)
        if np.any(bad_rad):
            level += 1
        if np.any(bad_ang):
            sph_level += 1
            sphere_res *= 2
        todo = todo[bad_ang | bad_rad]


def poisson_transform_real(f: BoundaryData, points: np.ndarray, params: ModelParams,
                           tol: float = 1e-10, level: int = 4, sphere_res: int = 32,
                           return_error: bool = False):
    """Evaluate ``u = P_a f`` at ``points`` (shape ``(P, n)``) by quadrature.

    Points on the boundary return ``f`` itself.  Raises
    :class:`ToleranceNotMet` if the nested-rule error estimate stays above
    ``tol`` (relative to ``max(1, |u|)``).
    """
    params.require_formula_range()
    pts = np.atleast_2d(np.asarray(points, float))
    n, a = params.n, params.a
    vals, err = _compactified(f, pts, n, -a, tol, level, sphere_res)
    vals = c_real(n, a) * vals
    err = c_real(n, a) * err
    on = pts[:, -1] == 0.0
    if np.any(on):
        vals[on] = f(pts[on, :-1])
        err[on] = 0.0
    return (vals, err) if return_error else vals


def higher_poisson_real(f: BoundaryData, j: int, points: np.ndarray, params: ModelParams,
                        tol: float = 1e-10, level: int = 4, sphere_res: int = 32,
                        return_error: bool = False):
    """``P_{a,j} f`` by quadrature; requires ``2 - n < a < 1 - 2j``."""
    n, a = params.n, params.a
    if not (2 - n < a < 1 - 2 * j):
        raise ParameterRangeError(f"need 2-n < a < 1-2j, got n={n}, a={a}, j={j}")
    pts = np.atleast_2d(np.asarray(points, float))
    vals, err = _compactified(f, pts, n, -a - 2 * j, tol, level, sphere_res)
    xn = pts[:, -1]
    fac = c_real_higher(n, a, j) * xn ** j
    return (fac * vals, np.abs(fac) * err) if return_error else fac * vals


def continuous_family_real(f: BoundaryData, nu: float, eps: int, points: np.ndarray,
                           params: ModelParams, tol: float = 1e-9, level: int = 5,
                           sphere_res: int = 32, return_error: bool = False):
    """Unnormalised ``P_{a,nu,eps} f`` (complex valued).

    Kernel ``sgn(x_n)^eps |x_n|^((1-a)/2 - i nu) / (|x'-y|^2 + x_n^2)^((n-1)/2 - i nu)``.
    The polar integral carries ``cos^(-1-2 i nu)``, so ``f`` must decay
    fast (Gaussian or compactly supported input).
    """
    n, a = params.n, params.a
    pts = np.atleast_2d(np.asarray(points, float))
    vals, err = _compactified(f, pts, n, complex(-1.0, -2.0 * nu), tol, level, sphere_res)
    xn = pts[:, -1]
    fac = np.sign(xn) ** eps * np.abs(xn) ** complex((1 - a) / 2.0, nu)
    return (fac * vals, np.abs(fac) * err) if return_error else fac * vals


def kernel_mass_real(x: np.ndarray, params: ModelParams, tol: float = 1e-12) -> np.ndarray:
    """``int K(x, y) dy`` by quadrature (equals 1)."""
    return poisson_transform_real(constant_one(), x, params, tol=tol)


# ---------------------------------------------------------------------------
# Closed form for the invariant boundary function
# ---------------------------------------------------------------------------

def kinv_solution_real(x: np.ndarray, params: ModelParams) -> np.ndarray:
    """Closed form of ``P_a f`` for ``f(y) = (1 + |y|^2)^(-(a+n-2)/2)``."""
    params.require_formula_range()
    n, a = params.n, params.a
    x = np.atleast_2d(np.asarray(x, float))
    r2 = np.sum(x * x, axis=-1)
    pref = (2.0 ** ((a + n - 2) / 2.0) * math.pi ** ((n - 1) / 2.0)
            * gamma_fn((n - 1) / 2.0) / gamma_fn(n - 1.0) * c_real(n, a))
    arg = 1.0 - 4.0 * x[:, -1] ** 2 / (1.0 + r2) ** 2
    al, be, ga = (a + n - 2) / 4.0, (a + n) / 4.0, n / 2.0
    hyp = np.array([gauss_2f1(al, be, ga, float(min(w, 1.0))) for w in arg])
    out = pref * hyp * (1.0 + r2) ** ((2 - a - n) / 2.0)
    on = x[:, -1] == 0.0
    out[on] = (1.0 + r2[on]) ** (-(a + n - 2) / 2.0)
    return out


# ---------------------------------------------------------------------------
# Fourier multiplier realisation
# ---------------------------------------------------------------------------

def profile_transform(r: np.ndarray, a: float) -> np.ndarray:
    """``Phi(r) = 2^(1-b) / Gamma(b) r^b K_b(r)`` with ``b = (1-a)/2``.

    The inverse Fourier transform in ``xi_n`` of the normalised profile
    ``(1 + (xi_n/|xi'|)^2)^((a-2)/2)``; ``Phi(0) = 1``.
    """
    b = (1.0 - a) / 2.0
    r = np.abs(np.asarray(r, float))
    out = np.ones_like(r)
    pos = r > 0
    rp = r[pos]
    with np.errstate(under="ignore"):
        out[pos] = 2.0 ** (1 - b) / gamma_fn(b) * rp ** b * _sp.kve(b, rp) * np.exp(-rp)
    return out


def multiplier_constant(a: float) -> float:
    """``sqrt(2) Gamma((2-a)/2) / Gamma((1-a)/2)``."""
    return math.sqrt(2.0) * gamma_fn((2.0 - a) / 2.0) / gamma_fn((1.0 - a) / 2.0)


def multiplier_symbol(xi_p: np.ndarray, xi_n: np.ndarray, a: float) -> np.ndarray:
    """``v / f^`` on the spectral side: ``C |xi'|^-1 (1 + (xi_n/|xi'|)^2)^((a-2)/2)``."""
    k = np.abs(xi_p)
    return multiplier_constant(a) / k * (1.0 + (xi_n / k) ** 2) ** ((a - 2.0) / 2.0)


def poisson_multiplier_real(f: BoundaryData, params: ModelParams, xn_values: Sequence[float]) -> GridField:
    """Solution of the Dirichlet problem via its Fourier multiplier.

    ``f.grid`` is treated as one period of periodic boundary data.  Each
    nonzero boundary frequency ``xi'`` is propagated into the interior by
    ``Phi(|xi'| |x_n|)``, the exact inverse transform in ``xi_n`` of the
    multiplier; the zero mode is carried unchanged (constants are fixed by
    ``P_a``).

    Returns
    -------
    GridField
        Samples on ``f.grid`` times ``xn_values``; the last axis is ``x_n``.
        The ``x_n`` axis is uniform only if ``xn_values`` is.
    """
    params.require_formula_range()
    if f.grid is None:
        raise TypeError("multiplier form needs sampled boundary data")
    g = f.grid
    coeff = np.fft.fftn(g.samples)
    freqs = [2.0 * math.pi * np.fft.fftfreq(d, h) for d, h in zip(g.dims, g.spacing)]
    kabs = np.sqrt(sum(k ** 2 for k in np.meshgrid(*freqs, indexing="ij")))
    xn_values = np.asarray(xn_values, float)
    out = np.empty(g.dims + (xn_values.size,), float)
    for i, t in enumerate(xn_values):
        prof = profile_transform(kabs * abs(t), params.a)
        out[..., i] = np.fft.ifftn(coeff * prof).real
    hn = float(xn_values[1] - xn_values[0]) if xn_values.size > 1 else 1.0
    return GridField(out, g.spacing + (hn,), g.origin + (float(xn_values[0]),),
                     g.names + ("xn",))


def poisson_multiplier_spectrum(f: BoundaryData, params: ModelParams, xi_n: np.ndarray) -> np.ndarray:
    """Spectral samples ``u^(xi', xi_n) = v(xi', xi_n/|xi'|)``.

    Returns an array of shape ``f.grid.dims + (len(xi_n),)``; the zero
    boundary frequency is set to zero.
    """
    spec = dft(f.grid)
    kp = spec.abs_frequency()[..., None]
    xi_n = np.asarray(xi_n, float)
    out = np.zeros(kp.shape[:-1] + (xi_n.size,), complex)
    nz = kp[..., 0] > 0
    out[nz] = spec.coeffs[nz][:, None] * multiplier_symbol(kp[nz], xi_n[None, :], params.a)
    return out


# ---------------------------------------------------------------------------
# Boundary operators
# ---------------------------------------------------------------------------

def boundary_op_coefficients(j: int, a: float):
    """``D_{a,j}`` as a map ``{(p, q): c}`` meaning ``c (-Delta')^p d_n^q``."""
    alpha = (a - 1.0) / 2.0
    poly = gegenbauer_two_var(j, alpha)
    norm_den = 2 ** j * pochhammer(poly.alpha, j)
    if norm_den == 0:
        raise ParameterRangeError(f"D_(a,{j}) normalisation vanishes at a={a}")
    norm = math.factorial(j) / norm_den
    return {pq: norm * c for pq, c in poly.coeffs.items()}


def _neg_laplacian_spectral(slice_: np.ndarray, spacing: Sequence[float], power: int) -> np.ndarray:
    if power == 0:
        return slice_
    freqs = [2.0 * math.pi * np.fft.fftfreq(d, h) for d, h in zip(slice_.shape, spacing)]
    k2 = sum(k ** 2 for k in np.meshgrid(*freqs, indexing="ij"))
    return np.fft.ifftn(np.fft.fftn(slice_) * k2 ** power).real


def _normal_derivative(u: GridField, i0: int, q: int) -> np.ndarray:
    """Central difference of order ``q`` in ``x_n`` at index ``i0``."""
    h = u.spacing[-1]
    s = u.samples
    if q == 0:
        return s[..., i0]
    if q == 1:
        return (s[..., i0 + 1] - s[..., i0 - 1]) / (2 * h)
    if q == 2:
        return (s[..., i0 + 1] - 2 * s[..., i0] + s[..., i0 - 1]) / h ** 2
    if q == 3:
        return (s[..., i0 + 2] - 2 * s[..., i0 + 1] + 2 * s[..., i0 - 1] - s[..., i0 - 2]) / (2 * h ** 3)
    if q == 4:
        return (s[..., i0 + 2] - 4 * s[..., i0 + 1] + 6 * s[..., i0]
                - 4 * s[..., i0 - 1] + s[..., i0 - 2]) / h ** 4
    raise ValueError("normal derivatives above order 4 are not implemented")


def boundary_op_real(u: GridField, j: int, params: ModelParams) -> GridField:
    """``D_{a,j} u = j!/(2^j ((a-1)/2)_j) C_j^((a-1)/2)(-Delta', d_n) u |_(x_n=0)``.

    ``-Delta'`` is applied spectrally on the boundary slices (the boundary
    box is treated as periodic) and ``d_n`` by central differences across the
    slice ``x_n = 0``.
    """
    a = params.a
    if not 0 <= j < (1 - a) / 2.0:
        raise ParameterRangeError(f"need 0 <= j < (1-a)/2, got j={j}, a={a}")
    i0 = trace_index(u)
    coeffs = boundary_op_coefficients(j, a)
    out = 0.0
    for (p, q), c in coeffs.items():
        dq = _normal_derivative(u, i0, q)
        out = out + float(c) * _neg_laplacian_spectral(dq, u.spacing[:-1], p)
    return GridField(np.asarray(out), u.spacing[:-1], u.origin[:-1], u.names[:-1])


# ---------------------------------------------------------------------------
# Profile ODE
# ---------------------------------------------------------------------------

def phi1(z, a: float, deriv: int = 0):
    """``(1 + z^2)^((a-2)/2)`` and its first two derivatives (analytic)."""
    z = np.asarray(z, float)
    e = (a - 2.0) / 2.0
    q = 1.0 + z * z
    if deriv == 0:
        return q ** e
    if deriv == 1:
        return 2.0 * e * z * q ** (e - 1)
    if deriv == 2:
        return 2.0 * e * q ** (e - 1) + 4.0 * e * (e - 1) * z * z * q ** (e - 2)
    raise ValueError("deriv must be 0, 1 or 2")


def phi2(z, a: float, deriv: int = 0, dz: float = 1e-3):
    """``z 2F1(1, (3-a)/2; 3/2; -z^2)``.

    Derivatives use the contiguous relation
    ``d/dw 2F1(a,b;c;w) = ab/c 2F1(a+1,b+1;c+1;w)``.
    """
    z = np.atleast_1d(np.asarray(z, float))
    b = (3.0 - a) / 2.0

    def F(k, w):
        return np.array([gauss_2f1(1.0 + k, b + k, 1.5 + k, wi) for wi in w])

    w = -z * z
    if deriv == 0:
        return z * F(0, w)
    c1 = 1.0 * b / 1.5
    c2 = c1 * 2.0 * (b + 1) / 2.5
    if deriv == 1:
        return F(0, w) - 2.0 * z * z * c1 * F(1, w)
    if deriv == 2:
        return -6.0 * z * c1 * F(1, w) + 4.0 * z ** 3 * c2 * F(2, w)
    raise ValueError("deriv must be 0, 1 or 2")


def ode_operator(phi: Callable, z, a: float) -> np.ndarray:
    """``(1+z^2) phi'' - (a-4) z phi' - (a-2) phi`` with analytic derivatives."""
    z = np.asarray(z, float)
    return (1 + z * z) * phi(z, a, 2) - (a - 4.0) * z * phi(z, a, 1) - (a - 2.0) * phi(z, a, 0)


def ode_check(a: float, branch: str, z) -> np.ndarray:
    """Residuals of the profile ODE on ``phi1`` or ``phi2`` at ``z``."""
    phi = {"phi1": phi1, "phi2": phi2}[branch]
    return ode_operator(phi, z, a)


def phi1_integral(a: float, tol: float = 1e-13) -> Tuple[float, float]:
    """``int_R (1+z^2)^((a-2)/2) dz`` by tanh-sinh after ``z = tan(theta)``.

    With ``z = tan(theta)`` the integrand becomes ``cos(theta)^(-a)`` on
    ``(-pi/2, pi/2)``.  Returns ``(value, error estimate)``.
    """
    if not a < 1:
        raise ParameterRangeError("the integral diverges for a >= 1")

    def g(rule):
        return np.minimum(np.sin(rule.d_lo), np.sin(rule.d_hi)) ** (-a)
    val, err = quad.integrate_adaptive(g, -0.5 * math.pi, 0.5 * math.pi, tol=tol,
                                       endpoint_exponent=-a)
    return float(val), float(err)


def phi1_integral_closed(a: float) -> float:
    return math.sqrt(math.pi) * gamma_fn((1 - a) / 2.0) / gamma_fn((2 - a) / 2.0)


def solution_profile(xi_p: np.ndarray, z: np.ndarray, f_hat: np.ndarray, a: float) -> np.ndarray:
    """``v(xi', z) = C |xi'|^(-1) f^(xi') (1 + z^2)^((a-2)/2)``."""
    return multiplier_constant(a) / np.abs(xi_p) * f_hat * phi1(z, a)
