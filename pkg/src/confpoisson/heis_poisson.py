"""Heisenberg Poisson transforms and the Fock-coefficient series.

The boundary ``H^(2n-1)`` is embedded in ``H^(2n+1)`` as ``z_n = 0``.  Boundary
points are arrays ``(..., 2n-1)`` ordered ``(x_1, y_1, ..., x_(n-1), y_(n-1), t)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from . import quadrature as quad
from .euclid_poisson import ToleranceNotMet
from .heis_core import embed_boundary, heis_inv, heis_mul, koranyi_norm
from .params import ModelParams, ParameterRangeError
from .specfun import c_heis, gamma_fn, gamma_ratio, gauss_2f1


@dataclass(frozen=True)
class HeisBoundaryData:
    """Function on ``H^(2n-1)``.

    Attributes
    ----------
    func : callable
        ``func(zp, t)`` with ``zp`` of shape ``(..., 2n-2)`` and ``t`` of
        shape ``(...)``.
    invariant : callable or None
        ``invariant(R2, t)`` with ``R2 = |z'|^2`` when the function only
        depends on ``|z'|`` and ``t``.  Enables a cheaper quadrature.
    """

    func: Callable[[np.ndarray, np.ndarray], np.ndarray]
    invariant: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None

    def __call__(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, float)
        return self.func(q[..., :-1], q[..., -1])


def from_invariant(g: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> HeisBoundaryData:
    """Boundary data ``(z', t) -> g(|z'|^2, t)``."""
    return HeisBoundaryData(lambda zp, t: g(np.sum(zp * zp, axis=-1), t), g)


def heis_constant_one() -> HeisBoundaryData:
    return from_invariant(lambda r2, t: np.ones(np.broadcast(r2, t).shape))


def heis_kinv_boundary(params: ModelParams) -> HeisBoundaryData:
    """``((1 + |z'|^2)^2 + t^2)^(-(a+2n)/4)``."""
    e = -(params.a + 2 * params.n) / 4.0
    return from_invariant(lambda r2, t: ((1.0 + r2) ** 2 + t * t) ** e)


def heis_gaussian(center_t: float = 0.0, width_z: float = 1.0, width_t: float = 1.0) -> HeisBoundaryData:
    """``exp(-|z'|^2/w_z^2 - (t - t0)^2/w_t^2)``."""
    return from_invariant(lambda r2, t: np.exp(-r2 / width_z ** 2 - (t - center_t) ** 2 / width_t ** 2))


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------

def heis_poisson_kernel(p: np.ndarray, q: np.ndarray, params: ModelParams,
                        k: int = 0, constant: Optional[float] = None) -> np.ndarray:
    """``c |z_n|^(-a-2k) / |(z,t)^-1 (z', 0, t')|^(2n-a-4k)``.

    ``p`` is a point of ``H^(2n+1)``, ``q`` a point of ``H^(2n-1)``.  For
    ``k = 0`` the constant defaults to the normalisation ``c_heis``.
    """
    n, a = params.n, params.a
    p = np.asarray(p, float)
    if constant is None:
        if k != 0:
            raise ValueError("supply the constant for k > 0")
        constant = c_heis(n, a)
    zn2 = p[..., -3] ** 2 + p[..., -2] ** 2
    d = koranyi_norm(heis_mul(heis_inv(p), embed_boundary(q)))
    return constant * zn2 ** ((-a - 2 * k) / 2.0) / d ** (2 * n - a - 4 * k)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _disk_rule(m: int, level: int, res: int):
    """Push-forward of the uniform measure on ``S^m`` (``m >= 3``) to the
    disk spanned by two coordinates: density ``(1 - |c|^2)^((m-3)/2)``.

    Returns ``(c1, c2, w, w_coarse)`` with total weight ``vol(S^m)``.
    """
    s_rule = quad.tanh_sinh(0.0, 1.0, level, endpoint_exponent=0.0)
    th = quad.periodic_trapezoid(0.0, 2.0 * math.pi, res)
    dens = 0.5 * s_rule.d_hi ** ((m - 3) / 2.0)
    norm = quad.sphere_volume(m) / (math.pi * 2.0 / (m - 1))
    r = np.sqrt(s_rule.x)
    c1 = np.outer(r, np.cos(th.x)).ravel()
    c2 = np.outer(r, np.sin(th.x)).ravel()
    w = norm * np.outer(s_rule.w * dens, th.w).ravel()
    wc = norm * np.outer(s_rule.w_coarse * dens, th.w_coarse).ravel()
    return c1, c2, w, wc


def _angular_rule(f: HeisBoundaryData, n: int, ang_level: int, ang_res: int, axial: bool = False):
    """Angular nodes: either the full sphere ``S^(2n-3)`` or, for invariant
    ``f``, the two coordinates ``(w . e1, w . J e1)`` that ``f`` sees.  On
    the axis ``z_par = 0`` invariant data do not see the angle at all."""
    m = 2 * n - 3
    if axial:
        vol = np.array([quad.sphere_volume(m)])
        return np.zeros((1, 2)), vol, vol.copy()
    if f.invariant is None:
        sph = quad.sphere_rule(m, ang_res)
        return sph.points, sph.w, sph.w_coarse
    if m == 1:
        th = quad.periodic_trapezoid(0.0, 2.0 * math.pi, ang_res)
        c1, c2, w, wc = np.cos(th.x), np.sin(th.x), th.w, th.w_coarse
    else:
        c1, c2, w, wc = _disk_rule(m, max(2, ang_level - 1), ang_res)
    return np.stack([c1, c2], axis=1), w, wc


def _heis_integral(f: HeisBoundaryData, pts: np.ndarray, n: int, phi_exp: float,
                   psi_exp: float, tol: float, level: int, ang_res: int,
                   max_level: int = 7, budget: int = 2_000_000,
                   axial: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """Compactified boundary integral.

    With ``rho = |z_n|`` substitute ``z' = z_par + rho tan(phi) w`` and
    ``t' = t + 2 Im(z_par . conj(z')) + rho^2 sec^2(phi) tan(psi)``; then
    ``d(z', t')`` against the kernel becomes
    ``sin^(2n-3)(phi) cos^phi_exp(phi) cos^psi_exp(psi) dw dphi dpsi``.

    The angular and the ``(phi, psi)`` rules carry separate nested error
    estimates and are refined independently.
    """
    pts = np.atleast_2d(np.asarray(pts, float))
    m = 2 * n - 3
    zpar = pts[:, : 2 * n - 2]
    rho = np.hypot(pts[:, -3], pts[:, -2])
    t = pts[:, -1]
    zabs = np.sqrt(np.sum(zpar ** 2, axis=-1))
    out = np.zeros(len(pts))
    err = np.zeros(len(pts))
    todo = np.arange(len(pts))
    ang_level = level
    while True:
        prule = quad.tanh_sinh(0.0, 0.5 * math.pi, level, endpoint_exponent=min(phi_exp, 0.0))
        srule = quad.tanh_sinh(-0.5 * math.pi, 0.5 * math.pi, level, endpoint_exponent=min(psi_exp, 0.0))
        cphi, sphi = np.sin(prule.d_hi), np.sin(prule.d_lo)
        cpsi = np.sin(np.minimum(srule.d_lo, srule.d_hi))
        tanpsi = np.sin(srule.x) / cpsi
        wphi = sphi ** m * cphi ** phi_exp
        wpsi = cpsi ** psi_exp
        tanphi = sphi / cphi
        om, wa, wac = _angular_rule(f, n, ang_level, ang_res, axial)
        na, nf, ns = wa.size, prule.size, srule.size
        full = np.zeros(len(todo))
        e_ang = np.zeros(len(todo))
        e_rad = np.zeros(len(todo))
        per_point = na * nf * ns
        pstep = max(1, budget // per_point)
        fstep = max(1, min(nf, budget // (na * ns)))
        for p0 in range(0, len(todo), pstep):
            idx = todo[p0:p0 + pstep]
            loc = slice(p0, p0 + len(idx))
            acc = np.zeros((3, len(idx)))
            for f0 in range(0, nf, fstep):
                fs = slice(f0, f0 + fstep)
                r = rho[idx, None, None, None] * tanphi[None, None, fs, None]
                tau = (rho[idx, None, None, None] ** 2 / cphi[None, None, fs, None] ** 2
                       * tanpsi[None, None, None, :])
                if f.invariant is not None:
                    za = zabs[idx, None, None, None]
                    c1 = om[None, :, 0, None, None]
                    c2 = om[None, :, 1, None, None]
                    r2 = np.maximum(za * za + 2.0 * za * r * c1 + r * r, 0.0)
                    tp = t[idx, None, None, None] - 2.0 * za * r * c2 + tau
                    vals = f.invariant(r2, tp)
                else:
                    zp = zpar[idx, None, None, None, :] + r[..., None] * om[None, :, None, None, :]
                    x, y = zpar[idx, 0::2], zpar[idx, 1::2]
                    ox, oy = om[:, 0::2], om[:, 1::2]
                    sym = (y[:, None, :] * ox[None] - x[:, None, :] * oy[None]).sum(-1)
                    tp = t[idx, None, None, None] + 2.0 * r * sym[:, :, None, None] + tau
                    zp = np.broadcast_to(zp, tp.shape + (2 * n - 2,))
                    vals = f.func(zp, tp)
                vals = np.broadcast_to(vals, (len(idx), na, len(tanphi[fs]), ns))
                vals = vals * wpsi * wphi[fs, None]
                inner = vals @ srule.w                      # (P, A, F)
                inner_c = vals @ srule.w_coarse
                acc[0] += (inner @ prule.w[fs]) @ wa
                acc[1] += (inner @ prule.w[fs]) @ wac
                acc[2] += (inner_c @ prule.w_coarse[fs]) @ wa
            full[loc] = acc[0]
            e_ang[loc] = np.abs(acc[0] - acc[1])
            e_rad[loc] = np.abs(acc[0] - acc[2])
        out[todo] = full
        err[todo] = e_ang + e_rad
        scale = tol * np.maximum(1.0, np.abs(full))
        bad_ang = e_ang > scale
        bad_rad = e_rad > scale
        bad = bad_ang | bad_rad
        if not np.any(bad):
            return out, err
        stuck = ((np.any(bad_rad) and level >= max_level)
                 or (np.any(bad_ang) and ang_level >= max_level))
        if stuck:
            raise ToleranceNotMet(
                f"quadrature error {err[todo].max():.3e} above tol {tol:.1e}", float(err[todo].max()))
        if np.any(bad_rad):
            level += 1
        if np.any(bad_ang):
            ang_level += 1
            ang_res *= 2
        todo = todo[bad]


def _integral_split(f, pts, n, phi_exp, psi_exp, tol, level, ang_res):
    """Route invariant data at ``z_par = 0`` to the one-node angular rule."""
    vals = np.zeros(len(pts))
    err = np.zeros(len(pts))
    axial = np.zeros(len(pts), bool)
    if f.invariant is not None:
        axial = ~np.any(pts[:, : 2 * n - 2] != 0.0, axis=1)
    for mask, ax in ((axial, True), (~axial, False)):
        if np.any(mask):
            vals[mask], err[mask] = _heis_integral(f, pts[mask], n, phi_exp, psi_exp, tol,
                                                   level, ang_res, axial=ax)
    return vals, err


def heis_poisson_transform(f: HeisBoundaryData, points: np.ndarray, params: ModelParams,
                           tol: float = 1e-10, level: int = 3, ang_res: int = 32,
                           return_error: bool = False):
    """``P_a f`` at points of ``H^(2n+1)`` (shape ``(P, 2n+1)``) by quadrature.

    Points with ``z_n = 0`` return ``f`` itself.  ``n = 2`` handles any
    ``f``; for ``n >= 3`` a general ``f`` uses a full sphere rule (slow),
    while ``f`` with an ``invariant`` form uses a two-dimensional reduction,
    which is exact and cheap on the axis ``z' = 0``.
    """
    params.require_formula_range()
    n, a = params.n, params.a
    pts = np.atleast_2d(np.asarray(points, float))
    vals, err = _integral_split(f, pts, n, -1.0 - a, n - 2.0 - a / 2.0, tol, level, ang_res)
    c = c_heis(n, a)
    vals, err = c * vals, c * err
    on = (pts[:, -3] == 0.0) & (pts[:, -2] == 0.0)
    if np.any(on):
        q = np.concatenate([pts[on, : 2 * n - 2], pts[on, -1:]], axis=1)
        vals[on] = f(q)
        err[on] = 0.0
    return (vals, err) if return_error else vals


def higher_poisson_heis_unnormalised(f: HeisBoundaryData, k: int, points: np.ndarray,
                                     params: ModelParams, tol: float = 1e-10, level: int = 3,
                                     ang_res: int = 32, return_error: bool = False):
    """Order-``k`` transform with kernel constant 1; needs ``-2n < a < -4k``."""
    n, a = params.n, params.a
    if not (-2 * n < a < -4 * k):
        raise ParameterRangeError(f"need -2n < a < -4k, got n={n}, a={a}, k={k}")
    pts = np.atleast_2d(np.asarray(points, float))
    vals, err = _integral_split(f, pts, n, -1.0 - a - 4.0 * k, n - 2.0 - a / 2.0 - 2.0 * k,
                                tol, level, ang_res)
    rho2 = pts[:, -3] ** 2 + pts[:, -2] ** 2
    fac = rho2 ** k
    return (fac * vals, fac * err) if return_error else fac * vals


def higher_poisson_heis(f: HeisBoundaryData, k: int, points: np.ndarray, params: ModelParams,
                        constant: Optional[float] = None, **kw):
    """``P_{a,k} f``; the constant defaults to :func:`higher_constant_leading`."""
    if constant is None:
        constant = c_heis(params.n, params.a) if k == 0 else higher_constant_leading(params, k)
    out = higher_poisson_heis_unnormalised(f, k, points, params, **kw)
    if isinstance(out, tuple):
        return constant * out[0], constant * out[1]
    return constant * out


def higher_moment(params: ModelParams, k: int) -> float:
    """``M = lim u(z', rho, t') / (rho^2k f(z', t'))`` for the unnormalised
    order-``k`` transform: the integral of ``|(w, 1, tau)|^-(2n-a-4k)`` over
    ``H^(2n-1)``.
    """
    n, a = params.n, params.a
    g = (2 * n - a - 4 * k) / 4.0
    return (math.pi ** (n - 1) * math.sqrt(math.pi) * gamma_ratio((g - 0.5,), (g,))
            * gamma_ratio((2 * g - n,), (2 * g - 1,)))


def higher_constant_leading(params: ModelParams, k: int = 1) -> float:
    """Constant ``c_{n,a,1}`` with ``D_{a,1} P_{a,1} = id`` from the leading
    behaviour of the kernel as ``z_n -> 0``.

    ``D_{a,1}`` at ``z_n = 0`` reduces to ``(2s+n-1) Delta_(z_n) / (16 s^2 (2s+n))``
    with ``s = -(a+2n)/4`` because ``L' u`` vanishes there, and
    ``Delta_(z_n) (M rho^2 f) = 4 M f``.
    """
    if k != 1:
        raise NotImplementedError("leading-order constant only derived for k = 1")
    n = params.n
    s = -(params.a + 2 * n) / 4.0
    return 16.0 * s * s * (2 * s + n) / (4.0 * higher_moment(params, 1) * (2 * s + n - 1))


def kernel_mass_heis(p: np.ndarray, params: ModelParams, tol: float = 1e-12) -> np.ndarray:
    return heis_poisson_transform(heis_constant_one(), p, params, tol=tol)


def kinv_prefactor_heis(params: ModelParams) -> float:
    n, a = params.n, params.a
    return (2.0 ** ((a + 2 * n) / 2.0) * math.pi ** (n - 0.5) * gamma_fn(n - 0.5)
            / gamma_fn(2 * n - 1.0) * c_heis(n, a))


def kinv_solution_heis(p: np.ndarray, params: ModelParams) -> np.ndarray:
    """Closed form of ``P_a f`` for ``f = ((1+|z'|^2)^2 + t'^2)^(-(a+2n)/4)``."""
    params.require_formula_range()
    n, a = params.n, params.a
    p = np.atleast_2d(np.asarray(p, float))
    r2 = np.sum(p[:, :-1] ** 2, axis=-1)
    zn2 = p[:, -3] ** 2 + p[:, -2] ** 2
    q = (1.0 + r2) ** 2 + p[:, -1] ** 2
    arg = 1.0 - 4.0 * zn2 / q
    al = (a + 2 * n) / 4.0
    hyp = np.array([gauss_2f1(al, al, float(n), float(min(w, 1.0))) for w in arg])
    out = kinv_prefactor_heis(params) * hyp * q ** (-al)
    on = zn2 == 0.0
    out[on] = q[on] ** (-al)
    return out


def kinv_unit_value_heis(params: ModelParams) -> float:
    """Independent value of ``P_a f`` at ``(0, z_n, 0)``, ``|z_n| = 1``:
    ``pi^(n-1) B(1/2, n-1/2) B(n-1, n) / Gamma(n-1) * c``."""
    n = params.n
    b1 = gamma_ratio((0.5, n - 0.5), (float(n),))
    b2 = gamma_ratio((n - 1.0, float(n)), (2.0 * n - 1.0,))
    return math.pi ** (n - 1) * b1 * b2 / gamma_fn(n - 1.0) * c_heis(n, params.a)


# ---------------------------------------------------------------------------
# Fock-coefficient series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialCoeffSeq:
    """Normalised Fock coefficients ``T[0..M]`` of mode ``k`` (``T[0] = 1``)."""

    k: int
    a: float
    n: int
    values: np.ndarray

    @property
    def M(self) -> int:
        return self.values.size - 1


def _series_params(k: int, params: ModelParams) -> Tuple[float, float]:
    n, a = params.n, params.a
    return k + n / 2.0 + a / 4.0, k + n / 2.0 - a / 4.0 + 1.0


def radial_coeffs(k: int, M: int, params: ModelParams) -> RadialCoeffSeq:
    """``T[l] = (x)_l / (y)_l``, ``x = k + n/2 + a/4``, ``y = k + n/2 - a/4 + 1``."""
    params.require_dirichlet()
    if M < 1:
        raise ValueError("M must be >= 1")
    x, y = _series_params(k, params)
    ratios = (x + np.arange(M)) / (y + np.arange(M))
    vals = np.concatenate(([1.0], np.cumprod(ratios)))
    return RadialCoeffSeq(k, params.a, params.n, vals)


def recursion_rows(seq: RadialCoeffSeq) -> np.ndarray:
    """Three-term recursion evaluated at ``l = 0..M-1`` (``T[-1] = 0``)."""
    T = seq.values
    k, n, a = seq.k, seq.n, seq.a
    ell = np.arange(seq.M, dtype=float)
    prev = np.concatenate(([0.0], T[:-2]))
    return ((ell + 1) * (2 * (2 * k + 2 * ell + n + 2) - a) * T[1:]
            - (2 * (2 * ell + 1) * (2 * k + 2 * ell + n) + a) * T[:-1]
            + ell * (2 * (2 * k + 2 * ell + n - 2) + a) * prev)


def recursion_residual(seq: RadialCoeffSeq) -> float:
    """Largest recursion residual, relative to the largest coefficient.

    Each row is scaled by the size of its largest term, so that the
    residual measures cancellation error rather than the growth of the
    polynomial coefficients in ``l``.
    """
    T = seq.values
    k, n, a = seq.k, seq.n, seq.a
    ell = np.arange(seq.M, dtype=float)
    prev = np.concatenate(([0.0], T[:-2]))
    scale = np.maximum.reduce([
        np.abs((ell + 1) * (2 * (2 * k + 2 * ell + n + 2) - a) * T[1:]),
        np.abs((2 * (2 * ell + 1) * (2 * k + 2 * ell + n) + a) * T[:-1]),
        np.abs(ell * (2 * (2 * k + 2 * ell + n - 2) + a) * prev)])
    rows = recursion_rows(seq)
    return float(np.max(np.abs(rows) / scale))


_STIRLING = (1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0)


def _log_ratio_scaled(x: float, y: float, q: np.ndarray) -> np.ndarray:
    """``log(Gamma(x+m) / Gamma(y+m)) + (y-x) log m`` with ``q = 1/m``.

    Stirling series written with ``log1p`` so it stays accurate for huge
    ``m`` (including ``q = 0``); intended for ``m >= 64``.
    """
    q = np.asarray(q, float)
    qs = np.where(q > 0, q, 1.0)

    def part(c):
        # (c + m - 1/2) log(1 + c/m) - c, plus the Stirling corrections
        lp = np.log1p(c * qs)
        main = np.where(q > 0, (c - 0.5) * lp + lp / qs - c, 0.0)
        iz = q / (1.0 + c * q)
        corr = sum(coef * iz ** (2 * j + 1) for j, coef in enumerate(_STIRLING))
        return main + corr
    return part(x) - part(y)


def _tail_euler_maclaurin(x: float, y: float, M: int) -> Tuple[float, float]:
    """``sum_(m >= M) (x)_m / (y)_m`` by Euler-Maclaurin on the gamma ratio.

    The summand ``g(m) = Gamma(y) Gamma(x+m) / (Gamma(x) Gamma(y+m))`` is a
    smooth function of ``m``; the tail is ``int_M^inf g + g(M)/2 - g'(M)/12
    + g'''(M)/720``.  The integral uses ``m = M w^(-1/(y-x-1))`` with
    ``0 < w <= 1``, which turns the algebraic decay into a bounded integrand.
    Returns ``(tail, error estimate)``.
    """
    from scipy.special import digamma, gammaln, polygamma

    e = y - x - 1.0
    log_front = gammaln(y) - gammaln(x)

    def h(q):
        return np.exp(log_front + _log_ratio_scaled(x, y, q))

    def integrand(rule):
        q = np.exp(np.log(rule.x) / e) / M
        return h(q)
    integral, ierr = quad.integrate_adaptive(integrand, 0.0, 1.0, tol=1e-15, max_level=10)
    scale = M ** (-e) / e
    gM = float(h(1.0 / M)) * M ** (x - y)
    d1 = float(digamma(x + M) - digamma(y + M))
    d2 = float(polygamma(1, x + M) - polygamma(1, y + M))
    d3 = float(polygamma(2, x + M) - polygamma(2, y + M))
    g1 = gM * d1
    g3 = gM * (d1 ** 3 + 3 * d1 * d2 + d3)
    tail = scale * float(integral) + gM / 2.0 - g1 / 12.0 + g3 / 720.0
    nxt = abs(gM) * abs(y - x) ** 5 / (30240.0 * M ** 5)
    return tail, nxt + scale * float(ierr)


def pochhammer_series_sum(x: float, y: float, M: int) -> Tuple[float, float]:
    """``sum_m (x)_m / (y)_m``: at least ``M`` explicit terms plus an
    Euler-Maclaurin tail.

    Returns ``(value, tail error estimate)``.  Requires ``y - x > 1``.
    """
    if not y - x > 1.0:
        raise ValueError("series diverges unless y - x > 1")
    M = max(int(M), 64, int(4 * max(abs(x), abs(y))))
    ratios = (x + np.arange(M - 1)) / (y + np.arange(M - 1))
    terms = np.concatenate(([1.0], np.cumprod(ratios)))
    head = math.fsum(terms)
    tail, bound = _tail_euler_maclaurin(x, y, M)
    return head + tail, bound


def partial_trace_factor(k: int, M: int, params: ModelParams) -> float:
    """``sum_l T[l]`` for mode ``k`` (truncated at ``M`` plus tail)."""
    params.require_dirichlet()
    x, y = _series_params(k, params)
    val, _ = pochhammer_series_sum(x, y, M)
    return val


def partial_trace_closed(k: int, params: ModelParams) -> float:
    return (params.a - 2 * params.n - 4 * k) / (2.0 * params.a)


def solution_mode_weight(k: int, M: int, params: ModelParams) -> float:
    """Sobolev mass of mode ``k`` of ``P_a f`` per unit boundary coefficient.

    Assembled from the solution-side weight ``(1+n/2-a/4)_m / (n/2+a/4)_m``
    of ``H^(2n+1)``, the coefficients ``T[m-k]`` and the normalisation
    ``T[0] = a / (a - 2n - 4k) * pi / |mu|``; after reindexing with
    ``(x)_(m+k) = (x)_k (x+k)_m`` the inner sum is the Pochhammer series.
    """
    n, a = params.n, params.a
    alpha = 1.0 + n / 2.0 - a / 4.0
    beta = n / 2.0 + a / 4.0
    x, y = _series_params(k, params)
    inner, _ = pochhammer_series_sum(x, y, M)
    outer = math.exp(math.lgamma(alpha + k) - math.lgamma(alpha)
                     - math.lgamma(beta + k) + math.lgamma(beta))
    return (2.0 ** (n - 1) * a * a / math.pi ** (n - 1)
            * outer / (4.0 * k + 2.0 * n - a) ** 2 * inner)


def boundary_mode_weight(k: int, params: ModelParams) -> float:
    """Sobolev weight of mode ``k`` on ``H^(2n-1)`` at order ``-a/2``:
    ``2^(n-2) / pi^n (n/2 - a/4)_k / (n/2 + a/4)_k``."""
    n, a = params.n, params.a
    p = n / 2.0 - a / 4.0
    q = n / 2.0 + a / 4.0
    return (2.0 ** (n - 2) / math.pi ** n
            * math.exp(math.lgamma(p + k) - math.lgamma(p) - math.lgamma(q + k) + math.lgamma(q)))


def isometry_weight_ratio(k: int, M: int, params: ModelParams) -> float:
    """Ratio of solution-side to boundary-side Sobolev weight of mode ``k``."""
    params.require_dirichlet()
    return solution_mode_weight(k, M, params) / boundary_mode_weight(k, params)
