"""Nested quadrature rules for the improper Poisson integrals.

Every rule here is *nested*: the nodes of the rule with half the resolution
are the even-indexed nodes of the full rule.  A product rule therefore gives
a free error estimate by comparing the full sum with the sum over the
coarse sub-grid (see :func:`product_integral`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np
from scipy.special import roots_gegenbauer


@dataclass(frozen=True)
class Rule1D:
    """A one-dimensional rule on ``(lo, hi)``.

    Attributes
    ----------
    x : ndarray
        Nodes.
    w : ndarray
        Weights of the full rule.
    w_coarse : ndarray
        Weights of the nested half-resolution rule (zero on dropped nodes).
    d_lo, d_hi : ndarray
        Distances ``x - lo`` and ``hi - x`` computed without cancellation, so
        endpoint-singular factors such as ``cos(x)^(-a)`` near ``pi/2`` can be
        evaluated as ``sin(d_hi)^(-a)``.
    """

    x: np.ndarray
    w: np.ndarray
    w_coarse: np.ndarray
    d_lo: np.ndarray
    d_hi: np.ndarray

    @property
    def size(self) -> int:
        return self.x.size


def tanh_sinh_tmax(endpoint_exponent: float = 0.0, tiny: float = 1e-20) -> float:
    """Truncation point of the tanh-sinh parameter.

    Chosen so that ``weight * dist^e`` falls below ``tiny`` for an integrand
    behaving like ``dist^e`` (``e > -1``) at the endpoints.
    """
    e = max(min(endpoint_exponent, 0.0), -0.999)
    u = -math.log(tiny) / (2.0 * (1.0 + e))
    return math.asinh(2.0 * u / math.pi)


def tanh_sinh(lo: float, hi: float, level: int, endpoint_exponent: float = 0.0) -> Rule1D:
    """Tanh-sinh rule with step ``2^-level`` on ``(lo, hi)``.

    ``level >= 1`` so that the nested coarse rule (step ``2^(1-level)``)
    exists.  Node count is about ``2 * tmax * 2^level``.
    """
    if level < 1:
        raise ValueError("level must be >= 1")
    h = 2.0 ** (-level)
    tmax = tanh_sinh_tmax(endpoint_exponent)
    kmax = int(math.ceil(tmax / (2 * h))) * 2
    k = np.arange(-kmax, kmax + 1)
    t = k * h
    u = 0.5 * math.pi * np.sinh(t)
    with np.errstate(over="ignore"):
        # 1 - tanh(u) = 2 / (exp(2u) + 1), accurate for large u
        one_minus = 2.0 / (np.exp(2.0 * u) + 1.0)
        one_plus = 2.0 / (np.exp(-2.0 * u) + 1.0)
        dw = 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2
    half = 0.5 * (hi - lo)
    w = h * half * dw
    wc = np.where(k % 2 == 0, 2.0 * w, 0.0)
    d_lo = half * one_plus
    d_hi = half * one_minus
    keep = (d_lo > 0) & (d_hi > 0)
    return Rule1D(lo + d_lo[keep], w[keep], wc[keep], d_lo[keep], d_hi[keep])


def periodic_trapezoid(lo: float, hi: float, m: int) -> Rule1D:
    """Trapezoid rule with ``m`` (even) points for periodic integrands."""
    if m % 2:
        m += 1
    x = lo + (hi - lo) * np.arange(m) / m
    w = np.full(m, (hi - lo) / m)
    wc = np.where(np.arange(m) % 2 == 0, 2.0 * w, 0.0)
    return Rule1D(x, w, wc, x - lo, hi - x)


@dataclass(frozen=True)
class SphereRule:
    """Nodes on the unit sphere ``S^m`` in ``R^(m+1)`` with nested weights."""

    points: np.ndarray          # shape (N, m+1)
    w: np.ndarray
    w_coarse: np.ndarray

    @property
    def size(self) -> int:
        return self.w.size


def sphere_volume(m: int) -> float:
    """Surface area of ``S^m``."""
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def sphere_rule(m: int, resolution: int) -> SphereRule:
    """Product rule on ``S^m``.

    ``S^0`` is the pair ``{-1, +1}``.  ``S^1`` uses the periodic trapezoid
    rule with ``resolution`` points.  For ``m >= 2`` the polar coordinate
    ``x = cos(theta)`` gets a Gauss-Gegenbauer rule for the weight
    ``(1 - x^2)^((m-2)/2)`` with ``resolution // 2`` nodes and the remaining
    ``S^(m-1)`` is handled recursively.

    Gauss rules are not nested, so the half-size polar rule is stored next
    to the full one: ``w`` vanishes on its nodes and ``w_coarse`` vanishes
    on the full rule's nodes.
    """
    if m == 0:
        pts = np.array([[1.0], [-1.0]])
        w = np.ones(2)
        return SphereRule(pts, w, w.copy())
    if m == 1:
        r = periodic_trapezoid(0.0, 2.0 * math.pi, resolution)
        pts = np.stack([np.cos(r.x), np.sin(r.x)], axis=1)
        return SphereRule(pts, r.w, r.w_coarse)
    nf = max(4, resolution // 2)
    alpha = (m - 1) / 2.0
    xf, wf = roots_gegenbauer(nf, alpha)
    xc, wc = roots_gegenbauer(nf // 2, alpha)
    x = np.concatenate([xf, xc])
    w_full = np.concatenate([wf, np.zeros_like(wc)])
    w_crs = np.concatenate([np.zeros_like(wf), wc])
    sub = sphere_rule(m - 1, resolution)
    s = np.sqrt(np.maximum(1.0 - x * x, 0.0))
    pts = np.concatenate([
        np.repeat(x, sub.size)[:, None],
        np.kron(s[:, None], sub.points)], axis=1)
    return SphereRule(pts, np.kron(w_full, sub.w), np.kron(w_crs, sub.w_coarse))


def product_integral(values: np.ndarray, weights: Sequence[np.ndarray],
                     coarse: Sequence[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    """Contract the trailing axes of ``values`` against a product rule.

    Parameters
    ----------
    values : ndarray
        Integrand samples; the last ``len(weights)`` axes index the nodes of
        the respective one-dimensional rules.
    weights, coarse : sequence of ndarray
        Full and nested-coarse weights per axis.

    Returns
    -------
    integral, error : ndarray
        Full-rule result and ``|full - coarse|`` as an error estimate.
    """
    full = values
    crs = values
    for w, wc in zip(reversed(list(weights)), reversed(list(coarse))):
        full = full @ w
        crs = crs @ wc
    return full, np.abs(full - crs)


def integrate_adaptive(func: Callable[[Rule1D], np.ndarray], lo: float, hi: float,
                       tol: float = 1e-12, endpoint_exponent: float = 0.0,
                       start_level: int = 3, max_level: int = 9) -> Tuple[np.ndarray, np.ndarray]:
    """Refine a tanh-sinh rule until successive levels agree to ``tol``.

    ``func`` receives a :class:`Rule1D` and returns samples with the node
    axis last.  The relative/absolute mix is ``tol * max(1, |I|)``.
    """
    prev = None
    for level in range(start_level, max_level + 1):
        rule = tanh_sinh(lo, hi, level, endpoint_exponent)
        vals = func(rule)
        val = vals @ rule.w
        if prev is not None:
            err = np.abs(val - prev)
            if np.all(err <= tol * np.maximum(1.0, np.abs(val))):
                return val, err
        prev = val
    return val, err


def gauss_legendre(lo: float, hi: float, m: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(m)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def chunked(n_items: int, cost_per_item: int, budget: int = 4_000_000) -> List[slice]:
    """Split ``range(n_items)`` so each chunk touches about ``budget`` nodes."""
    step = max(1, budget // max(cost_per_item, 1))
    return [slice(i, min(i + step, n_items)) for i in range(0, n_items, step)]
