"""Verification checks for the Euclidean and Heisenberg solvers.

Every check compares a computed quantity against an independent oracle
(a closed form, a second numerical method or an exact identity) and
returns a :class:`CheckRecord`.  A record holds one :class:`Measurement`
per parameter set or sub-identity; its headline values are those of the
worst measurement.

Checks are registered in :data:`CHECKS` under a stable id and grouped
into suites.  :data:`CRITERIA` maps the numbered acceptance criteria to
check ids, one id per criterion.
"""

from __future__ import annotations

import math
import platform
import time
import zlib
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy
from scipy.special import hyp2f1

from . import euclid_poisson as ep
from . import heis_poisson as hp
from . import juhl
from .euclid_field import GridField, apply_delta_a, lp_norm, sobolev_norm, star_stencil_field
from .heis_core import biradial_reduced_apply
from .params import ModelParams, ParameterRangeError, euclidean, heisenberg
from .quadrature import sphere_volume
from .specfun import (AccuracyError, eigenvalue, gauss_2f1, iso_heis, iso_real, lp_bound,
                      lp_exponent, model_constants)

EUCLID = "euclidean"
HEIS = "heisenberg"
FIELDS = (EUCLID, HEIS)


class NotApplicable(Exception):
    """The configured parameters fall outside the range a check needs."""


# ---------------------------------------------------------------------------
# Records
# ---------------------------------------------------------------------------

@dataclass
class Measurement:
    """One compared quantity.

    ``comparison`` selects the pass rule:

    ``abs``  ``|measured - expected| <= tolerance``
    ``rel``  ``|measured - expected| <= tolerance * |expected|``
    ``le``   ``measured <= expected + tolerance``
    ``ge``   ``measured >= expected - tolerance``
    """

    label: str
    measured: float
    expected: float
    tolerance: float
    comparison: str = "abs"

    @property
    def score(self) -> float:
        """Normalised distance to failure; ``<= 1`` passes."""
        m, e, t = float(self.measured), float(self.expected), float(self.tolerance)
        if not (math.isfinite(m) and math.isfinite(e)):
            return math.inf
        if self.comparison == "abs":
            return abs(m - e) / t if t > 0 else (0.0 if m == e else math.inf)
        if self.comparison == "rel":
            d = t * abs(e)
            return abs(m - e) / d if d > 0 else (0.0 if m == e else math.inf)
        if self.comparison == "le":
            lim = e + t
            return m / lim if lim > 0 else (0.0 if m <= lim else math.inf)
        if self.comparison == "ge":
            lim = e - t
            return lim / m if m > 0 else (0.0 if m >= lim else math.inf)
        raise ValueError(f"unknown comparison {self.comparison!r}")

    @property
    def passed(self) -> bool:
        return self.score <= 1.0

    def as_dict(self) -> dict:
        return {"label": self.label, "measured": float(self.measured),
                "expected": float(self.expected), "tolerance": float(self.tolerance),
                "comparison": self.comparison, "passed": self.passed}


@dataclass
class CheckRecord:
    """Outcome of one check.

    ``status`` is ``"pass"``, ``"fail"``, ``"skip"`` (parameters outside
    the check's range) or ``"error"`` (the computation raised).
    """

    check_id: str
    name: str
    anchor: str
    criterion: Optional[int]
    measured: float
    expected: float
    tolerance: float
    comparison: str
    status: str
    runtime: float
    items: List[Measurement] = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != "fail" and self.status != "error"

    def as_dict(self) -> dict:
        """Serializable form without the wall-clock runtime."""
        return {"check_id": self.check_id, "name": self.name, "anchor": self.anchor,
                "criterion": self.criterion, "measured": float(self.measured),
                "expected": float(self.expected), "tolerance": float(self.tolerance),
                "comparison": self.comparison, "status": self.status,
                "items": [m.as_dict() for m in self.items],
                "details": _jsonable(self.details)}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, ModelParams):
        return {"field": obj.field, "n": obj.n, "a": obj.a}
    return obj


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SuiteConfig:
    """Selection and overrides for a verification run.

    Attributes
    ----------
    field : {"euclidean", "heisenberg"} or None
        Restrict checks to one geometry; ``None`` runs both.
    n, a : optional
        Replace the default parameter sets.  With only one given, the
        other ranges over the check's defaults.
    suites : tuple of str
        Suite names (see :data:`SUITES`); empty means every suite of the
        selected field, ``("acceptance",)`` the numbered criteria.
    seed : int
        Seed of all randomized inputs.
    tol : float or None
        Quadrature tolerance override.
    grid : float or None
        Finest grid spacing override.
    box : float or None
        Half-width override for grid-based checks.
    """

    field: Optional[str] = None
    n: Optional[int] = None
    a: Optional[float] = None
    suites: Tuple[str, ...] = ()
    seed: int = 0
    tol: Optional[float] = None
    grid: Optional[float] = None
    box: Optional[float] = None

    def fields(self) -> Tuple[str, ...]:
        return FIELDS if self.field is None else (self.field,)

    def select(self, fld: str, defaults: Sequence[ModelParams]) -> List[ModelParams]:
        """Parameter sets of ``fld`` after applying the ``n``/``a`` overrides."""
        if self.n is None and self.a is None:
            return list(defaults)
        ns = [self.n] if self.n is not None else sorted({p.n for p in defaults})
        As = [self.a] if self.a is not None else sorted({p.a for p in defaults})
        return [ModelParams(fld, n, a) for n in ns for a in As]

    def rng(self, check_id: str) -> np.random.Generator:
        """Generator that depends only on the seed and the check id."""
        return np.random.default_rng([self.seed, zlib.crc32(check_id.encode())])

    def quad_tol(self, default: float) -> float:
        return self.tol if self.tol is not None else default

    def spacing(self, default: float) -> float:
        return self.grid if self.grid is not None else default

    def half_width(self, default: float) -> float:
        return self.box if self.box is not None else default

    def as_dict(self) -> dict:
        return {"field": self.field, "n": self.n, "a": self.a, "suites": list(self.suites),
                "seed": self.seed, "tol": self.tol, "grid": self.grid, "box": self.box}


class ConfigError(ValueError):
    """Invalid run configuration."""


def validate(cfg: SuiteConfig) -> None:
    """Raise :class:`ConfigError` for unknown names or out-of-range parameters."""
    if cfg.field is not None and cfg.field not in FIELDS:
        raise ConfigError(f"unknown field {cfg.field!r}")
    for s in cfg.suites:
        if s not in SUITES and s != "acceptance":
            raise ConfigError(f"unknown suite {s!r}; choose from {sorted(SUITES)} or 'acceptance'")
    for name in ("tol", "grid", "box"):
        v = getattr(cfg, name)
        if v is not None and not v > 0:
            raise ConfigError(f"{name} must be positive")
    if cfg.n is not None or cfg.a is not None:
        for fld in cfg.fields():
            n = cfg.n if cfg.n is not None else 2
            try:
                p = ModelParams(fld, n, cfg.a if cfg.a is not None else -0.5)
                if cfg.a is not None:
                    p.require_selfadjoint()
            except ParameterRangeError as exc:
                raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _finish(check_id: str, items: List[Measurement], t0: float, details: dict) -> CheckRecord:
    spec = CHECKS[check_id]
    runtime = time.perf_counter() - t0
    if not items:
        return CheckRecord(check_id, spec.name, spec.anchor, spec.criterion, math.nan, math.nan,
                           math.nan, "abs", "skip", runtime, [], details)
    failing = [m for m in items if not m.passed]
    worst = failing[0] if failing else max(items, key=lambda m: m.score)
    return CheckRecord(check_id, spec.name, spec.anchor, spec.criterion, worst.measured,
                       worst.expected, worst.tolerance, worst.comparison,
                       "fail" if failing else "pass", runtime, items, details)


def _label(p: ModelParams, extra: str = "") -> str:
    s = f"{'real' if p.euclidean else 'heis'} n={p.n} a={p.a:g}"
    return f"{s} {extra}".strip()


def _heis_point(R, rho, t, n: int) -> np.ndarray:
    """Points ``(R, 0, ..., rho, 0, t)`` of ``H^(2n+1)``."""
    R, rho, t = np.broadcast_arrays(np.asarray(R, float), np.asarray(rho, float),
                                    np.asarray(t, float))
    P = np.zeros(R.shape + (2 * n + 1,))
    P[..., 0] = R
    P[..., -3] = rho
    P[..., -1] = t
    return P.reshape(-1, 2 * n + 1)


def _random_real_points(rng, n: int, count: int) -> np.ndarray:
    xp = rng.uniform(-2.0, 2.0, (count, n - 1))
    xn = rng.uniform(0.1, 2.0, count) * rng.choice([-1.0, 1.0], count)
    return np.column_stack([xp, xn])


def _random_heis_points(rng, n: int, count: int) -> np.ndarray:
    z = rng.uniform(-1.5, 1.5, (count, 2 * n))
    zn = np.hypot(z[:, -2], z[:, -1])
    small = zn < 0.1
    z[small, -2] += 0.2
    t = rng.uniform(-2.0, 2.0, count)
    return np.column_stack([z, t])


def _heis_sweep() -> List[ModelParams]:
    """20 Heisenberg parameter sets spread over the Dirichlet range."""
    return [heisenberg(n, -2.0 * n * frac) for n in (2, 3, 4, 5)
            for frac in (0.1, 0.3, 0.5, 0.7, 0.9)]


# ---------------------------------------------------------------------------
# 1  Constants
# ---------------------------------------------------------------------------

def check_constants(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    items = []
    fl = cfg.fields()
    if EUCLID in fl:
        mc = model_constants(euclidean(3, 0.0))
        items.append(Measurement("c_real n=3 a=0", mc.c_real, 1.0 / (2.0 * math.pi), 1e-12, "rel"))
        items.append(Measurement("iso_real a=0", mc.iso_real, 2.0, 1e-12, "rel"))
    if HEIS in fl:
        mc = model_constants(heisenberg(2, -2.0))
        items.append(Measurement("c_heis n=2 a=-2", mc.c_heis, 1.0 / (2.0 * math.pi), 1e-12, "rel"))
        items.append(Measurement("iso_heis n=2 a=-2", mc.iso_heis, math.pi / 3.0, 1e-12, "rel"))
    details = {}
    if cfg.n is not None and cfg.a is not None:
        for fld in fl:
            p = ModelParams(fld, cfg.n, cfg.a)
            if p.in_dirichlet_range():
                details[fld] = model_constants(p).as_dict()
    return _finish("constants", items, t0, details)


# ---------------------------------------------------------------------------
# 2  Constant boundary data
# ---------------------------------------------------------------------------

def check_constant_boundary(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    rng = cfg.rng("constant_boundary")
    items, skipped = [], []
    npts = 20
    if EUCLID in cfg.fields():
        for p in cfg.select(EUCLID, [euclidean(3, a) for a in (-0.5, 0.0, 0.5)]):
            if not p.in_formula_range():
                skipped.append(_label(p))
                continue
            pts = _random_real_points(rng, p.n, npts)
            v = ep.poisson_transform_real(ep.constant_one(), pts, p, tol=cfg.quad_tol(1e-10))
            i = int(np.argmax(np.abs(v - 1.0)))
            items.append(Measurement(_label(p, f"{npts} points"), v[i], 1.0, 1e-6, "abs"))
    if HEIS in cfg.fields():
        for p in cfg.select(HEIS, [heisenberg(2, a) for a in (-3.0, -2.0, -1.0)]):
            if not p.in_formula_range() or p.a <= -2 * p.n:
                skipped.append(_label(p))
                continue
            pts = _random_heis_points(rng, p.n, npts)
            v = hp.heis_poisson_transform(hp.heis_constant_one(), pts, p, tol=cfg.quad_tol(1e-8))
            i = int(np.argmax(np.abs(v - 1.0)))
            items.append(Measurement(_label(p, f"{npts} points"), v[i], 1.0, 1e-6, "abs"))
    return _finish("constant_boundary", items, t0, {"skipped": skipped})


# ---------------------------------------------------------------------------
# 3  Invariant closed forms
# ---------------------------------------------------------------------------

def check_closed_form(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    rng = cfg.rng("closed_form")
    items, skipped = [], []
    if EUCLID in cfg.fields():
        for p in cfg.select(EUCLID, [euclidean(3, a) for a in (-0.5, 0.0, 0.5)]):
            if not (p.in_formula_range() and p.a > 2 - p.n):
                skipped.append(_label(p))
                continue
            pts = _random_real_points(rng, p.n, 20)
            q = ep.poisson_transform_real(ep.kinv_boundary(p), pts, p, tol=cfg.quad_tol(1e-10))
            cf = ep.kinv_solution_real(pts, p)
            items.append(Measurement(_label(p, "20 points max rel err"),
                                     float(np.max(np.abs(q / cf - 1.0))), 0.0, 1e-5, "abs"))
    if HEIS in cfg.fields():
        for p in cfg.select(HEIS, [heisenberg(2, a) for a in (-3.0, -2.0, -1.0)]):
            if not (p.in_formula_range() and p.a > -2 * p.n):
                skipped.append(_label(p))
                continue
            pts = _random_heis_points(rng, p.n, 10)
            q = hp.heis_poisson_transform(hp.heis_kinv_boundary(p), pts, p, tol=cfg.quad_tol(1e-8))
            cf = hp.kinv_solution_heis(pts, p)
            items.append(Measurement(_label(p, "10 points max rel err"),
                                     float(np.max(np.abs(q / cf - 1.0))), 0.0, 1e-4, "abs"))
    return _finish("closed_form", items, t0, {"skipped": skipped})


# ---------------------------------------------------------------------------
# 4  Convergence order of PDE residuals
# ---------------------------------------------------------------------------

def _real_residual_order(p: ModelParams, h: float, half: float, tol: float) -> Tuple[float, list]:
    """Residual sup-norms of ``Delta_a P_a f`` on boxes with spacing ``2h``
    and ``h``, compared on the interior nodes of the coarse box."""
    n = p.n
    f = ep.gaussian(np.resize([0.2, -0.1], n - 1), 1.0)
    centre = np.zeros(n)
    centre[-1] = half + 0.5
    mc = int(round(half / (2 * h)))
    sups = []
    for hh in (2 * h, h):
        m = int(round(half / hh))
        step = int(round(2 * h / hh))
        k = np.arange(-m, m + 1) * hh
        axes = [c + k for c in centre]
        u = GridField.from_function(lambda x: ep.poisson_transform_real(f, x, p, tol=tol), axes)
        r = apply_delta_a(u, p.a).samples
        sel = tuple(slice(m - (mc - 1) * step, m + (mc - 1) * step + 1, step) for _ in range(n))
        sups.append(float(np.max(np.abs(r[sel]))))
    return math.log2(sups[0] / sups[1]), sups


def _heis_residual_order(p: ModelParams, h: float, tol: float) -> Tuple[float, list]:
    n = p.n
    f = hp.heis_gaussian(0.2, 1.0, 1.0)
    centres = [(0.5, 1.0, 0.1), (0.8, 0.6, -0.3), (0.4, 1.4, 0.5), (1.0, 1.0, 0.0), (0.6, 0.8, 0.8)]

    def u(x):
        return hp.heis_poisson_transform(f, _heis_point(x[:, 0], x[:, 1], x[:, 2], n), p, tol=tol)
    sups = []
    for hh in (2 * h, h):
        r = [biradial_reduced_apply(star_stencil_field(u, c, hh), n, p.a).samples[1, 1, 1]
             for c in centres]
        sups.append(float(np.max(np.abs(r))))
    return math.log2(sups[0] / sups[1]), sups


def check_pde_order(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    items, details = [], {}
    if EUCLID in cfg.fields():
        h, half = cfg.spacing(0.1), cfg.half_width(0.4)
        for p in cfg.select(EUCLID, [euclidean(3, -0.5)]):
            if not p.in_formula_range():
                details.setdefault("skipped", []).append(_label(p))
                continue
            order, sups = _real_residual_order(p, h, half, cfg.quad_tol(1e-11))
            items.append(Measurement(_label(p, f"order h={2 * h:g}->{h:g}"), order, 2.0, 0.2, "ge"))
            details[_label(p)] = {"sup_residuals": sups, "spacings": [2 * h, h], "half_width": half}
    if HEIS in cfg.fields():
        h = cfg.spacing(0.1)
        for p in cfg.select(HEIS, [heisenberg(2, -2.0)]):
            if not (p.in_formula_range() and p.a > -2 * p.n):
                details.setdefault("skipped", []).append(_label(p))
                continue
            order, sups = _heis_residual_order(p, h, cfg.quad_tol(1e-11))
            items.append(Measurement(_label(p, f"order h={2 * h:g}->{h:g}"), order, 2.0, 0.2, "ge"))
            details[_label(p)] = {"sup_residuals": sups, "spacings": [2 * h, h]}
    return _finish("pde_order", items, t0, details)


# ---------------------------------------------------------------------------
# 5  Sobolev isometry (Euclidean)
# ---------------------------------------------------------------------------

def isometry_ratio_real(f: ep.BoundaryData, p: ModelParams, half: float, h_bdy: float,
                        h_normal: float) -> float:
    """``||P_a f||^2 / ||f||^2`` in the homogeneous Sobolev norms of orders
    ``(2-a)/2`` and ``(1-a)/2``, with ``P_a f`` from the Fourier multiplier."""
    N = int(round(2 * half / h_bdy)) + 1
    fs = f.sample([N] * (p.n - 1), h_bdy)
    Nn = int(round(2 * half / h_normal)) + 1
    xn = -half + h_normal * np.arange(Nn)
    u = ep.poisson_multiplier_real(fs, p, xn)
    return (sobolev_norm(u, (2 - p.a) / 2.0) / sobolev_norm(fs.grid, (1 - p.a) / 2.0)) ** 2


def check_isometry_real(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    rng = cfg.rng("isometry_real")
    items, details = [], {"skipped": []}
    if EUCLID in cfg.fields():
        for p in cfg.select(EUCLID, [euclidean(n, a) for n in (2, 3) for a in (-0.5, 0.0)]):
            if not p.in_formula_range():
                details["skipped"].append(_label(p))
                continue
            half = cfg.half_width(16.0 if p.n == 2 else 12.0)
            hn = cfg.spacing(0.02)
            details[_label(p)] = {"half_width": half, "boundary_spacing": 0.25, "normal_spacing": hn}
            for i in range(5):
                c = rng.uniform(-0.5, 0.5, p.n - 1)
                w = rng.uniform(0.7, 1.3)
                r = isometry_ratio_real(ep.gaussian(c, w), p, half, 0.25, hn)
                items.append(Measurement(_label(p, f"gaussian {i}"), r, iso_real(p.a), 0.02, "rel"))
    return _finish("isometry_real", items, t0, details)


# ---------------------------------------------------------------------------
# 6  Mode-level isometry (Heisenberg)
# ---------------------------------------------------------------------------

def check_isometry_modes(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    items, skipped = [], []
    if HEIS in cfg.fields():
        for p in cfg.select(HEIS, _heis_sweep()):
            if not p.in_dirichlet_range():
                skipped.append(_label(p))
                continue
            r = np.array([hp.isometry_weight_ratio(k, 200, p) for k in range(21)])
            items.append(Measurement(_label(p, "max_k |r_k/r_0 - 1|"),
                                     float(np.max(np.abs(r / r[0] - 1.0))), 0.0, 1e-12, "abs"))
            items.append(Measurement(_label(p, "r_0"), r[0], iso_heis(p.n, p.a), 1e-10, "rel"))
    return _finish("isometry_modes", items, t0, {"skipped": skipped, "k_max": 20, "M": 200})


# ---------------------------------------------------------------------------
# 7  L^p -> L^q bounds
# ---------------------------------------------------------------------------

_LP_EXPONENTS = (2.0, 4.0, math.inf)


def _random_gaussian_sum(rng, dim: int) -> ep.BoundaryData:
    m = int(rng.integers(1, 5))
    c = rng.uniform(-3.0, 3.0, (m, dim))
    w = rng.uniform(0.3, 2.0, m)
    amp = rng.normal(size=m)

    def f(y):
        y = np.asarray(y, float)
        out = 0.0
        for i in range(m):
            out = out + amp[i] * np.exp(-0.5 * np.sum(((y - c[i]) / w[i]) ** 2, axis=-1))
        return out
    return ep.BoundaryData(f)


def lp_ratios_real(f: ep.BoundaryData, p: ModelParams, half: float, h: float,
                   depth: float, hn: float, exps: Sequence[float] = _LP_EXPONENTS) -> Dict[float, float]:
    """``||P_a f||_q / ||f||_p`` from the multiplier solution on a box.

    ``P_a f`` is even in ``x_n``; the half space ``0 < x_n <= depth`` is
    sampled at cell midpoints and counted twice.
    """
    N = int(round(2 * half / h))
    fs = f.sample([N] * (p.n - 1), h)
    xn = 0.5 * hn + hn * np.arange(int(round(depth / hn)))
    u = ep.poisson_multiplier_real(fs, p, xn)
    out = {}
    for pe in exps:
        q = lp_exponent(p, pe)
        num = lp_norm(u, q) * (2.0 ** (1.0 / q) if math.isfinite(q) else 1.0)
        out[pe] = num / lp_norm(fs.grid, pe)
    return out


def kinv_solution_heis_grid(R, rho, t, p: ModelParams) -> np.ndarray:
    """Vectorised invariant closed form on biradial coordinates."""
    n, a = p.n, p.a
    al = (a + 2 * n) / 4.0
    q = (1.0 + R * R + rho * rho) ** 2 + t * t
    w = 4.0 * rho * rho / q
    return hp.kinv_prefactor_heis(p) * hyp2f1(al, al, n, 1.0 - w) * q ** (-al)


def lp_ratios_heis(terms, p: ModelParams, half: float, h: float,
                   exps: Sequence[float] = _LP_EXPONENTS) -> Dict[float, float]:
    """Norm ratios for ``f = sum amp * g o tau_s o delta_r`` with ``g`` the
    invariant boundary function, ``delta_r`` a dilation and ``tau_s`` a
    central translation.

    The transform commutes with both maps, so ``P_a f`` is the same
    combination of the closed-form solution.  Norms are Riemann sums on a
    biradial grid ``(|z'|, |z_n|, t)`` with the spherical Jacobians.
    """
    n = p.n
    al = (p.a + 2 * n) / 4.0
    ht = 2 * h
    R = 0.5 * h + h * np.arange(int(round(half / h)))
    T = -half ** 2 + ht * np.arange(int(round(2 * half ** 2 / ht)) + 1)
    RR, PP, TT = np.meshgrid(R, R, T, indexing="ij")
    Rb, Tb = np.meshgrid(R, T, indexing="ij")
    u = np.zeros(RR.shape)
    f = np.zeros(Rb.shape)
    for amp, r, s in terms:
        u += amp * kinv_solution_heis_grid(RR / r, PP / r, (TT - s) / r ** 2, p)
        f += amp * ((1.0 + (Rb / r) ** 2) ** 2 + ((Tb - s) / r ** 2) ** 2) ** (-al)
    m = 2 * n - 3
    wb = sphere_volume(m) * Rb ** m
    wu = sphere_volume(m) * RR ** m * 2.0 * math.pi * PP
    U = GridField(u, (h, h, ht), (R[0], R[0], T[0]))
    F = GridField(f, (h, ht), (R[0], T[0]))
    out = {}
    for pe in exps:
        q = lp_exponent(p, pe)
        out[pe] = lp_norm(U, q, wu if math.isfinite(q) else None) / lp_norm(
            F, pe, wb if math.isfinite(pe) else None)
    return out


def check_lp_bounds(cfg: SuiteConfig, trials: int = 50) -> CheckRecord:
    t0 = time.perf_counter()
    rng = cfg.rng("lp_bounds")
    items, details = [], {"skipped": [], "trials": trials}
    if EUCLID in cfg.fields():
        for p in cfg.select(EUCLID, [euclidean(2, -0.5)]):
            if not p.in_formula_range():
                details["skipped"].append(_label(p))
                continue
            if p.n == 2:
                half, h, depth, hn = cfg.half_width(256.0), cfg.spacing(0.125), 32.0, 0.05
            else:
                half, h, depth, hn = cfg.half_width(32.0), cfg.spacing(0.25), 32.0, 0.1
            worst = {pe: 0.0 for pe in _LP_EXPONENTS}
            for _ in range(trials):
                r = lp_ratios_real(_random_gaussian_sum(rng, p.n - 1), p, half, h, depth, hn)
                for pe in _LP_EXPONENTS:
                    worst[pe] = max(worst[pe], r[pe])
            for pe in _LP_EXPONENTS:
                bound = lp_bound(p, pe)
                items.append(Measurement(_label(p, f"p={pe:g} worst ratio"), worst[pe], bound,
                                         1e-3 * bound, "le"))
            details[_label(p)] = {"half_width": half, "spacing": h, "depth": depth,
                                  "normal_spacing": hn}
    if HEIS in cfg.fields():
        for p in cfg.select(HEIS, [heisenberg(2, -1.0)]):
            if not (p.in_formula_range() and p.a > -2 * p.n):
                details["skipped"].append(_label(p))
                continue
            # the invariant boundary function lies in L^p only for p (a+2n) > 2n
            exps = [pe for pe in _LP_EXPONENTS if pe * (p.a + 2 * p.n) > 2 * p.n]
            if len(exps) < len(_LP_EXPONENTS):
                details["skipped"].append(_label(p, "p=2 (data not in L^p)"))
            half, h = cfg.half_width(6.0), cfg.spacing(0.25)
            worst = {pe: 0.0 for pe in exps}
            for _ in range(trials):
                m = int(rng.integers(1, 5))
                terms = list(zip(rng.normal(size=m), rng.uniform(0.5, 2.0, m),
                                 rng.uniform(-2.0, 2.0, m)))
                r = lp_ratios_heis(terms, p, half, h, exps)
                for pe in exps:
                    worst[pe] = max(worst[pe], r[pe])
            for pe in exps:
                bound = lp_bound(p, pe)
                items.append(Measurement(_label(p, f"p={pe:g} worst ratio"), worst[pe], bound,
                                         1e-3 * bound, "le"))
            details[_label(p)] = {"half_width": half, "spacing": h}
    return _finish("lp_bounds", items, t0, details)


# ---------------------------------------------------------------------------
# 8  Mixed boundary value problems
# ---------------------------------------------------------------------------

def _star_residual(func, centre, h, apply, lam) -> float:
    s = star_stencil_field(func, centre, h)
    mid = (1,) * len(centre)
    r = apply(s).samples[mid]
    return float(abs(r - lam * s.samples[mid]) / abs(s.samples[mid]))


def _complex_star_residual(func, centre, h, a, lam) -> float:
    re = star_stencil_field(lambda x: func(x).real, centre, h)
    im = star_stencil_field(lambda x: func(x).imag, centre, h)
    mid = (1,) * len(centre)
    v = re.samples[mid] + 1j * im.samples[mid]
    r = apply_delta_a(re, a).samples[mid] + 1j * apply_delta_a(im, a).samples[mid]
    return float(abs(r - lam * v) / abs(v))


def check_mixed_bvp(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    rng = cfg.rng("mixed_bvp")
    items, details = [], {"skipped": []}
    fl = cfg.fields()
    if EUCLID in fl:
        j = 1
        for p in cfg.select(EUCLID, [euclidean(5, -2.5)]):
            n, a = p.n, p.a
            if not (2 - n < a < 1 - 2 * j):
                details["skipped"].append(_label(p, "order-1 transform"))
                continue
            tol = cfg.quad_tol(1e-9)
            g = ep.gaussian(np.resize([0.2, -0.1, 0.0, 0.3], n - 1), 1.0)

            def u(x, g=g, p=p):
                return ep.higher_poisson_real(g, j, x, p, tol=tol)
            lam = eigenvalue(EUCLID, j, a)
            h = cfg.spacing(0.0125)
            centres = rng.uniform(-0.5, 0.5, (3, n)) + np.eye(n)[-1]
            res = [_star_residual(u, c, h, lambda s: apply_delta_a(s, a), lam) for c in centres]
            items.append(Measurement(_label(p, f"order-1 eigen-residual h={h:g}"),
                                     max(res), 0.0, 1e-3, "abs"))
            # D_{a,1} u = c d_n u at x_n = 0; central differences carry an
            # h^(-a-j) error, removed by one Richardson step
            coeffs = ep.boundary_op_coefficients(j, a)
            if set(coeffs) != {(0, 1)}:
                raise AccuracyError("unexpected form of the order-1 boundary operator")
            c1 = float(coeffs[(0, 1)])
            expo = -a - j
            hs = (0.01, 0.005)
            errs = []
            for y in rng.uniform(-0.5, 0.5, (10, n - 1)):
                d = []
                for hh in hs:
                    v = u(np.array([np.r_[y, hh], np.r_[y, -hh]]))
                    d.append(c1 * (v[0] - v[1]) / (2 * hh))
                fac = 2.0 ** expo
                extrap = (fac * d[1] - d[0]) / (fac - 1.0)
                errs.append(abs(extrap / g(y) - 1.0))
            items.append(Measurement(_label(p, "order-1 boundary operator rel err"),
                                     max(errs), 0.0, 1e-3, "abs"))
            details[_label(p)] = {"stencil_spacing": h, "normal_spacings": list(hs),
                                  "richardson_exponent": expo, "quad_tol": tol}
        for p in cfg.select(EUCLID, [euclidean(3, -0.5)]):
            if not p.in_formula_range():
                details["skipped"].append(_label(p, "continuous family"))
                continue
            f = ep.gaussian(np.resize([0.1, 0.2], p.n - 1), 0.7)
            h = cfg.spacing(0.0125)
            centres = [np.r_[np.resize([0.2, 0.1], p.n - 1), 0.8],
                       np.r_[np.resize([-0.3, 0.4], p.n - 1), 1.5]]
            for nu in (0.5, 1.0):
                lam = -(((1 - p.a) / 2.0) ** 2 + nu ** 2)

                def w(x, nu=nu, p=p):
                    return ep.continuous_family_real(f, nu, 0, x, p, tol=cfg.quad_tol(1e-9))
                res = [_complex_star_residual(w, c, h, p.a, lam) for c in centres]
                items.append(Measurement(_label(p, f"continuous family nu={nu:g}"),
                                         max(res), 0.0, 1e-3, "abs"))
    if HEIS in fl:
        k = 1
        for p in cfg.select(HEIS, [heisenberg(3, -5.0)]):
            n, a = p.n, p.a
            if not (-2 * n < a < -4 * k):
                details["skipped"].append(_label(p, "order-1 transform"))
                continue
            e = -(2 * n + a + 4 * k) / 4.0
            f = hp.from_invariant(lambda r2, t, e=e: ((1.0 + r2) ** 2 + t * t) ** e)

            def uh(x, f=f, p=p):
                return hp.higher_poisson_heis(f, k, _heis_point(x[:, 0], x[:, 1], x[:, 2], p.n), p,
                                              tol=cfg.quad_tol(1e-11))
            lam = eigenvalue(HEIS, k, a)
            h = cfg.spacing(0.05)
            res = [_star_residual(uh, c, h, lambda s: biradial_reduced_apply(s, n, a), lam)
                   for c in [(0.5, 0.5, 0.2), (0.3, 1.0, -0.4)]]
            items.append(Measurement(_label(p, f"order-1 eigen-residual h={h:g}"),
                                     max(res), 0.0, 1e-2, "abs"))
    return _finish("mixed_bvp", items, t0, details)


# ---------------------------------------------------------------------------
# 9  Series identities
# ---------------------------------------------------------------------------

def check_series(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    rng = cfg.rng("series_identities")
    items, skipped = [], []
    if HEIS in cfg.fields():
        for p in cfg.select(HEIS, _heis_sweep()):
            if not p.in_dirichlet_range():
                skipped.append(_label(p))
                continue
            res = max(hp.recursion_residual(hp.radial_coeffs(k, 200, p)) for k in (0, 1, 2, 5))
            items.append(Measurement(_label(p, "recursion residual M=200"), res, 0.0, 1e-12, "abs"))
            worst = max((abs(hp.partial_trace_factor(k, 10_000, p) / hp.partial_trace_closed(k, p) - 1.0), k)
                        for k in (0, 1, 2))
            items.append(Measurement(_label(p, f"partial trace M=1e4 k={worst[1]}"),
                                     hp.partial_trace_factor(worst[1], 10_000, p),
                                     hp.partial_trace_closed(worst[1], p), 1e-10, "rel"))
    x = rng.uniform(-5.0, 5.0, 100)
    y = np.maximum(x + 1.0 + rng.uniform(0.05, 5.0, 100), rng.uniform(0.1, 1.0, 100))
    errs = [abs(gauss_2f1(1.0, xi, yi, 1.0) / ((yi - 1.0) / (yi - xi - 1.0)) - 1.0)
            for xi, yi in zip(x, y)]
    i = int(np.argmax(errs))
    items.append(Measurement(f"2F1(1,x;y;1) 100 pairs, worst x={x[i]:.4g} y={y[i]:.4g}",
                             gauss_2f1(1.0, x[i], y[i], 1.0), (y[i] - 1.0) / (y[i] - x[i] - 1.0),
                             1e-12, "rel"))
    return _finish("series_identities", items, t0, {"skipped": skipped})


# ---------------------------------------------------------------------------
# 10  Profile ODE
# ---------------------------------------------------------------------------

def check_ode(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    rng = cfg.rng("ode_profile")
    items = []
    As = [cfg.a] if cfg.a is not None else [-1.0, -0.5, 0.0, 0.5]
    for a in As:
        z = rng.uniform(-10.0, 10.0, 100)
        res = float(np.max(np.abs(ep.ode_check(a, "phi1", z))))
        items.append(Measurement(f"a={a:g} phi1 residual 100 points", res, 0.0, 1e-10, "abs"))
        if a < 1:
            val, _ = ep.phi1_integral(a)
            items.append(Measurement(f"a={a:g} integral of phi1", val, ep.phi1_integral_closed(a),
                                     1e-8, "rel"))
    return _finish("ode_profile", items, t0, {})


# ---------------------------------------------------------------------------
# 11  Multiplier against quadrature
# ---------------------------------------------------------------------------

def multiplier_vs_quadrature(p: ModelParams, half: float, h: float, tol: float) -> float:
    """Largest relative gap between the multiplier and quadrature solutions
    at grid nodes near the centre of a periodic box of half-width ``half``."""
    n = p.n
    f = ep.gaussian(np.full(n - 1, 0.3), 1.0)
    N = int(round(2 * half / h)) + 1
    fs = f.sample([N] * (n - 1), h)
    xn = [0.25, 0.5, 1.0, 2.0]
    G = ep.poisson_multiplier_real(fs, p, xn)
    c = (N - 1) // 2
    idx = [c + k for k in (-8, -3, 0, 2, 5, 9)]
    mesh = np.meshgrid(*([np.array(idx)] * (n - 1)), np.arange(len(xn)), indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    vals = G.samples[tuple(flat)]
    pts = np.column_stack([fs.grid.origin[i] + h * flat[i] for i in range(n - 1)]
                          + [np.asarray(xn)[flat[-1]]])
    q = ep.poisson_transform_real(f, pts, p, tol=tol)
    return float(np.max(np.abs(vals - q) / np.abs(q)))


def check_multiplier(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    items, details = [], {"skipped": []}
    if EUCLID in cfg.fields():
        defaults = [euclidean(2, 0.25), euclidean(2, 0.5), euclidean(3, -0.5), euclidean(3, 0.0)]
        for p in cfg.select(EUCLID, defaults):
            if not p.in_formula_range():
                details["skipped"].append(_label(p))
                continue
            half = cfg.half_width(8192.0 if p.n == 2 else 128.0)
            h = cfg.spacing(0.125 if p.n == 2 else 0.25)
            gap = multiplier_vs_quadrature(p, half, h, cfg.quad_tol(1e-10))
            items.append(Measurement(_label(p, "max rel gap"), gap, 0.0, 1e-4, "abs"))
            details[_label(p)] = {"half_width": half, "spacing": h}
    return _finish("multiplier_oracle", items, t0, details)


# ---------------------------------------------------------------------------
# Calibration of the order-1 Heisenberg constant
# ---------------------------------------------------------------------------

def calibrate_order1_constant(p: ModelParams, t_points: Sequence[float],
                              spacings: Sequence[float] = (0.2, 0.1, 0.05),
                              tol: float = 1e-11) -> dict:
    """Constant ``c`` with ``D_{a,1}(c P~_{a,1} f0) = f0`` at ``(0, t0)``.

    ``P~`` is the order-1 transform with kernel constant 1 and ``f0`` the
    invariant family ``((1+|z'|^2)^2 + t^2)^(-(2n+a+4)/4)``.  The Juhl
    operator is applied on a biradial grid ``R, rho in {0, h}``; the
    calibrated value carries an ``O(h^(-a-4))`` plus ``O(h^2)`` error which
    two Richardson steps remove.
    """
    n, a, k = p.n, p.a, 1
    e = -(2 * n + a + 4 * k) / 4.0
    f0 = hp.from_invariant(lambda r2, t: ((1.0 + r2) ** 2 + t * t) ** e)
    raw = []
    for t0 in t_points:
        row = []
        for h in spacings:
            R = np.array([0.0, h])
            T = t0 + h * np.array([-1.0, 0.0, 1.0])
            RR, PP, TT = np.meshgrid(R, R, T, indexing="ij")
            u = hp.higher_poisson_heis_unnormalised(f0, k, _heis_point(RR, PP, TT, n), p, tol=tol)
            g = GridField(u.reshape(RR.shape), (h, h, h), (0.0, 0.0, t0 - h))
            d = juhl.restrict_D_ak(g, k, p)
            row.append((1.0 + t0 * t0) ** e / d.samples[0, 1])
        raw.append(row)
    raw = np.array(raw)
    p1 = -a - 4 * k
    p2 = 2.0 if abs(p1 - 2.0) > 1e-9 else 4.0
    est = raw
    for expo in (p1, p2)[: len(spacings) - 1]:
        r = (spacings[0] / spacings[1]) ** expo
        est = (r * est[:, 1:] - est[:, :-1]) / (r - 1.0)
    vals = est[:, -1]
    return {"values": vals, "mean": float(np.mean(vals)), "spread": float(np.std(vals)),
            "raw": raw, "spacings": list(spacings), "t_points": list(t_points),
            "leading_constant": hp.higher_constant_leading(p, k)}


def check_calibration(cfg: SuiteConfig) -> CheckRecord:
    t0 = time.perf_counter()
    items, details = [], {"skipped": []}
    if HEIS in cfg.fields():
        for p in cfg.select(HEIS, [heisenberg(3, -5.0)]):
            if not (-2 * p.n < p.a < -4):
                details["skipped"].append(_label(p))
                continue
            cal = calibrate_order1_constant(p, (-1.0, -0.5, 0.0, 0.5, 1.0),
                                            tol=cfg.quad_tol(1e-11))
            items.append(Measurement(_label(p, "calibrated order-1 constant"), cal["mean"],
                                     cal["leading_constant"], 0.05, "rel"))
            details[_label(p)] = cal
    return _finish("order1_calibration", items, t0, details)


# ---------------------------------------------------------------------------
# Registry and runner
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    name: str
    anchor: str
    suite: str
    fields: Tuple[str, ...]
    criterion: Optional[int]
    func: Callable[[SuiteConfig], CheckRecord]


_SPECS = [
    CheckSpec("constants", "closed-form constants", "normalisation and norm constants",
              "constants", FIELDS, 1, check_constants),
    CheckSpec("constant_boundary", "constant boundary data", "P_a 1 = 1",
              "boundary", FIELDS, 2, check_constant_boundary),
    CheckSpec("closed_form", "invariant closed forms", "2F1 solution for invariant data",
              "closed_form", FIELDS, 3, check_closed_form),
    CheckSpec("pde_order", "PDE residual convergence", "Delta_a / L_a annihilate P_a f",
              "pde", FIELDS, 4, check_pde_order),
    CheckSpec("isometry_real", "Sobolev isometry (Euclidean)", "||P_a f||^2 = iso_real ||f||^2",
              "isometry", (EUCLID,), 5, check_isometry_real),
    CheckSpec("isometry_modes", "mode-level isometry (Heisenberg)", "weight ratio = pi a/(a-2n)",
              "series", (HEIS,), 6, check_isometry_modes),
    CheckSpec("lp_bounds", "L^p -> L^q bounds", "||P_a f||_q <= C ||f||_p",
              "lp", FIELDS, 7, check_lp_bounds),
    CheckSpec("mixed_bvp", "mixed boundary value problems", "eigen-relations of higher transforms",
              "bvp", FIELDS, 8, check_mixed_bvp),
    CheckSpec("series_identities", "series and recursion identities",
              "Fock recursion, partial trace, Gauss sum", "series", (HEIS,), 9, check_series),
    CheckSpec("ode_profile", "profile ODE", "ODE residual and profile integral",
              "ode", (EUCLID,), 10, check_ode),
    CheckSpec("multiplier_oracle", "multiplier vs quadrature", "two solvers for P_a agree",
              "multiplier", (EUCLID,), 11, check_multiplier),
    CheckSpec("order1_calibration", "order-1 constant calibration",
              "D_{a,1} P_{a,1} = id", "calibration", (HEIS,), None, check_calibration),
]

CHECKS: Dict[str, CheckSpec] = {s.check_id: s for s in _SPECS}
CRITERIA: Dict[int, str] = {s.criterion: s.check_id for s in _SPECS if s.criterion is not None}
SUITES: Dict[str, Tuple[str, ...]] = {}
for _s in _SPECS:
    SUITES.setdefault(_s.suite, ())
    SUITES[_s.suite] += (_s.check_id,)


def selected_checks(cfg: SuiteConfig) -> List[str]:
    if "acceptance" in cfg.suites:
        ids = [CRITERIA[c] for c in sorted(CRITERIA)]
    elif cfg.suites:
        ids = [cid for s in cfg.suites for cid in SUITES[s]]
    else:
        ids = [s.check_id for s in _SPECS]
    fl = set(cfg.fields())
    wanted = set(ids)
    return [s.check_id for s in _SPECS if s.check_id in wanted and fl & set(s.fields)]


def run_check(check_id: str, cfg: SuiteConfig) -> CheckRecord:
    """Run one check; numerical failures become failed records."""
    spec = CHECKS[check_id]
    t0 = time.perf_counter()
    try:
        return spec.func(cfg)
    except (NotApplicable, ParameterRangeError) as exc:
        return CheckRecord(check_id, spec.name, spec.anchor, spec.criterion, math.nan, math.nan,
                           math.nan, "abs", "skip", time.perf_counter() - t0, [],
                           {"reason": str(exc)})
    except (AccuracyError, ArithmeticError, ValueError) as exc:
        return CheckRecord(check_id, spec.name, spec.anchor, spec.criterion, math.nan, math.nan,
                           math.nan, "abs", "error", time.perf_counter() - t0, [],
                           {"reason": f"{type(exc).__name__}: {exc}"})


@dataclass
class VerificationReport:
    """Records of one run plus the settings that produced them."""

    suite: str
    config: SuiteConfig
    records: List[CheckRecord]
    timestamp: str

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def environment(self) -> dict:
        return {"seed": self.config.seed, "tol": self.config.tol, "grid": self.config.grid,
                "box": self.config.box, "python": platform.python_version(),
                "numpy": np.__version__, "scipy": scipy.__version__}

    def as_dict(self) -> dict:
        """Deterministic content first; wall-clock data under ``timing``."""
        return {"suite": self.suite, "config": self.config.as_dict(),
                "environment": self.environment(),
                "passed": self.passed,
                "records": [r.as_dict() for r in self.records],
                "timing": {"timestamp": self.timestamp,
                           "runtime": {r.check_id: round(r.runtime, 3) for r in self.records}}}

    def to_json(self) -> str:
        import json
        return json.dumps(self.as_dict(), indent=2, sort_keys=False, allow_nan=True)

    def to_text(self) -> str:
        head = ("crit", "check", "status", "measured", "expected", "tol", "cmp", "time[s]")
        rows = [head]
        for r in self.records:
            rows.append((str(r.criterion or "-"), r.check_id, r.status.upper(),
                         f"{r.measured:.6g}", f"{r.expected:.6g}", f"{r.tolerance:.3g}",
                         r.comparison, f"{r.runtime:.1f}"))
        widths = [max(len(row[i]) for row in rows) for i in range(len(head))]
        lines = [f"suite: {self.suite}  seed: {self.config.seed}  {self.timestamp}"]
        for row in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)

    def to_csv_rows(self) -> List[List[str]]:
        rows = [["check_id", "criterion", "label", "measured", "expected", "tolerance",
                 "comparison", "passed"]]
        for r in self.records:
            for m in r.items:
                rows.append([r.check_id, str(r.criterion or ""), m.label, repr(float(m.measured)),
                             repr(float(m.expected)), repr(float(m.tolerance)), m.comparison,
                             str(m.passed)])
        return rows


def run_suite(cfg: SuiteConfig, progress: Optional[Callable[[CheckRecord], None]] = None
              ) -> VerificationReport:
    """Validate ``cfg`` and run the selected checks in registry order."""
    validate(cfg)
    records = []
    for cid in selected_checks(cfg):
        rec = run_check(cid, cfg)
        records.append(rec)
        if progress is not None:
            progress(rec)
    name = ",".join(cfg.suites) if cfg.suites else "all"
    stamp = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    return VerificationReport(name, cfg, records, stamp)


def with_params(cfg: SuiteConfig, **kw) -> SuiteConfig:
    return replace(cfg, **kw)
