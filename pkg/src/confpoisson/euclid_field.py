"""Sampled fields on R^n: Fourier transform, Sobolev and L^p norms, the
degenerate operator ``Delta_a`` and the conformal group actions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

Evaluable = Callable[[np.ndarray], np.ndarray]


class DecayWarning(UserWarning):
    """A sampled field is not small on the outer layer of its box."""


@dataclass(frozen=True)
class GridField:
    """Samples of a function on a uniform tensor grid.

    Attributes
    ----------
    samples : ndarray
        Real or complex array, one axis per coordinate.
    spacing : tuple of float
        Grid step per axis.
    origin : tuple of float
        Coordinate of index ``(0, ..., 0)``.
    names : tuple of str
        Coordinate names, written to serialized headers.
    valid : ndarray of bool or None
        Mask of points where an operator result is defined (stencil margin).
    """

    samples: np.ndarray
    spacing: Tuple[float, ...]
    origin: Tuple[float, ...]
    names: Tuple[str, ...] = ()
    valid: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        nd = self.samples.ndim
        sp = tuple(float(h) for h in np.broadcast_to(self.spacing, (nd,)))
        og = tuple(float(o) for o in np.broadcast_to(self.origin, (nd,)))
        object.__setattr__(self, "spacing", sp)
        object.__setattr__(self, "origin", og)
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i + 1}" for i in range(nd)))

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.samples.shape

    @property
    def ndim(self) -> int:
        return self.samples.ndim

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def axis(self, i: int) -> np.ndarray:
        return self.origin[i] + self.spacing[i] * np.arange(self.dims[i])

    def axes(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.axis(i) for i in range(self.ndim))

    def mesh(self) -> Tuple[np.ndarray, ...]:
        return np.meshgrid(*self.axes(), indexing="ij")

    def points(self) -> np.ndarray:
        """All grid coordinates as an array of shape ``(N, ndim)``."""
        return np.stack([m.reshape(-1) for m in self.mesh()], axis=1)

    def with_samples(self, samples: np.ndarray, valid: Optional[np.ndarray] = None) -> "GridField":
        return GridField(samples, self.spacing, self.origin, self.names, valid)

    def decay_ratio(self) -> float:
        """``max |u|`` on the outermost layer over ``max |u|``."""
        a = np.abs(self.samples)
        peak = a.max()
        if peak == 0:
            return 0.0
        outer = ~interior_mask(a.shape)
        return float(a[outer].max() / peak)

    def check_decay(self, decay_tol: float = 1e-6) -> float:
        r = self.decay_ratio()
        if r > decay_tol:
            warnings.warn(f"field is {r:.2e} of its peak on the box boundary",
                          DecayWarning, stacklevel=2)
        return r

    @staticmethod
    def centered(dims: Sequence[int], spacing, func: Optional[Evaluable] = None,
                 names: Sequence[str] = (), dtype=float) -> "GridField":
        """Grid symmetric about the origin (odd ``dims`` put 0 on the grid)."""
        dims = tuple(int(d) for d in dims)
        sp = np.broadcast_to(np.asarray(spacing, float), (len(dims),))
        origin = tuple(-0.5 * (d - 1) * h for d, h in zip(dims, sp))
        g = GridField(np.zeros(dims, dtype), tuple(sp), origin, tuple(names))
        if func is not None:
            vals = np.asarray(func(g.points())).reshape(dims)
            g = g.with_samples(vals)
        return g

    @staticmethod
    def from_function(func: Evaluable, axes: Sequence[np.ndarray],
                      names: Sequence[str] = ()) -> "GridField":
        """Sample ``func`` on the tensor grid spanned by uniform ``axes``."""
        axes = [np.asarray(ax, float) for ax in axes]
        spacing = tuple(float(ax[1] - ax[0]) if ax.size > 1 else 1.0 for ax in axes)
        origin = tuple(float(ax[0]) for ax in axes)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        vals = np.asarray(func(pts)).reshape(mesh[0].shape)
        return GridField(vals, spacing, origin, tuple(names))


@dataclass(frozen=True)
class SpectralField:
    """Discrete Fourier coefficients approximating the continuum transform.

    ``coeffs[k]`` approximates ``(2 pi)^(-n/2) int u(x) exp(-i x.xi_k) dx``
    at the frequencies ``xi_k = 2 pi fftfreq(N, h)``.
    """

    coeffs: np.ndarray
    spacing: Tuple[float, ...]
    origin: Tuple[float, ...]
    names: Tuple[str, ...] = ()

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.coeffs.shape

    def frequencies(self) -> Tuple[np.ndarray, ...]:
        return tuple(2.0 * math.pi * np.fft.fftfreq(n, h) for n, h in zip(self.dims, self.spacing))

    def frequency_mesh(self) -> Tuple[np.ndarray, ...]:
        return np.meshgrid(*self.frequencies(), indexing="ij")

    @property
    def dual_cell_volume(self) -> float:
        return float(np.prod([2.0 * math.pi / (n * h) for n, h in zip(self.dims, self.spacing)]))

    def abs_frequency(self) -> np.ndarray:
        return np.sqrt(sum(k ** 2 for k in self.frequency_mesh()))


def dft(u: GridField) -> SpectralField:
    """Fourier transform of a grid field with continuum normalisation.

    The phase factor for the box origin is included, so a field centred on
    the origin has the same coefficients as the continuum transform.
    """
    n = u.ndim
    c = np.fft.fftn(u.samples)
    for i in range(n):
        k = 2.0 * math.pi * np.fft.fftfreq(u.dims[i], u.spacing[i])
        shape = [1] * n
        shape[i] = -1
        c = c * np.exp(-1j * k * u.origin[i]).reshape(shape)
    c *= u.cell_volume / (2.0 * math.pi) ** (n / 2.0)
    return SpectralField(c, u.spacing, u.origin, u.names)


def idft(s: SpectralField, real: bool = False) -> GridField:
    """Inverse of :func:`dft`."""
    n = len(s.dims)
    c = s.coeffs / (np.prod(s.spacing) / (2.0 * math.pi) ** (n / 2.0))
    for i in range(n):
        k = 2.0 * math.pi * np.fft.fftfreq(s.dims[i], s.spacing[i])
        shape = [1] * n
        shape[i] = -1
        c = c * np.exp(1j * k * s.origin[i]).reshape(shape)
    out = np.fft.ifftn(c)
    if real:
        out = out.real
    return GridField(out, s.spacing, s.origin, s.names)


def sobolev_norm(u: GridField, s: float) -> float:
    """Homogeneous Sobolev norm ``(int |u^(xi)|^2 |xi|^(2s) dxi)^(1/2)``.

    The zero frequency is left out; for ``s > 0`` its weight vanishes anyway
    and for ``s <= 0`` it is undefined.  Only ``s > -n/2`` is required: the
    weight is then locally integrable, and larger ``s`` is fine for the
    smooth decaying fields represented on a grid.
    """
    n = u.ndim
    if not s > -n / 2.0:
        raise ValueError(f"need s > -n/2, got s={s} for n={n}")
    spec = dft(u)
    k = spec.abs_frequency()
    w = np.zeros_like(k)
    nz = k > 0
    w[nz] = k[nz] ** (2.0 * s)
    return math.sqrt(float(np.sum(np.abs(spec.coeffs) ** 2 * w)) * spec.dual_cell_volume)


def lp_norm(u: GridField, p: float, weight: Optional[np.ndarray] = None) -> float:
    """Riemann-sum ``L^p`` norm, or the grid maximum for ``p = inf``.

    ``weight`` is an optional Jacobian (e.g. ``r^(m)`` on a reduced radial
    grid) multiplying the cell volume.
    """
    a = np.abs(u.samples)
    if math.isinf(p):
        return float(a.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    dv = u.cell_volume if weight is None else u.cell_volume * weight
    return float(np.sum(a ** p * dv)) ** (1.0 / p)


def _d2(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(arr, -1, axis) - 2.0 * arr + np.roll(arr, 1, axis)) / (h * h)


def _d1(arr: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(arr, -1, axis) - np.roll(arr, 1, axis)) / (2.0 * h)


def interior_mask(shape: Sequence[int], margin: int = 1) -> np.ndarray:
    m = np.zeros(shape, bool)
    m[tuple(slice(margin, s - margin) for s in shape)] = True
    return m


def apply_laplacian(u: GridField, axes: Optional[Sequence[int]] = None) -> np.ndarray:
    """Second-order central Laplacian over ``axes`` (wraps at the edges)."""
    axes = range(u.ndim) if axes is None else axes
    return sum(_d2(u.samples, i, u.spacing[i]) for i in axes)


def apply_delta_a(u: GridField, a: float) -> GridField:
    """``x_n^2 Delta u + a x_n d_n u`` by central differences.

    The last axis is ``x_n``.  The one-cell margin is set to zero and marked
    invalid in the returned field's ``valid`` mask.
    """
    n = u.ndim
    xn = u.axis(n - 1).reshape((1,) * (n - 1) + (-1,))
    out = xn ** 2 * apply_laplacian(u) + a * xn * _d1(u.samples, n - 1, u.spacing[n - 1])
    mask = interior_mask(u.dims)
    out = np.where(mask, out, 0.0)
    return u.with_samples(out, mask)


def trace_index(u: GridField, axis: int = -1) -> int:
    axis = axis % u.ndim
    i = int(round(-u.origin[axis] / u.spacing[axis]))
    if not 0 <= i < u.dims[axis] or abs(u.origin[axis] + i * u.spacing[axis]) > 1e-9 * u.spacing[axis]:
        raise ValueError("grid does not contain the hyperplane x_n = 0")
    return i


def trace_restrict(u: GridField) -> GridField:
    """Slice ``x_n = 0`` of a field whose grid contains that hyperplane."""
    i = trace_index(u)
    return GridField(u.samples[..., i], u.spacing[:-1], u.origin[:-1], u.names[:-1])


# ---------------------------------------------------------------------------
# Group actions
# ---------------------------------------------------------------------------

def translate(f: Evaluable, v: Sequence[float]) -> Evaluable:
    """``x -> f(x - v)`` for ``v`` parallel to the boundary."""
    v = np.asarray(v, float)

    def g(x):
        x = np.asarray(x, float)
        shift = np.zeros(x.shape[-1])
        shift[: v.size] = v
        return f(x - shift)
    return g


def dilate(f: Evaluable, s: float, mu: float, rho: float) -> Evaluable:
    """``x -> e^((mu+rho) s) f(e^s x)``."""
    fac = math.exp((mu + rho) * s)
    es = math.exp(s)

    def g(x):
        return fac * f(es * np.asarray(x, float))
    return g


def invert(f: Evaluable, mu: float, rho: float) -> Evaluable:
    """``x -> |x|^(-2(mu+rho)) f(-x / |x|^2)``; undefined at ``x = 0``."""

    def g(x):
        x = np.asarray(x, float)
        r2 = np.sum(x * x, axis=-1)
        return r2 ** (-(mu + rho)) * f(-x / r2[..., None])
    return g


def group_action_euclid(kind: str, f: Evaluable, mu: float, rho: float,
                        arg=None) -> Evaluable:
    """Apply ``translate`` (arg = vector), ``dilate`` (arg = s) or ``invert``."""
    if kind == "translate":
        return translate(f, arg)
    if kind == "dilate":
        return dilate(f, float(arg), mu, rho)
    if kind == "invert":
        return invert(f, mu, rho)
    raise ValueError(f"unknown group action {kind!r}")


def star_stencil_field(func: Evaluable, center: Sequence[float], spacing,
                       names: Sequence[str] = ()) -> GridField:
    """``3 x ... x 3`` field around ``center`` with only the centre and its
    ``2 ndim`` axis neighbours evaluated (the rest NaN).

    Enough for operators without mixed derivatives; an operator that does
    touch a diagonal node returns NaN rather than a wrong number.
    """
    c = np.asarray(center, float)
    nd = c.size
    h = np.broadcast_to(np.asarray(spacing, float), (nd,))
    offs = [np.zeros(nd)]
    for i in range(nd):
        for sgn in (-1.0, 1.0):
            e = np.zeros(nd)
            e[i] = sgn
            offs.append(e)
    offs = np.array(offs)
    vals = np.asarray(func(c + offs * h), float)
    samples = np.full((3,) * nd, np.nan)
    for o, v in zip(offs.astype(int) + 1, vals):
        samples[tuple(o)] = v
    return GridField(samples, tuple(h), tuple(c - h), tuple(names))
