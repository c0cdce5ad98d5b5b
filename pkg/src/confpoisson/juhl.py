"""Juhl-type restriction operators on the Heisenberg group.

The operators are built by the recursion

    D(s, 0) = 1,
    D(s, 1) = [(2s+n-1) L - (2s+n) L'] / (16 s^2 (2s+n)),
    D(s, k+1) = [((2s+n-2k-1) L - (2s+n) L') D(s, k)
                 - k^2 (2s+n-2k-1) / (16 s^2 (2s+n-1)(2s+n)) (L^2 + 16 (2s+n)^2 T) D(s-1, k-1)]
                / (16 (s-k)^2 (2s+n))

over the generators ``L`` (CR Laplacian of ``H^(2n+1)``), ``Lp`` (CR
Laplacian of the subgroup ``H^(2n-1)``) and ``T = d_t^2``.  Trees keep the
bracketing of the recursion; composition applies the rightmost factor first.

S-expression grammar::

    expr     := "id" | "L" | "Lp" | "T"
              | "(" "scale" number expr ")"
              | "(" "sum" expr expr* ")"
              | "(" "compose" expr expr* ")"
    number   := integer | integer "/" integer | decimal
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Tuple, Union

import numpy as np

from .euclid_field import GridField
from .heis_core import _cr_laplacian_samples
from .params import ModelParams

Number = Union[Fraction, float]
GENERATORS = ("L", "Lp", "T")


class DegenerateParameterError(ValueError):
    """A denominator of the recursion vanishes."""


# ---------------------------------------------------------------------------
# Trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    """Operator tree node.

    ``kind`` is one of ``"id"``, ``"gen"``, ``"scale"``, ``"sum"``,
    ``"compose"``.
    """

    kind: str
    name: str = ""
    coeff: Number = Fraction(1)
    children: Tuple["Node", ...] = ()


IDENTITY = Node("id")


def gen(name: str) -> Node:
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}")
    return Node("gen", name=name)


def scale(c: Number, x: Node) -> Node:
    return Node("scale", coeff=c, children=(x,))


def add(*xs: Node) -> Node:
    return Node("sum", children=tuple(xs))


def compose(*xs: Node) -> Node:
    return Node("compose", children=tuple(xs))


def _exact(x) -> Number:
    """Fraction when ``x`` is (numerically) rational with a small denominator."""
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    fr = Fraction(float(x)).limit_denominator(10 ** 6)
    return fr if float(fr) == float(x) else float(x)


def _nonzero(v: Number, what: str) -> Number:
    if v == 0:
        raise DegenerateParameterError(f"denominator {what} vanishes")
    return v


@dataclass(frozen=True)
class JuhlOperator:
    """``D(s, k)`` on ``H^(2n+1)`` as an exact operator tree."""

    s: Number
    k: int
    n: int
    tree: Node

    def expand(self) -> Dict[Tuple[str, ...], Number]:
        return expand(self.tree)

    def to_sexpr(self) -> str:
        return to_sexpr(self.tree)


def _build_tree(s: Number, k: int, n: int) -> Node:
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return IDENTITY
    L, Lp, T = gen("L"), gen("Lp"), gen("T")
    m = 2 * s + n
    if k == 1:
        den = _nonzero(16 * s * s * _nonzero(m, "2s+n"), "16 s^2 (2s+n)")
        return scale(1 / den, add(scale(m - 1, L), scale(-m, Lp)))
    j = k - 1
    outer = _nonzero(16 * (s - j) ** 2 * _nonzero(m, "2s+n"), "16 (s-k)^2 (2s+n)")
    inner = _nonzero(16 * s * s * _nonzero(m - 1, "2s+n-1") * m, "16 s^2 (2s+n-1)(2s+n)")
    first = compose(add(scale(m - 2 * j - 1, L), scale(-m, Lp)), _build_tree(s, j, n))
    c2 = -(j * j) * (m - 2 * j - 1) / inner
    second = scale(c2, compose(add(compose(L, L), scale(16 * m * m, T)),
                               _build_tree(s - 1, j - 1, n)))
    return scale(1 / outer, add(first, second))


def juhl_build(s, k: int, n: int) -> JuhlOperator:
    """Build ``D(s, k)``; rational ``s`` gives exact coefficients.

    Raises
    ------
    DegenerateParameterError
        If a denominator of the recursion vanishes.
    """
    s = _exact(s)
    return JuhlOperator(s, int(k), int(n), _build_tree(s, int(k), int(n)))


def juhl_parameter(params: ModelParams) -> Number:
    """``s = -(a + 2n)/4`` used by the restriction operator ``D_{a,k}``."""
    return -(_exact(params.a) + 2 * params.n) / 4


# ---------------------------------------------------------------------------
# Expansion to noncommutative polynomials
# ---------------------------------------------------------------------------

def _poly_add(p, q, c=1):
    out = dict(p)
    for w, v in q.items():
        out[w] = out.get(w, 0) + c * v
        if out[w] == 0:
            del out[w]
    return out


def expand(node: Node) -> Dict[Tuple[str, ...], Number]:
    """Noncommutative polynomial ``{word: coefficient}``; words read left to
    right as written (the rightmost letter acts first)."""
    if node.kind == "id":
        return {(): Fraction(1)}
    if node.kind == "gen":
        return {(node.name,): Fraction(1)}
    if node.kind == "scale":
        return {w: node.coeff * v for w, v in expand(node.children[0]).items() if node.coeff * v != 0}
    if node.kind == "sum":
        out: Dict = {}
        for ch in node.children:
            out = _poly_add(out, expand(ch))
        return out
    if node.kind == "compose":
        out = {(): Fraction(1)}
        for ch in node.children:
            right = expand(ch)
            new: Dict = {}
            for w1, v1 in out.items():
                for w2, v2 in right.items():
                    new = _poly_add(new, {w1 + w2: v1 * v2})
            out = new
        return out
    raise ValueError(f"bad node kind {node.kind!r}")


def tree_depth(node: Node) -> int:
    """Largest number of generators composed along a word of the expansion."""
    return max((len(w) for w in expand(node)), default=0)


# ---------------------------------------------------------------------------
# S-expressions
# ---------------------------------------------------------------------------

def _num_str(c: Number) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    return repr(float(c))


def to_sexpr(node: Node) -> str:
    if node.kind == "id":
        return "id"
    if node.kind == "gen":
        return node.name
    if node.kind == "scale":
        return f"(scale {_num_str(node.coeff)} {to_sexpr(node.children[0])})"
    return "(" + node.kind + " " + " ".join(to_sexpr(c) for c in node.children) + ")"


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def from_sexpr(text: str) -> Node:
    """Parse the grammar in the module docstring."""
    tokens = _TOKEN.findall(text)
    pos = 0

    def number(tok: str) -> Number:
        if re.fullmatch(r"-?\d+(/\d+)?", tok):
            return Fraction(tok)
        return float(tok)

    def parse() -> Node:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of input")
        tok = tokens[pos]
        pos += 1
        if tok == "id":
            return IDENTITY
        if tok in GENERATORS:
            return gen(tok)
        if tok != "(":
            raise ValueError(f"unexpected token {tok!r}")
        head = tokens[pos]
        pos += 1
        if head == "scale":
            c = number(tokens[pos])
            pos += 1
            node = scale(c, parse())
        elif head in ("sum", "compose"):
            kids = []
            while pos < len(tokens) and tokens[pos] != ")":
                kids.append(parse())
            if not kids:
                raise ValueError(f"empty {head}")
            node = Node(head, children=tuple(kids))
        else:
            raise ValueError(f"unknown head {head!r}")
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ValueError("missing ')'")
        pos += 1
        return node

    node = parse()
    if pos != len(tokens):
        raise ValueError("trailing tokens")
    return node


# ---------------------------------------------------------------------------
# Grid realizations
# ---------------------------------------------------------------------------

def _pad(s: np.ndarray, axis: int, reflect_low: bool) -> np.ndarray:
    """One ghost cell per side; even reflection at a low end sitting on 0."""
    width = [(0, 0)] * s.ndim
    width[axis] = (1, 1)
    if reflect_low:
        p = np.pad(s, width, mode="edge")
        idx = [slice(None)] * s.ndim
        src = [slice(None)] * s.ndim
        idx[axis] = slice(0, 1)
        src[axis] = slice(2, 3)
        p[tuple(idx)] = p[tuple(src)]
        return p
    return np.pad(s, width, mode="edge")


def _diffs(s: np.ndarray, axis: int, h: float, reflect_low: bool):
    p = _pad(s, axis, reflect_low)
    n = s.shape[axis]
    take = lambda lo: np.take(p, np.arange(lo, lo + n), axis=axis)  # noqa: E731
    lo, mid, hi = take(0), take(1), take(2)
    return (hi - lo) / (2.0 * h), (hi - 2.0 * mid + lo) / (h * h)


def _shrink(valid: np.ndarray, reflect_low) -> np.ndarray:
    """Points whose three-point stencil along every axis is valid."""
    out = valid.copy()
    for ax, refl in enumerate(reflect_low):
        width = [(0, 0)] * valid.ndim
        width[ax] = (1, 1)
        p = np.pad(valid, width, constant_values=False)
        if refl:
            src = np.take(valid, [1], axis=ax) if valid.shape[ax] > 1 else np.take(valid, [0], axis=ax)
            idx = [slice(None)] * valid.ndim
            idx[ax] = slice(0, 1)
            p[tuple(idx)] = src
        n = valid.shape[ax]
        out &= np.take(p, np.arange(0, n), axis=ax) & np.take(p, np.arange(2, n + 2), axis=ax)
    return out


class BiradialRealization:
    """Generators on fields ``u(R, rho, t)`` with ``R = |z'|``, ``rho = |z_n|``.

    Axes ``(R, rho, t)``; an ``R`` or ``rho`` axis starting at 0 is extended
    by even reflection, and the ``1/r d_r`` terms take their limit ``d_r^2``
    there.  Each application invalidates one further cell at every outer
    edge.
    """

    def __init__(self, n: int):
        self.n = n

    def _radial(self, u: GridField, axis: int, dim: int) -> np.ndarray:
        h = u.spacing[axis]
        at0 = abs(u.origin[axis]) < 1e-12 * h
        d1, d2 = _diffs(u.samples, axis, h, at0)
        r = u.axis(axis).reshape([-1 if i == axis else 1 for i in range(u.ndim)])
        with np.errstate(divide="ignore", invalid="ignore"):
            first = np.where(r > 0, (dim - 1) * d1 / np.where(r > 0, r, 1.0), (dim - 1) * d2)
        return d2 + first

    def _t2(self, u: GridField) -> np.ndarray:
        return _diffs(u.samples, 2, u.spacing[2], False)[1]

    def _mesh(self, u: GridField):
        return np.meshgrid(*u.axes(), indexing="ij", sparse=True)

    def apply_gen(self, name: str, u: GridField) -> np.ndarray:
        R, rho, _ = self._mesh(u)
        if name == "T":
            return self._t2(u)
        lp = self._radial(u, 0, 2 * self.n - 2) + 4.0 * R ** 2 * self._t2(u)
        if name == "Lp":
            return lp
        if name == "L":
            return lp + self._radial(u, 1, 2) + 4.0 * rho ** 2 * self._t2(u)
        raise ValueError(name)

    def shrink(self, u: GridField, valid: np.ndarray) -> np.ndarray:
        flags = [ax < 2 and abs(u.origin[ax]) < 1e-12 * u.spacing[ax] for ax in range(u.ndim)]
        return _shrink(valid, flags)


class FullRealization:
    """Generators on fields over ``(x_1, y_1, ..., x_n, y_n, t)``."""

    def __init__(self, n: int):
        self.n = n

    def apply_gen(self, name: str, u: GridField) -> np.ndarray:
        if name == "T":
            h = u.spacing[-1]
            s = u.samples
            return (np.roll(s, -1, -1) - 2.0 * s + np.roll(s, 1, -1)) / (h * h)
        pairs = self.n if name == "L" else self.n - 1
        if name not in ("L", "Lp"):
            raise ValueError(name)
        return _cr_laplacian_samples(u, pairs)

    def shrink(self, u: GridField, valid: np.ndarray) -> np.ndarray:
        return _shrink(valid, [False] * u.ndim)


def _realization(u: GridField, n: int, layout: str):
    if layout == "biradial":
        if u.ndim != 3:
            raise ValueError("biradial fields have axes (R, rho, t)")
        return BiradialRealization(n)
    if layout == "full":
        if u.ndim != 2 * n + 1:
            raise ValueError(f"full fields need {2 * n + 1} axes")
        return FullRealization(n)
    raise ValueError(f"unknown layout {layout!r}")


def apply_tree(node: Node, u: GridField, n: int, layout: str = "biradial") -> GridField:
    """Apply an operator tree to grid samples; the ``valid`` mask records
    where every stencil used stayed inside the box."""
    real = _realization(u, n, layout)
    valid0 = np.ones(u.dims, bool) if u.valid is None else u.valid
    cache: Dict[int, Tuple[np.ndarray, np.ndarray]] = {}

    def ev(nd: Node, s: np.ndarray, valid: np.ndarray):
        if nd.kind == "id":
            return s, valid
        if nd.kind == "gen":
            g = u.with_samples(s)
            return real.apply_gen(nd.name, g), real.shrink(u, valid)
        if nd.kind == "scale":
            v, m = ev(nd.children[0], s, valid)
            return float(nd.coeff) * v, m
        if nd.kind == "sum":
            parts = [ev(c, s, valid) for c in nd.children]
            return sum(p[0] for p in parts), np.logical_and.reduce([p[1] for p in parts])
        if nd.kind == "compose":
            for c in reversed(nd.children):
                s, valid = ev(c, s, valid)
            return s, valid
        raise ValueError(nd.kind)

    out, mask = ev(node, u.samples, valid0)
    return u.with_samples(np.where(mask, out, 0.0), mask)


def juhl_apply(op: JuhlOperator, u: GridField, layout: str = "biradial") -> GridField:
    return apply_tree(op.tree, u, op.n, layout)


def restrict_D_ak(u: GridField, k: int, params: ModelParams, layout: str = "biradial") -> GridField:
    """``D_{a,k} u``: apply ``D(-(a+2n)/4, k)`` and restrict to ``z_n = 0``.

    For ``layout="biradial"`` the ``rho`` axis must start at 0 and the
    result lives on ``(R, t)``; for ``layout="full"`` the grid must contain
    ``x_n = y_n = 0`` and the result lives on ``(z', t)``.
    """
    n = params.n
    op = juhl_build(juhl_parameter(params), k, n)
    v = juhl_apply(op, u, layout)
    if layout == "biradial":
        if abs(u.origin[1]) > 1e-12 * u.spacing[1]:
            raise ValueError("rho axis must start at 0")
        sl = (slice(None), 0, slice(None))
        keep = (0, 2)
    else:
        ix, iy = 2 * n - 2, 2 * n - 1
        i = int(round(-u.origin[ix] / u.spacing[ix]))
        j = int(round(-u.origin[iy] / u.spacing[iy]))
        if abs(u.origin[ix] + i * u.spacing[ix]) > 1e-9 or abs(u.origin[iy] + j * u.spacing[iy]) > 1e-9:
            raise ValueError("grid does not contain z_n = 0")
        sl = tuple(i if a == ix else j if a == iy else slice(None) for a in range(u.ndim))
        keep = tuple(a for a in range(u.ndim) if a not in (ix, iy))
    return GridField(v.samples[sl], tuple(u.spacing[a] for a in keep),
                     tuple(u.origin[a] for a in keep), tuple(u.names[a] for a in keep if u.names),
                     v.valid[sl])
