"""Special functions and closed-form constants.

Gamma and digamma come from the standard library and SciPy.  The Gauss
hypergeometric function is evaluated here with explicit control over the
transformation used in each region of the real line, because the solvers
need it up to and including ``z = 1`` and for parameter combinations where
``c - a - b`` is an integer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Dict, Tuple, Union

import numpy as np
from scipy import special as _sp

from .params import ModelParams, ParameterRangeError

Number = Union[int, float, Fraction]

_EPS = np.finfo(float).eps


class PoleError(ArithmeticError):
    """Argument sits on a pole of a gamma-type function."""


class DivergenceError(ArithmeticError):
    """A series or integral diverges for the given parameters."""


class AccuracyError(ArithmeticError):
    """Requested accuracy could not be reached."""


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------

def _is_nonpositive_int(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma_fn(x: float) -> float:
    """Gamma function of a real argument.

    Raises
    ------
    PoleError
        If ``x`` is zero or a negative integer.
    """
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x.is_integer() and x <= 171:
        return float(math.factorial(int(x) - 1))
    return math.gamma(x)


def rgamma(x: float) -> float:
    """Reciprocal gamma, equal to zero at the poles."""
    x = float(x)
    if _is_nonpositive_int(x):
        return 0.0
    if x > 170:
        return math.exp(-math.lgamma(x))
    return 1.0 / math.gamma(x)


def log_gamma_signed(x: float) -> Tuple[float, float]:
    """Return ``(log|Gamma(x)|, sign Gamma(x))``."""
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x > 0:
        return math.lgamma(x), 1.0
    sign = -1.0 if math.floor(x) % 2 else 1.0
    return math.lgamma(x), sign


def gamma_ratio(num: Tuple[float, ...], den: Tuple[float, ...]) -> float:
    """Product of gammas over product of gammas, computed in log space.

    A pole in the denominator makes the ratio zero; a pole in the numerator
    raises :class:`PoleError`.
    """
    if any(_is_nonpositive_int(float(d)) for d in den):
        for v in num:
            if _is_nonpositive_int(float(v)):
                raise PoleError("0/0 in gamma ratio")
        return 0.0
    small = all(abs(v) < 150 for v in num + den)
    if small:
        out = 1.0
        for v in num:
            out *= gamma_fn(v)
        for v in den:
            out /= gamma_fn(v)
        if math.isfinite(out) and out != 0.0:
            return out
    logv, sign = 0.0, 1.0
    for v in num:
        lg, s = log_gamma_signed(v)
        logv += lg
        sign *= s
    for v in den:
        lg, s = log_gamma_signed(v)
        logv -= lg
        sign *= s
    return sign * math.exp(logv)


def digamma(x: float) -> float:
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"digamma has a pole at {x}")
    return float(_sp.digamma(x))


def pochhammer(x: Number, m: int) -> Number:
    """Rising factorial ``(x)_m = x (x+1) ... (x+m-1)``.

    Exact for ``int`` and ``Fraction`` input.  For floats a direct product is
    used up to ``m = 64`` and a gamma ratio beyond that.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    if isinstance(x, (int, Fraction)) or m <= 64:
        out: Number = 1 if isinstance(x, (int, Fraction)) else 1.0
        for i in range(m):
            out = out * (x + i)
        return out
    x = float(x)
    if _is_nonpositive_int(x) and m > -x:
        return 0.0
    return gamma_ratio((x + m,), (x,))


# ---------------------------------------------------------------------------
# Gauss hypergeometric function
# ---------------------------------------------------------------------------

_MAX_TERMS = 200_000


def _series(a: float, b: float, c: float, z: float) -> float:
    """Direct power series, for |z| < 1."""
    term = 1.0
    total = 1.0
    comp = 0.0
    for k in range(_MAX_TERMS):
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        term *= ratio
        # Kahan summation keeps long near-z=1 series accurate
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if term == 0.0:
            return total
        nxt = abs((a + k + 1) * (b + k + 1) / ((c + k + 1) * (k + 2.0)) * z)
        if nxt < 1.0 and abs(term) * nxt / (1.0 - nxt) <= 0.25 * _EPS * abs(total):
            return total
    raise AccuracyError(f"2F1 series did not converge at z={z}")


def _terminating(a: float, b: float, c: float, z: float) -> float:
    m = int(-a) if _is_nonpositive_int(a) else int(-b)
    if _is_nonpositive_int(a) and _is_nonpositive_int(b):
        m = min(int(-a), int(-b))
    term, total = 1.0, 1.0
    for k in range(m):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
        total += term
    return total


def _gauss_sum(a: float, b: float, c: float) -> float:
    if c - a - b <= 0:
        raise DivergenceError(
            f"2F1({a},{b};{c};1) diverges: c-a-b = {c - a - b} <= 0")
    return gamma_ratio((c, c - a - b), (c - a, c - b))


def _log_case(a: float, b: float, c: float, z: float) -> float:
    """Expansion around z = 1 when ``c - a - b`` is an integer."""
    w = 1.0 - z
    lw = math.log(w)
    m = int(round(c - a - b))
    if m >= 0:
        # c = a + b + m
        head = 0.0
        if m > 0:
            pref = gamma_fn(m) * gamma_ratio((a + b + m,), (a + m, b + m))
            term = 1.0
            for k in range(m):
                if k > 0:
                    term *= (a + k - 1) * (b + k - 1) / (k * (1 - m + k - 1)) * w
                head += term
            head *= pref
        pref2 = (-w) ** m * gamma_fn(a + b + m) * rgamma(a) * rgamma(b)
        if pref2 == 0.0:
            return head
        total = 0.0
        coef = 1.0 / math.factorial(m)
        k = 0
        while True:
            bracket = (lw - digamma(k + 1) - digamma(k + m + 1)
                       + digamma(a + k + m) + digamma(b + k + m))
            piece = coef * bracket
            total += piece
            coef *= (a + m + k) * (b + m + k) / ((k + 1) * (k + m + 1)) * w
            k += 1
            if abs(piece) <= 0.25 * _EPS * abs(total) and abs(coef) * (abs(lw) + 50) <= _EPS * abs(total):
                break
            if k > _MAX_TERMS:
                raise AccuracyError("log-case 2F1 expansion did not converge")
        return head - pref2 * total
    mm = -m
    # c = a + b - mm
    pref = gamma_fn(mm) * gamma_ratio((a + b - mm,), (a, b)) * w ** (-mm)
    head = 0.0
    term = 1.0
    for k in range(mm):
        if k > 0:
            term *= (a - mm + k - 1) * (b - mm + k - 1) / (k * (1 - mm + k - 1)) * w
        head += term
    head *= pref
    pref2 = (-1) ** mm * gamma_fn(a + b - mm) * rgamma(a - mm) * rgamma(b - mm)
    if pref2 == 0.0:
        return head
    total = 0.0
    coef = 1.0 / math.factorial(mm)
    k = 0
    while True:
        bracket = (lw - digamma(k + 1) - digamma(k + mm + 1)
                   + digamma(a + k) + digamma(b + k))
        piece = coef * bracket
        total += piece
        coef *= (a + k) * (b + k) / ((k + 1) * (k + mm + 1)) * w
        k += 1
        if abs(piece) <= 0.25 * _EPS * abs(total) and abs(coef) * (abs(lw) + 50) <= _EPS * abs(total):
            break
        if k > _MAX_TERMS:
            raise AccuracyError("log-case 2F1 expansion did not converge")
    return head - pref2 * total


def _near_one(a: float, b: float, c: float, z: float) -> float:
    """0.5 < z < 1 via the connection formula to ``1 - z``."""
    s = c - a - b
    dist = abs(s - round(s))
    if dist < 1e-12:
        # integer up to rounding in the caller's parameter arithmetic
        return _log_case(a, b, c, z)
    if z <= 0.9 or dist < 1e-5:
        if dist < 1e-5 and 1.0 - z < 1e-4:
            raise AccuracyError(
                "c-a-b within 1e-5 of an integer too close to z=1")
        return _series(a, b, c, z)
    w = 1.0 - z
    first = gamma_ratio((c, s), (c - a, c - b))
    if first != 0.0:
        first *= _series(a, b, 1.0 - s, w)
    second = gamma_ratio((c, -s), (a, b))
    if second != 0.0:
        second *= w ** s * _series(c - a, c - b, 1.0 + s, w)
    return first + second


def gauss_2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for real ``z <= 1``.

    Parameters
    ----------
    a, b, c : float
        Parameters; ``c`` must not be a non-positive integer.
    z : float
        Argument, ``z <= 1``.  At ``z = 1`` the Gauss summation formula is
        used and ``c - a - b > 0`` is required.

    Returns
    -------
    float

    Raises
    ------
    PoleError
        ``c`` is a non-positive integer.
    DivergenceError
        ``z = 1`` with ``c - a - b <= 0``.
    ValueError
        ``z > 1``.

    Notes
    -----
    Regions: direct series for ``|z| <= 0.5``; Pfaff transformation
    ``(1-z)^(-a) 2F1(a, c-b; c; z/(z-1))`` for ``z < -0.5``; for
    ``0.5 < z < 1`` the series up to ``z = 0.9`` and the connection formula
    to ``1 - z`` beyond, switching to the logarithmic expansion when
    ``c - a - b`` is an integer.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_int(c):
        raise PoleError(f"2F1 undefined for c = {c}")
    if z > 1.0:
        raise ValueError(f"2F1 is only implemented for z <= 1, got {z}")
    if z == 0.0 or a == 0.0 or b == 0.0:
        return 1.0
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        if z == 1.0:
            return _gauss_sum(a, b, c) if c - a - b > 0 else _terminating(a, b, c, z)
        return _terminating(a, b, c, z)
    if z == 1.0:
        return _gauss_sum(a, b, c)
    if abs(z) <= 0.5:
        return _series(a, b, c, z)
    if z < -0.5:
        w = z / (z - 1.0)
        # symmetric choice: transform on whichever parameter keeps c-b sane
        return (1.0 - z) ** (-a) * gauss_2f1(a, c - b, c, w)
    return _near_one(a, b, c, z)


def gauss_2f1_array(a: float, b: float, c: float, z) -> np.ndarray:
    """Elementwise :func:`gauss_2f1` over an array of arguments."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    flat = out.reshape(-1)
    for i, zi in enumerate(z.reshape(-1)):
        flat[i] = gauss_2f1(a, b, c, float(zi))
    return out


def pochhammer_ratio_partial_sums(x: float, y: float, m_terms: int) -> np.ndarray:
    """Partial sums of ``sum_m (x)_m / (y)_m``, i.e. of ``2F1(1, x; y; 1)``.

    Returns the array ``S_0, ..., S_{m_terms-1}`` of cumulative sums.
    """
    ratios = (x + np.arange(m_terms - 1)) / (y + np.arange(m_terms - 1))
    terms = np.concatenate(([1.0], np.cumprod(ratios)))
    return np.cumsum(terms)


# ---------------------------------------------------------------------------
# Gegenbauer polynomials
# ---------------------------------------------------------------------------

def _as_exact(alpha: Number) -> Union[Fraction, float]:
    if isinstance(alpha, (int, Fraction)) or isinstance(alpha, Rational):
        return Fraction(alpha)
    fr = Fraction(float(alpha)).limit_denominator(10**6)
    if float(fr) == float(alpha):
        return fr
    return float(alpha)


@dataclass(frozen=True)
class GegenbauerPoly:
    """Two-variable Gegenbauer polynomial ``C_j^alpha(x, y)``.

    ``coeffs`` maps an exponent pair ``(p, q)`` to the coefficient of
    ``x^p y^q``; every key satisfies ``2p + q = j``.  Substituting
    ``x = 1`` gives the classical one-variable polynomial in ``y``.
    """

    degree: int
    alpha: Union[Fraction, float]
    coeffs: Dict[Tuple[int, int], Union[Fraction, float]] = field(default_factory=dict)

    def __call__(self, x, y):
        total = 0.0
        for (p, q), c in self.coeffs.items():
            total = total + float(c) * np.power(x, p) * np.power(y, q)
        return total

    def one_var(self, z):
        return self(1.0, z)

    @property
    def exact(self) -> bool:
        return isinstance(self.alpha, Fraction)


def gegenbauer_two_var(j: int, alpha: Number) -> GegenbauerPoly:
    """Coefficients of ``C_j^alpha(x, y) = x^(j/2) C_j^alpha(y / sqrt(x))``.

    Uses the finite sum
    ``sum_k (-1)^k (alpha)_(j-k) (2y)^(j-2k) x^k / (k! (j-2k)!)``.  When
    ``alpha`` is rational (an ``int``, a ``Fraction`` or a float with an exact
    small-denominator representation) the coefficients are exact fractions.
    """
    if j < 0:
        raise ValueError("degree must be non-negative")
    al = _as_exact(alpha)
    coeffs: Dict[Tuple[int, int], Union[Fraction, float]] = {}
    for k in range(j // 2 + 1):
        num = pochhammer(al, j - k) * 2 ** (j - 2 * k)
        den = math.factorial(k) * math.factorial(j - 2 * k)
        c = (-1) ** k * (Fraction(num) / den if isinstance(al, Fraction) else float(num) / den)
        if c != 0:
            coeffs[(k, j - 2 * k)] = c
    return GegenbauerPoly(j, al, coeffs)


def gegenbauer(j: int, alpha: float, z):
    """Classical Gegenbauer polynomial evaluated by the three-term recurrence."""
    z = np.asarray(z, dtype=float)
    p0 = np.ones_like(z)
    if j == 0:
        return p0
    p1 = 2.0 * alpha * z
    for m in range(1, j):
        p0, p1 = p1, (2.0 * (m + alpha) * z * p1 - (m + 2.0 * alpha - 1.0) * p0) / (m + 1.0)
    return p1


# ---------------------------------------------------------------------------
# Closed-form constants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelConstants:
    """Normalisations and norm constants of the Poisson transforms.

    Entries that do not apply to ``params.field`` (or whose formula is
    singular at the given ``a``) are ``nan``.

    Attributes
    ----------
    c_real, c_heis : float
        Kernel normalisations making the Poisson transform reproduce its
        boundary values.
    iso_real, iso_heis : float
        Ratio of squared Sobolev norms ``||P_a f||^2 / ||f||^2``.
    lp_bound_real, lp_bound_heis : float
        Constant ``C`` in ``||P_a f||_q <= C ||f||_p`` for the exponent ``p``.
    p : float
        The ``p`` used for the ``L^p`` constants.
    """

    c_real: float
    c_heis: float
    iso_real: float
    iso_heis: float
    lp_bound_real: float
    lp_bound_heis: float
    p: float = 2.0

    def as_dict(self) -> Dict[str, float]:
        return {k: getattr(self, k) for k in
                ("c_real", "c_heis", "iso_real", "iso_heis",
                 "lp_bound_real", "lp_bound_heis", "p")}


def c_real(n: int, a: float) -> float:
    return gamma_ratio(((n - a) / 2.0,), ((1.0 - a) / 2.0,)) / math.pi ** ((n - 1) / 2.0)


def c_heis(n: int, a: float) -> float:
    g = gamma_fn((2 * n - a) / 4.0)
    return 2.0 ** ((2 * n - a - 4) / 2.0) * g * g / (math.pi ** n * gamma_fn(-a / 2.0))


def iso_real(a: float) -> float:
    return 2.0 ** a * math.pi * gamma_ratio((2.0 - a,), ((1.0 - a) / 2.0, (3.0 - a) / 2.0))


def iso_heis(n: int, a: float) -> float:
    return math.pi * a / (a - 2.0 * n)


def lp_exponent(params: ModelParams, p: float) -> float:
    """Target exponent ``q`` of the ``L^p -> L^q`` bound."""
    if math.isinf(p):
        return math.inf
    n = params.n
    return n * p / (n - 1) if params.euclidean else (n + 1) * p / n


def lp_bound(params: ModelParams, p: float) -> float:
    """Constant of the ``L^p -> L^q`` bound for the Poisson transform."""
    q = lp_exponent(params, p)
    if math.isinf(q):
        return 1.0
    n = params.n
    if params.euclidean:
        base = 2.0 * c_real(n, params.a) ** (1.0 / (n - 1))
    else:
        base = math.pi * c_heis(n, params.a) ** (1.0 / n)
    return base ** (1.0 / q)


def model_constants(params: ModelParams, p: float = 2.0) -> ModelConstants:
    """All six constants for ``params``.

    Raises
    ------
    ParameterRangeError
        ``a`` outside the Dirichlet range of ``params.field``.
    """
    params.require_dirichlet()
    n, a = params.n, params.a
    nan = math.nan
    if params.euclidean:
        return ModelConstants(c_real(n, a), nan, iso_real(a), nan, lp_bound(params, p), nan, p)
    return ModelConstants(nan, c_heis(n, a), nan, iso_heis(n, a), nan, lp_bound(params, p), p)


def eigenvalue(field: str, k: int, a: float) -> float:
    """Point-spectrum eigenvalue of the degenerate operator.

    ``k (k + a - 1)`` for ``k < (1 - a)/2`` in the Euclidean case and
    ``2k (2k + a)`` for ``4k < -a`` in the Heisenberg case.
    """
    if k < 0:
        raise ParameterRangeError("k must be non-negative")
    if field == "euclidean":
        if not k < (1.0 - a) / 2.0:
            raise ParameterRangeError(f"need k < (1-a)/2, got k={k}, a={a}")
        return k * (k + a - 1.0)
    if field == "heisenberg":
        if not 4 * k < -a and k != 0:
            raise ParameterRangeError(f"need 4k < -a, got k={k}, a={a}")
        return 2.0 * k * (2.0 * k + a)
    raise ParameterRangeError(f"unknown field {field!r}")


def c_real_higher(n: int, a: float, j: int) -> float:
    """Normalisation of the order-``j`` Euclidean Poisson kernel."""
    return gamma_ratio(((n - a) / 2.0 - j,), ((1.0 - a) / 2.0 - j,)) / (
        math.factorial(j) * math.pi ** ((n - 1) / 2.0))


def iso_real_higher(a: float, j: int) -> float:
    """Sobolev isometry constant of the order-``j`` Euclidean transform."""
    h = (1.0 - a) / 2.0 - j
    return (2.0 ** (a + 2 * j) * math.pi * gamma_ratio((2.0 - a - j,), (h, h))
            / (math.factorial(j) * h))
