"""Model parameters shared by the Euclidean and Heisenberg solvers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

Field = Literal["euclidean", "heisenberg"]


class ParameterRangeError(ValueError):
    """Raised when ``(n, a)`` lies outside the range an operation needs."""


@dataclass(frozen=True)
class ModelParams:
    """Dimension and weight exponent of the degenerate operator.

    Parameters
    ----------
    field : {"euclidean", "heisenberg"}
        Which geometry.  For ``"euclidean"`` the ambient space is R^n with
        boundary R^(n-1); for ``"heisenberg"`` it is H^(2n+1) with boundary
        H^(2n-1).
    n : int
        Dimension index, at least 2.
    a : float
        Exponent of the weight ``|x_n|^a`` (resp. ``|z_n|^a``).
    """

    field: Field
    n: int
    a: float

    def __post_init__(self) -> None:
        if self.field not in ("euclidean", "heisenberg"):
            raise ParameterRangeError(f"unknown field {self.field!r}")
        if int(self.n) != self.n or self.n < 2:
            raise ParameterRangeError(f"n must be an integer >= 2, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))

    @property
    def euclidean(self) -> bool:
        return self.field == "euclidean"

    @property
    def mu(self) -> float:
        return (self.a - 2.0) / 2.0

    @property
    def rho(self) -> float:
        return self.n / 2.0 if self.euclidean else self.n + 1.0

    @property
    def rho_prime(self) -> float:
        return (self.n - 1) / 2.0 if self.euclidean else float(self.n)

    @property
    def nu(self) -> float:
        return self.mu + self.rho - self.rho_prime

    @property
    def d(self) -> int:
        return 1 if self.euclidean else 2

    def selfadjoint_range(self) -> tuple[float, float]:
        """Open-closed interval ``(lo, hi]`` of admissible ``a``."""
        return (2.0 - self.n, 2.0) if self.euclidean else (-2.0 * self.n, 2.0)

    def dirichlet_range(self) -> tuple[float, float]:
        """Open interval of ``a`` for which the Dirichlet problem is solvable."""
        return (2.0 - self.n, 1.0) if self.euclidean else (-2.0 * self.n, 0.0)

    def in_dirichlet_range(self) -> bool:
        lo, hi = self.dirichlet_range()
        return lo < self.a < hi

    def require_dirichlet(self) -> None:
        if not self.in_dirichlet_range():
            lo, hi = self.dirichlet_range()
            raise ParameterRangeError(
                f"a={self.a} outside ({lo}, {hi}) for {self.field} n={self.n}")

    def require_selfadjoint(self) -> None:
        lo, hi = self.selfadjoint_range()
        if not lo < self.a <= hi:
            raise ParameterRangeError(
                f"a={self.a} outside ({lo}, {hi}] for {self.field} n={self.n}")

    def in_formula_range(self) -> bool:
        """Kernel integrals converge: ``a < 1`` (Euclidean), ``a < 0`` (Heisenberg).

        The lower end of the Dirichlet interval is a function-space condition;
        the kernels and multipliers themselves stay well defined below it.
        """
        return self.a < (1.0 if self.euclidean else 0.0)

    def require_formula_range(self) -> None:
        if not self.in_formula_range():
            hi = 1.0 if self.euclidean else 0.0
            raise ParameterRangeError(
                f"a={self.a} must be below {hi} for the {self.field} kernel to converge")

    def with_a(self, a: float) -> "ModelParams":
        return ModelParams(self.field, self.n, a)


def euclidean(n: int, a: float) -> ModelParams:
    return ModelParams("euclidean", n, a)


def heisenberg(n: int, a: float) -> ModelParams:
    return ModelParams("heisenberg", n, a)
