"""
Bridge profile types.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict

from src.models.geometry import Branch
from src.utils.exceptions import DomainError


@dataclass(frozen=True)
class Exponents:
    """Critical Sobolev exponents 2* = 2n/(n-2) and 2# = 2(n-1)/(n-2)."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise DomainError("Dimension must be at least 3", details={"n": self.n})

    @property
    def two_star(self) -> Fraction:
        return Fraction(2 * self.n, self.n - 2)

    @property
    def two_sharp(self) -> Fraction:
        return Fraction(2 * (self.n - 1), self.n - 2)

    @property
    def bulk(self) -> float:
        return float(self.two_star)

    @property
    def trace(self) -> float:
        return float(self.two_sharp)

    @property
    def decay(self) -> float:
        """Profile exponent (n-2)/2."""
        return (self.n - 2) / 2.0


@dataclass(frozen=True)
class BridgeProfile:
    """
    Normalized bridge minimizer U(x) = C (eta + |x - t e1|^2)^{-(n-2)/2} at trace level T.

    `diagnostics` carries the invariant battery computed when the profile was built.
    """

    n: int
    branch: Branch
    t: float
    C: float
    lam: float
    sigma: float
    T: float
    phi: float
    diagnostics: Dict[str, dict] = field(default_factory=dict, compare=False)

    @property
    def eta(self) -> int:
        return self.branch.eta

    @property
    def exponents(self) -> Exponents:
        return Exponents(self.n)

    @property
    def identifier(self) -> str:
        return f"n{self.n}-{self.branch.value}-t{self.t:.12g}"

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "branch": self.branch.value,
            "t": self.t,
            "C": self.C,
            "lambda": self.lam,
            "sigma": self.sigma,
            "T": self.T,
            "phi": self.phi,
            "phi_squared": self.phi ** 2,
        }
