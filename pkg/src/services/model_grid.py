"""
Tensor quadrature on the model ball in geodesic polar coordinates (r, u = cos(theta)).

Fields are zonal about the symmetry axis, so every integral over the ball reduces to a 2D
Gauss-Legendre (r) x Gauss-Jacobi (u) sum with weight s_k(r)^{n-1} (1-u^2)^{(n-3)/2}.
"""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.special import roots_jacobi

from src.models.geometry import ModelBall
from src.services.geometry_service import ModelChart, s_kappa
from src.services.profile_service import sphere_area


@dataclass(frozen=True)
class ModelField:
    """Zonal field sampled on a ModelGrid: interior values with (r, u) derivatives, boundary values."""

    values: np.ndarray
    dr: np.ndarray
    du: np.ndarray
    boundary: np.ndarray

    def __add__(self, other: "ModelField") -> "ModelField":
        return ModelField(self.values + other.values, self.dr + other.dr,
                          self.du + other.du, self.boundary + other.boundary)

    def __sub__(self, other: "ModelField") -> "ModelField":
        return ModelField(self.values - other.values, self.dr - other.dr,
                          self.du - other.du, self.boundary - other.boundary)

    def __mul__(self, factor: float) -> "ModelField":
        return ModelField(factor * self.values, factor * self.dr, factor * self.du, factor * self.boundary)

    __rmul__ = __mul__


class ModelGrid:
    """Quadrature nodes of the model ball with their half-space images."""

    def __init__(self, ball: ModelBall, radial_nodes: int = 96, angular_nodes: int = 48):
        self.ball = ball
        self.chart = ModelChart(ball)
        n = ball.n
        jacobi = 0.5 * (n - 3)
        nodes, weights = np.polynomial.legendre.leggauss(radial_nodes)
        self.r = 0.5 * ball.radius * (nodes + 1.0)
        self.s = s_kappa(ball.kappa, self.r)
        self.u, u_weights = roots_jacobi(angular_nodes, jacobi, jacobi)
        area = sphere_area(n - 2)
        self.bulk_weights = area * np.outer(0.5 * ball.radius * weights * self.s ** (n - 1), u_weights)
        self.boundary_weights = area * float(s_kappa(ball.kappa, ball.radius)) ** (n - 1) * u_weights
        self.angular_factor = (1.0 - self.u ** 2)[None, :] / self.s[:, None] ** 2

        r_mesh, u_mesh = np.meshgrid(self.r, self.u, indexing="ij")
        self.r_mesh, self.u_mesh = r_mesh, u_mesh
        self.x1, self.rho, self.jacobian = self.chart.to_half_space(r_mesh, u_mesh)
        self.boundary_x1, self.boundary_rho, _ = self.chart.to_half_space(np.full_like(self.u, ball.radius), self.u)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.r.size, self.u.size

    def integrate(self, values: np.ndarray) -> float:
        """Integral over the ball."""
        return float(np.sum(self.bulk_weights * values))

    def integrate_boundary(self, values: np.ndarray) -> float:
        """Integral over the boundary sphere."""
        return float(np.sum(self.boundary_weights * values))

    def dirichlet(self, field: ModelField, other: ModelField = None) -> float:
        other = other or field
        density = field.dr * other.dr + self.angular_factor * field.du * other.du
        return self.integrate(density)

    def n_form(self, field: ModelField, lam: float, sigma: float, other: ModelField = None) -> float:
        """Transported Dirichlet form: int |grad h|^2 + lam int h^2 - sigma int_boundary h^2."""
        other = other or field
        return (self.dirichlet(field, other) + lam * self.integrate(field.values * other.values)
                - sigma * self.integrate_boundary(field.boundary * other.boundary))

    def q_form(self, field: ModelField) -> float:
        """Hessian form: int |grad h|^2 - n kappa int h^2 - beta int_boundary h^2."""
        ball = self.ball
        return (self.dirichlet(field) - ball.n * ball.kappa * self.integrate(field.values ** 2)
                - ball.beta * self.integrate_boundary(field.boundary ** 2))

    def constant(self, value: float = 1.0) -> ModelField:
        zeros = np.zeros(self.shape)
        return ModelField(np.full(self.shape, value), zeros, zeros.copy(), np.full(self.u.size, value))

    def from_model(self, radial: Callable, radial_prime: Callable, angular: Callable, angular_prime: Callable) -> ModelField:
        """Separated field f(r) Y(u) from callables."""
        f, fp = radial(self.r), radial_prime(self.r)
        y, yp = angular(self.u), angular_prime(self.u)
        boundary = float(radial(np.array([self.ball.radius]))[0]) * y
        return ModelField(np.outer(f, y), np.outer(fp, y), np.outer(f, yp), boundary)

    def from_half_space(self, evaluate: Callable) -> ModelField:
        """
        Samples a meridian half-space field.

        Args:
            evaluate: Callable (x1, rho) -> (value, d/dx1, d/drho) on arrays.

        Returns:
            Field with (r, u) derivatives obtained through the chart Jacobian.
        """
        value, d1, d_rho = evaluate(self.x1, self.rho)
        jac = self.jacobian
        dr = d1 * jac[..., 0, 0] + d_rho * jac[..., 1, 0]
        du = d1 * jac[..., 0, 1] + d_rho * jac[..., 1, 1]
        boundary = evaluate(self.boundary_x1, self.boundary_rho)[0]
        return ModelField(value, dr, du, boundary)
