"""
Perturbation laboratory around a bridge profile.

Competitors are written u = U (1 + w) and handled in the conformal model, where
    int u^{2*} dx = int (1+w)^{2*} dV,   int_boundary u^{2#} = int_boundary (1+w)^{2#} dS,
    int |grad u|^2 dx = N(1+w) = int |grad(1+w)|^2 + lam int (1+w)^2 - sigma int_boundary (1+w)^2,
so every quantity of the lab is a ModelGrid quadrature of the zonal field w.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.optimize import minimize
from scipy.special import roots_jacobi

from src.models.config import QuadratureSpec, StabilitySettings
from src.models.geometry import ModelBall
from src.models.profile import BridgeProfile
from src.models.spectral import RadialFunction, SectorBottom
from src.models.stability import GroupElement, Perturbation, StabilityReport, SweepPoint
from src.services.geometry_service import ModelChart, s_kappa, s_kappa_prime
from src.services.model_grid import ModelField, ModelGrid
from src.services.profile_service import family_norms, profile_eval, sphere_area
from src.services.quadrature_service import half_line_nodes, interval_nodes
from src.services.spectral_service import (
    cosine_grid,
    dilation_field,
    translation_field,
    zonal_harmonic,
    zonal_harmonic_prime,
)
from src.utils.exceptions import (
    DomainError,
    IntegralError,
    NearestPointError,
    ProjectionError,
)

logger = structlog.get_logger()

DEFICIT_FLOOR = -1e-8
# Handles map points x of shape (..., n) to (value, gradient of shape (..., n)).
FieldHandle = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
Meridian = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray, np.ndarray]]


# Half-space fields

def _from_meridian(x: np.ndarray, evaluate: Meridian) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    tangential = x[..., 1:]
    rho = np.linalg.norm(tangential, axis=-1)
    value, d1, d_rho = evaluate(x[..., 0], rho)
    with np.errstate(invalid="ignore", divide="ignore"):
        direction = np.where(rho[..., None] > 0.0, tangential / rho[..., None], 0.0)
    gradient = np.concatenate([d1[..., None], d_rho[..., None] * direction], axis=-1)
    return value, gradient


def _meridian_points(n: int, x1: np.ndarray, rho: np.ndarray) -> np.ndarray:
    x1, rho = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(rho, dtype=float))
    points = np.zeros(x1.shape + (n,))
    points[..., 0] = np.maximum(x1, 0.0)
    points[..., 1] = rho
    return points


class ProfileField:
    """U itself as a field handle."""

    def __init__(self, profile: BridgeProfile):
        self.profile = profile
        self.n = profile.n

    def __call__(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return profile_eval(self.profile, x)


class DilationGenerator:
    """Z0 = k U + x.grad U, the generator of the dilations at U."""

    def __init__(self, profile: BridgeProfile):
        self.profile = profile
        self.n = profile.n

    def __call__(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        value, gradient = profile_eval(self.profile, x)
        ratio, ratio_gradient = _from_meridian(x, lambda a, b: dilation_field(self.profile, a, b))
        return value * ratio, gradient * ratio[..., None] + value[..., None] * ratio_gradient


class TranslationGenerator:
    """
    Z_2 = d U / d x2, the generator of the translations along e2 at U.

    Exact on the meridian x' = rho e2 with rho >= 0, which is where the lab samples it.
    """

    def __init__(self, profile: BridgeProfile):
        self.profile = profile
        self.n = profile.n

    def __call__(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        value, gradient = profile_eval(self.profile, x)
        ratio, ratio_gradient = _from_meridian(x, lambda a, b: translation_field(self.profile, a, b))
        return value * ratio, gradient * ratio[..., None] + value[..., None] * ratio_gradient


def transverse_moments(n: int, nodes: int = 16) -> Tuple[float, float]:
    """Means of w and w^2 over the unit sphere S^{n-2}, w one coordinate of the direction."""
    alpha = 0.5 * (n - 4)
    w, weights = roots_jacobi(nodes, alpha, alpha)
    total = float(np.sum(weights))
    return float(weights @ w) / total, float(weights @ w ** 2) / total


class ActedField:
    """(g.u)(x) = a^k u(a x1, a (x' - z)), with its gradient."""

    def __init__(self, g: GroupElement, base: FieldHandle):
        if g.shift.size != base.n - 1:
            raise DomainError("Shift dimension does not match the field",
                              details={"shift": g.shift.size, "n": base.n})
        self.g = g
        self.base = base
        self.n = base.n

    def __call__(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        a = self.g.scale
        k = 0.5 * (self.n - 2)
        y = np.array(x, dtype=float)
        y[..., 0] *= a
        y[..., 1:] = a * (y[..., 1:] - self.g.shift)
        value, gradient = self.base(y)
        return a ** k * value, a ** (k + 1.0) * gradient


def act(g: GroupElement, u: FieldHandle) -> ActedField:
    """Dilation-translation action on a field handle."""
    return ActedField(g, u)


def orbit_norms(profile: BridgeProfile, g: GroupElement, quad: QuadratureSpec) -> Dict[str, float]:
    """Bulk, trace and Dirichlet norms of act(g, U); translations do not enter."""
    return family_norms(profile.n, profile.eta, profile.C, profile.t, g.scale, quad)


class LiftedPerturbation:
    """psi = U f(r) Z_l(u), evaluated on the half-space through the model chart."""

    def __init__(self, profile: BridgeProfile, ball: ModelBall, perturbation: Perturbation):
        self.profile = profile
        self.ball = ball
        self.perturbation = perturbation
        self.n = profile.n
        self.chart = ModelChart(ball)
        self._spline = perturbation.radial.interpolant()
        self._slope = self._spline.derivative()

    def model_values(self, r, u) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """phi and its (r, u) derivatives."""
        ell, amplitude = self.perturbation.ell, self.perturbation.amplitude
        f, fp = self._spline(r), self._slope(r)
        y, yp = zonal_harmonic(self.n, ell, u), zonal_harmonic_prime(self.n, ell, u)
        return amplitude * f * y, amplitude * fp * y, amplitude * f * yp

    def meridian(self, x1: np.ndarray, rho: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        r, u = self.chart.from_half_space(x1, rho)
        _, _, jacobian = self.chart.to_half_space(r, u)
        phi, phi_r, phi_u = self.model_values(r, u)
        model_gradient = np.stack([phi_r, phi_u], axis=-1)[..., None]
        # grad_(x1, rho) phi = J^{-T} grad_(r, u) phi
        phi_gradient = np.linalg.solve(np.swapaxes(jacobian, -1, -2), model_gradient)[..., 0]
        value, gradient = profile_eval(self.profile, _meridian_points(self.n, x1, rho))
        d1 = gradient[..., 0] * phi + value * phi_gradient[..., 0]
        d_rho = gradient[..., 1] * phi + value * phi_gradient[..., 1]
        return value * phi, d1, d_rho

    def __call__(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return _from_meridian(x, self.meridian)


def lift(profile: BridgeProfile, ball: ModelBall, perturbation: Perturbation) -> LiftedPerturbation:
    """Half-space handle of the perturbation psi = U phi."""
    return LiftedPerturbation(profile, ball, perturbation)


def half_space_dirichlet(profile: BridgeProfile, meridian: Meridian, quad: QuadratureSpec) -> float:
    """
    int |grad psi|^2 dx over the half-space for a field symmetric about the x1 axis, by tensor
    quadrature in polar coordinates x1 = R cos(theta), rho = R sin(theta) of the meridian quarter
    plane, with weight |S^{n-2}| rho^{n-2} R.

    Polar coordinates keep the point at infinity a single smooth tail. The nodes are always
    Gauss-Legendre: tanh-sinh nodes reach the axis and infinity in floating point, where the chart
    Jacobian is singular.
    """
    n = profile.n
    if quad.scheme != "gauss-legendre":
        quad = quad.model_copy(update={"scheme": "gauss-legendre"})
    scale = float(np.sqrt(abs(profile.eta + profile.t ** 2)))
    peak = profile.t if (profile.eta > 0 and profile.t > 0.0) else 0.0
    width = quad.tail_cutoff * max(1.0, scale)
    radius, w_radius = half_line_nodes(peak, width, quad)
    theta, w_theta = interval_nodes(0.0, 0.5 * np.pi, quad)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    total = 0.0
    for start in range(0, radius.size, 64):
        block = slice(start, start + 64)
        r = radius[block][:, None]
        a, b = r * cos_t[None, :], r * sin_t[None, :]
        _, d1, d_rho = meridian(a, b)
        density = (d1 * d1 + d_rho * d_rho) * b ** (n - 2) * r
        total += float(np.sum(w_radius[block][:, None] * w_theta[None, :] * density))
    total *= sphere_area(n - 2)
    if not np.isfinite(total):
        raise IntegralError("Half-space Dirichlet quadrature is not finite")
    return total


# Perturbation builders

def sector_perturbation(bottom: SectorBottom, amplitude: float = 1.0) -> Perturbation:
    """Minimizer of a sector bottom as a test direction."""
    return Perturbation(ell=bottom.ell, radial=bottom.argmin, amplitude=amplitude,
                        label=f"sector-l{bottom.ell}")


def kernel_perturbation(ball: ModelBall, nodes: int = 2000) -> Perturbation:
    """s_k(r) Z_1(u), the transported dilation field up to a constant."""
    grid = cosine_grid(ball.radius, nodes)[1:]
    radial = RadialFunction(grid, s_kappa(ball.kappa, grid), s_kappa_prime(ball.kappa, grid), 1)
    return Perturbation(ell=1, radial=radial, label="kernel-l1")


def random_perturbation(ball: ModelBall, ell: int, seed: int, modes: int = 4, nodes: int = 2000) -> Perturbation:
    """
    Random smooth radial profile (s_k/s_k(R))^l (1 + sum c_j cos(j pi r/R)) in sector ell.
    """
    rng = np.random.default_rng(seed)
    coefficients = 0.3 * rng.standard_normal(modes)
    R = ball.radius
    grid = cosine_grid(R, nodes)[1:]
    s, sp_ = s_kappa(ball.kappa, grid), s_kappa_prime(ball.kappa, grid)
    s_R = float(s_kappa(ball.kappa, R))
    j = np.arange(1, modes + 1)[:, None]
    bump = 1.0 + coefficients @ np.cos(j * np.pi * grid / R)
    bump_prime = coefficients @ (-(j * np.pi / R) * np.sin(j * np.pi * grid / R))
    power = (s / s_R) ** ell
    power_prime = ell * (s / s_R) ** (ell - 1) * sp_ / s_R if ell > 0 else np.zeros_like(grid)
    radial = RadialFunction(grid, power * bump, power_prime * bump + power * bump_prime, ell)
    return Perturbation(ell=ell, radial=radial, label=f"random-l{ell}-seed{seed}")


# Lab

@dataclass(frozen=True)
class LabState:
    """Competitor u = U (1 + w) with its construction record."""

    w: ModelField
    eps: float = 0.0
    correction: Tuple[float, float] = (0.0, 0.0)
    defect_before: float = 0.0
    newton_trace: List[float] = field(default_factory=list)

    @property
    def correction_size(self) -> float:
        return float(np.hypot(*self.correction))


@dataclass(frozen=True)
class NearestPoint:
    g: GroupElement
    distance: float
    tangency: Dict[str, float]
    iterations: int


class StabilityLab:
    """Constraint projection, deficit and manifold distance on a ModelGrid."""

    def __init__(self, profile: BridgeProfile, ball: ModelBall, settings: Optional[StabilitySettings] = None):
        self.profile = profile
        self.ball = ball
        self.settings = settings or StabilitySettings()
        self.grid = ModelGrid(ball, self.settings.radial_nodes, self.settings.angular_nodes)
        exps = profile.exponents
        self.bulk_power = exps.bulk
        self.trace_power = exps.trace
        self.area = self.grid.integrate_boundary(np.ones(self.grid.u.size))
        s_R = float(s_kappa(ball.kappa, ball.radius))
        s = self.grid.s[:, None] * np.ones(self.grid.shape)
        ds = s_kappa_prime(ball.kappa, self.grid.r)[:, None] * np.ones(self.grid.shape)
        # (s/s(R))^2, equal to 1 on the boundary
        self.bump = ModelField((s / s_R) ** 2, 2.0 * s * ds / s_R ** 2, np.zeros(self.grid.shape),
                               np.ones(self.grid.u.size))
        self.one = self.grid.constant(1.0)

    # fields

    def direction(self, perturbation: Perturbation) -> ModelField:
        """phi = amplitude f(r) Z_l(u) on the grid."""
        n, ell = self.profile.n, perturbation.zonal_degree
        spline = perturbation.radial.interpolant()
        field_ = self.grid.from_model(spline, spline.derivative(),
                                      lambda u: zonal_harmonic(n, ell, u),
                                      lambda u: zonal_harmonic_prime(n, ell, u))
        return perturbation.amplitude * field_

    def quotient(self, handle) -> ModelField:
        """h/U on the grid for a half-space handle h symmetric about the x1 axis."""
        n = self.profile.n

        def evaluate(x1, rho):
            points = _meridian_points(n, x1, rho)
            value, gradient = handle(points)
            base, base_gradient = profile_eval(self.profile, points)
            ratio = value / base
            d1 = (gradient[..., 0] - ratio * base_gradient[..., 0]) / base
            d_rho = (gradient[..., 1] - ratio * base_gradient[..., 1]) / base
            return ratio, d1, d_rho

        return self.grid.from_half_space(evaluate)

    def state_of(self, handle) -> LabState:
        """Lab state of a half-space competitor."""
        return LabState(w=self.quotient(handle) - self.one)

    # constraints

    def constraint_values(self, w: ModelField) -> np.ndarray:
        """(int (1+w)^{2*} - 1, int_boundary (1+w)^{2#} - |boundary|)."""
        self._check_positive(w)
        bulk = self.grid.integrate(np.expm1(self.bulk_power * np.log1p(w.values)))
        boundary = self.grid.integrate_boundary(np.expm1(self.trace_power * np.log1p(w.boundary)))
        return np.array([bulk, boundary])

    def constraint_defect(self, w: ModelField) -> np.ndarray:
        """Linearized constraints (int U^{2*-1} psi, int U^{2#-1} psi) = (int w, int_boundary w)."""
        return np.array([self.grid.integrate(w.values), self.grid.integrate_boundary(w.boundary)])

    def _check_positive(self, w: ModelField) -> None:
        if np.min(w.values) <= -1.0 or np.min(w.boundary) <= -1.0:
            raise ProjectionError("Competitor is not positive", details={"min": float(np.min(w.values))})

    def _jacobian(self, w: ModelField) -> np.ndarray:
        p, q = self.bulk_power, self.trace_power
        bulk = np.exp((p - 1.0) * np.log1p(w.values))
        boundary = np.exp((q - 1.0) * np.log1p(w.boundary))
        row_bulk = p * self.grid.integrate(bulk), p * self.grid.integrate(bulk * self.bump.values)
        row_boundary = q * self.grid.integrate_boundary(boundary), q * self.grid.integrate_boundary(boundary)
        return np.array([row_bulk, row_boundary])

    def project_to_constraints(self, psi: ModelField, eps: float) -> LabState:
        """
        Corrects eps psi by a1 + a2 (s/s(R))^2 so that both constraints hold.

        Raises:
            ProjectionError: If the correction Jacobian degenerates or Newton does not converge.
        """
        settings = self.settings
        base = float(eps) * psi
        coefficients = np.zeros(2)
        w = base
        residual = self.constraint_values(w)
        defect_before = float(np.linalg.norm(residual))
        trace = [defect_before]
        for _ in range(settings.newton_max_iter):
            if np.max(np.abs(residual)) <= settings.newton_tol:
                break
            jacobian = self._jacobian(w)
            scaled = abs(np.linalg.det(jacobian)) / abs(jacobian[0, 0] * jacobian[1, 1])
            if scaled < settings.jacobian_floor:
                raise ProjectionError("Constraint correction is degenerate",
                                      details={"scaled_determinant": scaled, "defect_trace": trace})
            coefficients = coefficients - np.linalg.solve(jacobian, residual)
            w = base + float(coefficients[0]) * self.one + float(coefficients[1]) * self.bump
            residual = self.constraint_values(w)
            trace.append(float(np.linalg.norm(residual)))
        else:
            if np.max(np.abs(residual)) > settings.newton_tol:
                logger.error("Constraint projection diverged", eps=eps, trace=trace)
                raise ProjectionError("Constraint Newton iteration did not converge",
                                      details={"eps": eps, "defect_trace": trace})
        return LabState(w=w, eps=eps, correction=(float(coefficients[0]), float(coefficients[1])),
                        defect_before=defect_before, newton_trace=trace)

    # energies

    def deficit(self, state: LabState) -> float:
        """
        N(1+w) - Phi^2 = N(w) + 2 lam int w - 2 sigma int_boundary w.

        Raises:
            IntegralError: If the deficit is negative beyond quadrature noise.
        """
        profile, w = self.profile, state.w
        value = (self.grid.n_form(w, profile.lam, profile.sigma)
                 + 2.0 * profile.lam * self.grid.integrate(w.values)
                 - 2.0 * profile.sigma * self.grid.integrate_boundary(w.boundary))
        if value < DEFICIT_FLOOR:
            logger.error("Negative deficit", deficit=value)
            raise IntegralError("Deficit below the quadrature floor", details={"deficit": value})
        return float(value)

    def hessian_form(self, w: ModelField) -> float:
        """Q_U on a model field."""
        return self.grid.q_form(w)

    def n_norm(self, w: ModelField) -> float:
        return self.grid.n_form(w, self.profile.lam, self.profile.sigma)

    # manifold distance

    def _orbit(self, log_scale: float) -> Tuple[ModelField, ModelField]:
        g = GroupElement(float(np.exp(log_scale)), np.zeros(self.profile.n - 1))
        rho = self.quotient(act(g, ProfileField(self.profile)))
        zeta = self.quotient(act(g, DilationGenerator(self.profile)))
        return rho, zeta

    def nearest_point(self, state: LabState) -> NearestPoint:
        """
        Minimizes N(1 + w - rho_a) over the dilations a, rho_a = act(a, U)/U, from the identity.

        The translation part stays on the axis. Tangency to the translations is still measured:
        a translation field is a meridian profile times one direction coordinate w, so its inner
        product with a zonal residual carries the mean of w over the transverse sphere.

        Raises:
            NearestPointError: If the quasi-Newton search fails.
        """
        lam, sigma = self.profile.lam, self.profile.sigma
        target = state.w + self.one

        def objective(x):
            rho, zeta = self._orbit(float(x[0]))
            residual = target - rho
            value = self.grid.n_form(residual, lam, sigma)
            slope = -2.0 * self.grid.n_form(residual, lam, sigma, zeta)
            return value, np.array([slope])

        start_value, start_slope = objective(np.zeros(1))
        result = minimize(objective, np.zeros(1), jac=True, method="BFGS",
                          options={"gtol": 1e-14 * max(1.0, abs(start_slope[0])), "maxiter": 200})
        converged = result.success or abs(float(result.jac[0])) <= 1e-9 * max(1.0, np.sqrt(abs(start_value)))
        if not converged or not np.isfinite(result.fun):
            logger.error("Nearest-point search failed", message=result.message)
            raise NearestPointError("Nearest-point search did not converge",
                                    details={"message": str(result.message), "gradient": float(result.jac[0])})

        log_scale = float(result.x[0])
        rho, zeta = self._orbit(log_scale)
        residual = target - rho
        squared = max(self.grid.n_form(residual, lam, sigma), 0.0)
        distance = float(np.sqrt(squared))
        zeta_norm = np.sqrt(self.grid.n_form(zeta, lam, sigma))
        inner = self.grid.n_form(residual, lam, sigma, zeta)
        g = GroupElement(float(np.exp(log_scale)), np.zeros(self.profile.n - 1))
        xi = self.quotient(act(g, TranslationGenerator(self.profile)))
        mean_w, mean_w2 = transverse_moments(self.profile.n)
        # lower bound of the norm: the angular derivative of w is left out
        xi_norm = np.sqrt(self.grid.n_form(xi, lam, sigma) * mean_w2)
        shifted = self.grid.n_form(residual, lam, sigma, xi) * mean_w
        tangency = {
            "dilation": abs(inner) / (distance * zeta_norm) if distance > 0.0 else 0.0,
            "translations": abs(shifted) / (distance * xi_norm) if distance > 0.0 else 0.0,
        }
        return NearestPoint(g=g, distance=distance, tangency=tangency, iterations=int(result.nit))

    # sweep

    def stability_sweep(self, perturbation: Perturbation, eps_list: Optional[Sequence[float]] = None,
                        gap: Optional[float] = None, profile_id: Optional[str] = None) -> StabilityReport:
        """
        Deficit against squared distance along u = U + eps psi + correction.

        The fitted coefficient is the intercept of a least-squares quadratic in eps through the
        measured ratios.
        """
        eps_list = list(self.settings.eps_list if eps_list is None else eps_list)
        if len(eps_list) < 4 or any(a <= b for a, b in zip(eps_list, eps_list[1:])):
            raise DomainError("Sweep needs at least 4 strictly decreasing amplitudes",
                              details={"eps_list": eps_list})
        psi = self.direction(perturbation)
        norm = self.n_norm(psi)
        q_ratio = self.hessian_form(psi) / norm
        defect = self.constraint_defect(psi)

        sweep, tangency = [], []
        for eps in eps_list:
            state = self.project_to_constraints(psi, eps)
            deficit = self.deficit(state)
            nearest = self.nearest_point(state)
            ratio = deficit / nearest.distance ** 2 if nearest.distance > 0.0 else None
            tangency.append(max(nearest.tangency.values()))
            sweep.append(SweepPoint(eps=eps, deficit=deficit, distance=nearest.distance, ratio=ratio,
                                    correction=state.correction_size, defect_before=state.defect_before,
                                    scale=nearest.g.scale))
            logger.debug("Sweep point", eps=eps, deficit=deficit, distance=nearest.distance, ratio=ratio)

        ratios = np.array([point.ratio for point in sweep if point.ratio is not None])
        amplitudes = np.array([point.eps for point in sweep if point.ratio is not None])
        if ratios.size < 3:
            raise NearestPointError("Too few positive distances to extrapolate", details={"points": int(ratios.size)})
        fitted = float(np.polynomial.polynomial.polyfit(amplitudes, ratios, 2)[0])
        eps = np.array(eps_list)
        diagnostics = {
            "n_norm": norm,
            "linear_defect": [float(value) for value in defect],
            "defect_slope": _log_slope(eps, [p.defect_before for p in sweep]),
            "correction_slope": _log_slope(eps, [p.correction for p in sweep]),
            "deficit_slope": _log_slope(eps, [p.deficit for p in sweep]),
            "distance_over_eps": sweep[-1].distance / (sweep[-1].eps * np.sqrt(norm)),
            "max_tangency_residual": max(tangency),
        }
        logger.info("Stability sweep finished", perturbation=perturbation.identifier, fitted=fitted, q_ratio=q_ratio)
        return StabilityReport(
            profile_id=profile_id or self.profile.identifier,
            perturbation_id=perturbation.identifier,
            sweep=sweep,
            fitted_coefficient=fitted,
            q_ratio=q_ratio,
            q_half=0.5 * q_ratio,
            gap=gap,
            gap_half=None if gap is None else 0.5 * gap,
            diagnostics=diagnostics,
        )


def _log_slope(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    x, y = np.asarray(x, dtype=float), np.abs(np.asarray(y, dtype=float))
    keep = y > 0.0
    if np.count_nonzero(keep) < 2:
        return None
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])
