"""
Reduced Robin eigenvalue problem on the model ball.

Each spherical-harmonic sector ell carries the forms
    Q_l(f) = int (f'^2 + L s^-2 f^2 - n k f^2) s^{n-1} dr - beta s(R)^{n-1} f(R)^2,
    N_l(f) = int (f'^2 + L s^-2 f^2 + lam f^2) s^{n-1} dr - sigma s(R)^{n-1} f(R)^2,
with L = l(l+n-2). Sector bottoms of Q_l/N_l are computed by piecewise-linear Galerkin on a
cosine-graded grid (two resolutions, Richardson extrapolated) and cross-checked by shooting.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
import structlog
from scipy.integrate import simpson, solve_ivp
from scipy.optimize import brentq
from scipy.sparse.linalg import LinearOperator, eigsh, splu
from scipy.special import eval_gegenbauer, gammaln

from src.models.config import SpectralSettings
from src.models.geometry import ModelBall
from src.models.profile import BridgeProfile
from src.models.spectral import RadialFunction, Sector, SectorBottom, SpectralReport
from src.services.geometry_service import cot_kappa, s_kappa, s_kappa_prime
from src.services.model_grid import ModelField, ModelGrid
from src.services.profile_service import sphere_area
from src.utils.exceptions import (
    DomainError,
    GridError,
    KernelMismatchError,
    NegativityError,
    TransportError,
)

logger = structlog.get_logger()

NO_CONSTRAINTS = "none"
BOUNDARY_AND_MEAN = "f(R)=0, int f s^(n-1) dr=0"
KERNEL_ORTHOGONAL = "N-orthogonal to s_kappa"

OVERFLOW_LIMIT = 1e200
GAUSS_POINTS = 4


# Harmonics

def gegenbauer_norm(n: int, ell: int) -> float:
    """int_{S^{n-1}} C_l^{(n-2)/2}(u)^2 over the sphere."""
    a = 0.5 * (n - 2)
    log_h = (np.log(np.pi) + (1.0 - 2.0 * a) * np.log(2.0) + gammaln(ell + 2.0 * a)
             - gammaln(ell + 1.0) - np.log(ell + a) - 2.0 * gammaln(a))
    return sphere_area(n - 2) * float(np.exp(log_h))


def zonal_harmonic(n: int, ell: int, u):
    """Zonal harmonic of degree ell on S^{n-1} with unit L^2 norm, as a function of u = cos(theta)."""
    return eval_gegenbauer(ell, 0.5 * (n - 2), u) / np.sqrt(gegenbauer_norm(n, ell))


def zonal_harmonic_prime(n: int, ell: int, u):
    """u-derivative of zonal_harmonic."""
    if ell == 0:
        return np.zeros_like(np.asarray(u, dtype=float))
    a = 0.5 * (n - 2)
    return 2.0 * a * eval_gegenbauer(ell - 1, a + 1.0, u) / np.sqrt(gegenbauer_norm(n, ell))


def singular_branch_exponent(n: int, ell: int) -> int:
    """
    Power of r in the Dirichlet integrand of the singular Frobenius branch r^{-(l+n-2)}.
    The branch has infinite energy because the exponent is at most -1.
    """
    return -2 * ell - n + 1


def default_constraints(ell: int) -> str:
    if ell == 0:
        return BOUNDARY_AND_MEAN
    if ell == 1:
        return KERNEL_ORTHOGONAL
    return NO_CONSTRAINTS


def ball_multipliers(ball: ModelBall) -> Tuple[float, float]:
    """(lam, sigma) recovered from the ball: lam = n(n-2)k/4, sigma = -(n-2)beta/2."""
    n = ball.n
    return 0.25 * n * (n - 2) * ball.kappa, -0.5 * (n - 2) * ball.beta


# Sector forms on radial functions

def _sector_terms(ball: ModelBall, f: RadialFunction) -> Tuple[float, float, float, float]:
    n = ball.n
    s = s_kappa(ball.kappa, f.grid)
    kinetic = simpson(f.derivs ** 2 * s ** (n - 1), x=f.grid)
    angular = simpson(f.values ** 2 * s ** (n - 3), x=f.grid)
    mass = simpson(f.values ** 2 * s ** (n - 1), x=f.grid)
    boundary = float(s_kappa(ball.kappa, f.grid[-1])) ** (n - 1) * f.values[-1] ** 2
    return kinetic, angular, mass, boundary


def q_form_sector(ball: ModelBall, ell: int, f: RadialFunction) -> float:
    """Q_l(f) by Simpson quadrature on the grid of f."""
    kinetic, angular, mass, boundary = _sector_terms(ball, f)
    L = Sector(ball.n, ell).angular_eigenvalue
    return float(kinetic + L * angular - ball.n * ball.kappa * mass - ball.beta * boundary)


def n_form_sector(ball: ModelBall, profile: BridgeProfile, ell: int, f: RadialFunction) -> float:
    """
    N_l(f), the sector form of the transported Dirichlet norm.

    Raises:
        TransportError: If the value is not positive for a nonzero f.
    """
    kinetic, angular, mass, boundary = _sector_terms(ball, f)
    L = Sector(ball.n, ell).angular_eigenvalue
    value = float(kinetic + L * angular + profile.lam * mass - profile.sigma * boundary)
    if not value > 0.0 and np.any(f.values != 0.0):
        raise TransportError("Transported norm is not positive", details={"ell": ell, "value": value})
    return value


# Shooting

def _nu_beta(ball: ModelBall, mu: float) -> Tuple[float, float]:
    lam, sigma = ball_multipliers(ball)
    nu = (ball.n * ball.kappa + mu * lam) / (1.0 - mu)
    beta_mu = (ball.beta - mu * sigma) / (1.0 - mu)
    return nu, beta_mu


def frobenius_start(ball: ModelBall, ell: int, mu: float, r0: float) -> Tuple[float, float]:
    """f(r0), f'(r0) of the regular branch r^l (1 + a r^2)."""
    n, kappa = ball.n, ball.kappa
    L = ell * (ell + n - 2)
    nu, _ = _nu_beta(ball, mu)
    a = ((n - 1) * kappa * ell / 3.0 + L * kappa / 3.0 - nu) / (2.0 * (2 * ell + n))
    value = r0 ** ell * (1.0 + a * r0 ** 2)
    slope = (ell * r0 ** (ell - 1) if ell > 0 else 0.0) + (ell + 2) * a * r0 ** (ell + 1)
    return value, slope


def cosine_grid(radius: float, nodes: int) -> np.ndarray:
    """Nodes R (1 - cos(pi i/m))/2, i = 0..m, clustered at both ends."""
    m = nodes - 1
    return 0.5 * radius * (1.0 - np.cos(np.pi * np.arange(m + 1) / m))


@dataclass(frozen=True)
class ShotResult:
    mismatch: float
    radial: RadialFunction
    integral: float
    volume: float


def _shoot(ball: ModelBall, ell: int, mu: float, settings: SpectralSettings,
           grid: Optional[np.ndarray] = None, track_integral: bool = False) -> ShotResult:
    n, kappa, R = ball.n, ball.kappa, ball.radius
    if not mu < 1.0:
        raise DomainError("Shooting needs mu < 1", details={"mu": mu})
    L = ell * (ell + n - 2)
    nu, beta_mu = _nu_beta(ball, mu)
    r0 = settings.frobenius_offset * R
    grid = cosine_grid(R, settings.grid_nodes) if grid is None else np.asarray(grid, dtype=float)
    t_eval = np.concatenate([[r0], grid[grid > r0 * (1.0 + 1e-9)]])
    t_eval[-1] = R
    f0, g0 = frobenius_start(ball, ell, mu, r0)

    def rhs(r, state):
        f, g = state[0], state[1]
        s = float(s_kappa(kappa, r))
        out = [g, -(n - 1) * float(cot_kappa(kappa, r)) * g + (L / (s * s) - nu) * f]
        if track_integral:
            out.append(f * s ** (n - 1))
            out.append(s ** (n - 1))
        return out

    def overflow(r, state):
        return OVERFLOW_LIMIT - abs(state[0])
    overflow.terminal = True

    start = [f0, g0]
    if track_integral:
        start += [f0 * r0 ** n / n, r0 ** n / n]
    scale = max(abs(f0), 1e-300)
    solution = solve_ivp(rhs, (r0, R), start, method="DOP853", t_eval=t_eval, events=overflow,
                         rtol=settings.shoot_rtol, atol=1e-14 * scale)
    f, g = solution.y[0], solution.y[1]
    peak = float(np.max(np.abs(f)))
    if solution.status == 1 or solution.t.size < t_eval.size:
        logger.debug("Shot overflowed", ell=ell, mu=mu)
        grid_out = solution.t if solution.t.size >= 3 else t_eval[:3]
        values = f / peak if solution.t.size >= 3 else np.zeros(3)
        derivs = g / peak if solution.t.size >= 3 else np.zeros(3)
        sign = np.sign(f[-1]) if f.size else 1.0
        return ShotResult(float(sign) * OVERFLOW_LIMIT, RadialFunction(grid_out, values, derivs, ell), 0.0, 1.0)
    radial = RadialFunction(solution.t, f / peak, g / peak, ell)
    mismatch = (g[-1] - beta_mu * f[-1]) / peak
    integral = float(solution.y[2][-1]) / peak if track_integral else 0.0
    volume = float(solution.y[3][-1]) if track_integral else 1.0
    return ShotResult(float(mismatch), radial, integral, volume)


def shoot(ball: ModelBall, ell: int, mu: float,
          settings: Optional[SpectralSettings] = None) -> Tuple[float, RadialFunction]:
    """
    Integrates the sector equation for Q_l f = mu N_l f from the Frobenius start.

    Returns:
        Tuple of the normalized Robin mismatch f'(R) - beta(mu) f(R) and the solution
        (scaled to unit maximum).
    """
    shot = _shoot(ball, ell, mu, settings or SpectralSettings())
    return shot.mismatch, shot.radial


def _mean_determinant(ball: ModelBall, mu: float, settings: SpectralSettings) -> ShotResult:
    """Determinant f_h(R) V - int f_h s^{n-1} of the l = 0 sector with f(R) = 0 and zero mean."""
    shot = _shoot(ball, 0, mu, settings, track_integral=True)
    if abs(shot.mismatch) >= OVERFLOW_LIMIT:
        return shot
    f = shot.radial
    determinant = (f.values[-1] * shot.volume - shot.integral) / shot.volume
    shifted = RadialFunction(f.grid, f.values - f.values[-1], f.derivs, 0)
    return ShotResult(float(determinant), shifted, shot.integral, shot.volume)


def frobenius_slope(ball: ModelBall, ell: int, settings: Optional[SpectralSettings] = None) -> float:
    """Log-log slope of the kernel-equation solution near r = 0 (equals ell)."""
    settings = settings or SpectralSettings()
    r0 = settings.frobenius_offset * ball.radius
    grid = np.concatenate([np.geomspace(2.0 * r0, 1e3 * r0, 24), [ball.radius]])
    shot = _shoot(ball, ell, 0.0, settings, grid=grid)
    near = shot.radial.grid <= 1e3 * r0 * (1.0 + 1e-12)
    r, f = shot.radial.grid[near], np.abs(shot.radial.values[near])
    return float(np.polyfit(np.log(r), np.log(f), 1)[0])


# Galerkin discretization

class SectorDiscretization:
    """Piecewise-linear Galerkin matrices of one sector on a cosine-graded grid."""

    def __init__(self, ball: ModelBall, lam: float, sigma: float, ell: int, nodes: int):
        self.ball, self.ell = ball, ell
        n, kappa = ball.n, ball.kappa
        self.grid = cosine_grid(ball.radius, nodes)
        left, right = self.grid[:-1], self.grid[1:]
        h = right - left
        g_nodes, g_weights = np.polynomial.legendre.leggauss(GAUSS_POINTS)
        xi = 0.5 * (g_nodes + 1.0)
        points = left[:, None] + h[:, None] * xi[None, :]
        weights = 0.5 * h[:, None] * g_weights[None, :]
        s = s_kappa(kappa, points)
        phi_l, phi_r = 1.0 - xi, xi

        def mass(weight):
            ww = weights * weight
            return (np.sum(ww * phi_l ** 2, axis=1), np.sum(ww * phi_l * phi_r, axis=1),
                    np.sum(ww * phi_r ** 2, axis=1))

        stiff = np.sum(weights * s ** (n - 1), axis=1) / h ** 2
        stiffness = self._assemble((stiff, -stiff, stiff))
        mass1 = self._assemble(mass(s ** (n - 1)))
        mass3 = self._assemble(mass(s ** (n - 3)))
        size = self.grid.size
        corner = sp.csr_matrix(([float(s_kappa(kappa, ball.radius)) ** (n - 1)], ([size - 1], [size - 1])),
                               shape=(size, size))
        L = ell * (ell + n - 2)
        self.Q = (stiffness + L * mass3 - n * kappa * mass1 - ball.beta * corner).tocsc()
        self.N = (stiffness + L * mass3 + lam * mass1 - sigma * corner).tocsc()
        self.K = ((lam + n * kappa) * mass1 + (ball.beta - sigma) * corner).tocsc()
        self.load = self._load(weights, phi_l, phi_r, s ** (n - 1))

    def _assemble(self, parts) -> sp.csr_matrix:
        a0, a1, a2 = parts
        size = self.grid.size
        diag = np.zeros(size)
        diag[:-1] += a0
        diag[1:] += a2
        return sp.diags([a1, diag, a1], [-1, 0, 1], shape=(size, size), format="csr")

    def _load(self, weights, phi_l, phi_r, weight) -> np.ndarray:
        vector = np.zeros(self.grid.size)
        vector[:-1] += np.sum(weights * weight * phi_l, axis=1)
        vector[1:] += np.sum(weights * weight * phi_r, axis=1)
        return vector

    def free_nodes(self, constraints: str) -> np.ndarray:
        size = self.grid.size
        first = 1 if self.ell >= 1 else 0
        last = size - 1 if constraints == BOUNDARY_AND_MEAN else size
        return np.arange(first, last)

    def kernel_vector(self) -> np.ndarray:
        return s_kappa(self.ball.kappa, self.grid)

    def levels(self, constraints: str, count: int, penalty: float) -> Tuple[np.ndarray, np.ndarray]:
        """
        Lowest `count` Rayleigh values of Q/N under the constraints, with eigenvectors on the full grid.
        """
        free = self.free_nodes(constraints)
        Q = self.Q[free][:, free]
        N = self.N[free][:, free].tocsc()
        K = self.K[free][:, free]
        dim = free.size
        factor = splu(N)

        if constraints == BOUNDARY_AND_MEAN:
            C = self.load[free][None, :]
        elif constraints == KERNEL_ORTHOGONAL:
            C = (N @ self.kernel_vector()[free])[None, :]
        else:
            C = None

        if C is None:
            def matvec(x):
                return K @ np.ravel(x)
            project = None
        else:
            Y = factor.solve(C.T.copy())
            G_inv = np.linalg.inv(C @ Y)

            def project(x):
                return x - Y @ (G_inv @ (C @ x))

            def matvec(x):
                x = np.ravel(x)
                px = project(x)
                kpx = K @ px
                return kpx - C.T @ (G_inv @ (Y.T @ kpx)) - penalty * (C.T @ (G_inv @ (C @ x)))

        operator = LinearOperator((dim, dim), matvec=matvec, dtype=float)
        start = np.ones(dim) if project is None else project(np.ones(dim))
        k = min(count, dim - 2)
        _, vectors = eigsh(operator, k=k, M=N, Minv=LinearOperator((dim, dim), matvec=factor.solve, dtype=float),
                           which="LA", v0=start)
        values, full = [], []
        for j in range(vectors.shape[1]):
            v = vectors[:, j] if project is None else project(vectors[:, j])
            values.append(float(v @ (Q @ v)) / float(v @ (N @ v)))
            padded = np.zeros(self.grid.size)
            padded[free] = v
            full.append(padded)
        order = np.argsort(values)
        return np.array(values)[order], np.array(full)[order]


def _fem_radial(grid: np.ndarray, vector: np.ndarray, ell: int) -> RadialFunction:
    derivs = np.gradient(vector, grid, edge_order=2)
    keep = grid > 0.0
    peak = float(np.max(np.abs(vector))) or 1.0
    return RadialFunction(grid[keep], vector[keep] / peak, derivs[keep] / peak, ell)


def _bracket_root(func, center: float, width: float, cap: float) -> Optional[Tuple[float, float]]:
    step = width
    while step <= cap:
        lo, hi = center - step, center + step
        if lo < 1.0 and hi < 1.0 and np.sign(func(lo)) != np.sign(func(hi)):
            return lo, hi
        step *= 4.0
    return None


def _shooting_refinement(ball: ModelBall, ell: int, constraints: str, mu: float, spread: float,
                         settings: SpectralSettings) -> Tuple[Optional[float], Optional[RadialFunction]]:
    if constraints == BOUNDARY_AND_MEAN:
        def evaluate(m):
            return _mean_determinant(ball, m, settings)
    elif constraints == NO_CONSTRAINTS or constraints == KERNEL_ORTHOGONAL:
        def evaluate(m):
            return _shoot(ball, ell, m, settings)
    else:
        return None, None

    def mismatch(m):
        return evaluate(m).mismatch

    cap = 0.1 * max(abs(mu), 0.01)
    if ell == 1 and constraints == KERNEL_ORTHOGONAL:
        cap = min(cap, 0.5 * abs(mu))
    bracket = _bracket_root(mismatch, mu, max(10.0 * spread, 1e-8), cap)
    if bracket is None:
        logger.warning("Shooting root not bracketed", ell=ell, mu=mu)
        return None, None
    root = brentq(mismatch, bracket[0], bracket[1], xtol=1e-14, rtol=1e-14, maxiter=200)
    return float(root), evaluate(root).radial


def sector_bottom(ball: ModelBall, profile: BridgeProfile, ell: int, constraints: Optional[str] = None,
                  settings: Optional[SpectralSettings] = None) -> SectorBottom:
    """
    Bottom of Q_l/N_l over the sector under its constraints.

    The Galerkin value is computed on `grid_nodes` and on the doubly refined grid and
    Richardson extrapolated; shooting refines the minimizer.

    Raises:
        GridError: If the two resolutions disagree beyond the grid tolerance.
        NegativityError: If the bottom under the sector's own constraints is negative beyond
            tolerance. Explicitly relaxed constraints skip the check.
    """
    settings = settings or SpectralSettings()
    constraints = constraints or default_constraints(ell)
    own_constraints = constraints == default_constraints(ell)
    coarse_disc = SectorDiscretization(ball, profile.lam, profile.sigma, ell, settings.grid_nodes)
    fine_disc = SectorDiscretization(ball, profile.lam, profile.sigma, ell, 2 * settings.grid_nodes - 1)
    coarse = float(coarse_disc.levels(constraints, 1, settings.penalty)[0][0])
    values, vectors = fine_disc.levels(constraints, 1, settings.penalty)
    fine = float(values[0])
    change = abs(fine - coarse)
    value = fine + (fine - coarse) / 3.0
    if own_constraints and value < -settings.negativity_tol:
        logger.error("Negative constrained sector bottom", ell=ell, value=value)
        raise NegativityError("Constrained sector bottom is negative", details={"ell": ell, "value": value})
    if change > settings.grid_tol * max(1.0, abs(fine)):
        raise GridError("Sector bottom not converged under refinement",
                        details={"ell": ell, "coarse": coarse, "fine": fine})

    shooting, radial = _shooting_refinement(ball, ell, constraints, value, change, settings)
    if radial is None:
        radial = _fem_radial(fine_disc.grid, vectors[0], ell)
    logger.debug("Sector bottom", ell=ell, value=value, shooting=shooting)
    return SectorBottom(ell=ell, value=value, constraints=constraints, argmin=radial,
                        coarse=coarse, fine=fine, shooting=shooting)


def sector_spectrum(ball: ModelBall, profile: BridgeProfile, ell: int, levels: int,
                    constraints: Optional[str] = None, settings: Optional[SpectralSettings] = None) -> List[float]:
    """Lowest Rayleigh levels of a sector, Richardson extrapolated level by level."""
    settings = settings or SpectralSettings()
    constraints = constraints or default_constraints(ell)
    coarse = SectorDiscretization(ball, profile.lam, profile.sigma, ell, settings.grid_nodes)
    fine = SectorDiscretization(ball, profile.lam, profile.sigma, ell, 2 * settings.grid_nodes - 1)
    low = coarse.levels(constraints, levels, settings.penalty)[0]
    high = fine.levels(constraints, levels, settings.penalty)[0]
    return [float(h + (h - c) / 3.0) for c, h in zip(low, high)]


def spectral_gap(ball: ModelBall, profile: BridgeProfile, l_max: int,
                 settings: Optional[SpectralSettings] = None) -> SpectralReport:
    """
    Constrained sector bottoms for l = 0..l_max and their minimum Lambda_T.

    The gap is recorded only when every bottom exceeds the positive floor.
    """
    settings = settings or SpectralSettings()
    if l_max < 3:
        raise DomainError("l_max must be at least 3", details={"l_max": l_max})
    bottoms = [sector_bottom(ball, profile, ell, settings=settings) for ell in range(l_max + 1)]
    unconstrained_l1 = sector_bottom(ball, profile, 1, NO_CONSTRAINTS, settings)

    values = [bottom.value for bottom in bottoms]
    increasing = [bool(b >= a) for a, b in zip(values[2:], values[3:])]
    top_largest = bool(values[-1] > max(values[:-1]))
    if not top_largest:
        logger.warning("Top sector bottom is not the largest", l_max=l_max, top=values[-1])
    gap = min(values)
    recorded = gap if all(value > settings.positive_floor for value in values) else None
    if recorded is None:
        logger.warning("Sector bottom below the positive floor", gap=gap, floor=settings.positive_floor)

    mismatch, _ = shoot(ball, 1, 0.0, settings)
    kernel_residuals = {
        "unconstrained_l1_bottom": unconstrained_l1.value,
        "shoot_mismatch_l1": abs(mismatch),
        "robin_coefficient": abs(ball.beta - float(cot_kappa(ball.kappa, ball.radius))),
    }
    diagnostics = {
        "increasing_from_l2": increasing,
        "monotone_from_l2": all(increasing),
        "top_sector_largest": top_largest,
        "shooting_gaps": {str(b.ell): b.shooting_gap for b in bottoms},
        "minimum_value": gap,
        "positive_floor": settings.positive_floor,
    }
    logger.info("Spectral gap computed", gap=gap, sector=int(np.argmin(values)))
    return SpectralReport(ball=ball, per_sector=bottoms, kernel_residuals=kernel_residuals,
                          gap=recorded, l_max=l_max, diagnostics=diagnostics)


# Kernel fields

def dilation_field(profile: BridgeProfile, x1: np.ndarray, rho: np.ndarray):
    """Z0/U = k (1 - 2 x.y/B) and its (x1, rho) derivatives, y = x - t e1."""
    k = 0.5 * (profile.n - 2)
    y1 = x1 - profile.t
    base = _base(profile, x1, rho)
    dot = x1 * y1 + rho * rho
    value = k * (1.0 - 2.0 * dot / base)
    d1 = -2.0 * k * ((y1 + x1) / base - 2.0 * dot * y1 / base ** 2)
    d_rho = -2.0 * k * (2.0 * rho / base - 2.0 * dot * rho / base ** 2)
    return value, d1, d_rho


def translation_field(profile: BridgeProfile, x1: np.ndarray, rho: np.ndarray):
    """Z_2/U = -2k y2/B in the meridian plane (y2 = rho), with derivatives."""
    k = 0.5 * (profile.n - 2)
    y1 = x1 - profile.t
    base = _base(profile, x1, rho)
    value = -2.0 * k * rho / base
    d1 = 4.0 * k * rho * y1 / base ** 2
    d_rho = -2.0 * k * (1.0 / base - 2.0 * rho * rho / base ** 2)
    return value, d1, d_rho


def _base(profile: BridgeProfile, x1, rho):
    d = np.asarray(x1, dtype=float) - profile.t
    if profile.eta < 0:
        return (d - 1.0) * (d + 1.0) + rho * rho
    return profile.eta + d * d + rho * rho


@dataclass(frozen=True)
class KernelFields:
    radial: RadialFunction
    labels: List[str]
    coefficients: List[float]
    residuals: Dict[str, float]
    diagnostics: Dict[str, float]

    def as_dict(self) -> dict:
        return {
            "labels": self.labels,
            "coefficients": self.coefficients,
            "residuals": self.residuals,
            "diagnostics": self.diagnostics,
        }


def kernel_fields(profile: BridgeProfile, ball: ModelBall,
                  settings: Optional[SpectralSettings] = None) -> KernelFields:
    """
    Transports the tangent fields Z0, Z2..Zn of the bridge orbit to the model ball and checks that
    each equals c_j s_k(r) theta_j.

    Raises:
        KernelMismatchError: If a transported field deviates from the first radial profile.
    """
    settings = settings or SpectralSettings()
    n, kappa, R = ball.n, ball.kappa, ball.radius
    grid = ModelGrid(ball, 48, 24)
    r = np.linspace(0.05, 0.95, 12) * R
    u = np.array([-0.9, -0.6, -0.3, 0.3, 0.6, 0.9])
    r_mesh, u_mesh = np.meshgrid(r, u, indexing="ij")
    x1, rho, _ = grid.chart.to_half_space(r_mesh, u_mesh)
    s = s_kappa(kappa, r_mesh)

    ratio_axis = dilation_field(profile, x1, rho)[0] / (s * u_mesh)
    ratio_across = translation_field(profile, x1, rho)[0] / (s * np.sqrt(1.0 - u_mesh ** 2))
    c_axis, c_across = float(np.mean(ratio_axis)), float(np.mean(ratio_across))
    deviation_axis = float(np.ptp(ratio_axis)) / abs(c_axis)
    deviation_across = float(np.ptp(ratio_across)) / abs(c_across)
    if max(deviation_axis, deviation_across) > 1e-6:
        logger.error("Tangent fields not of first-eigenfunction form", axis=deviation_axis, across=deviation_across)
        raise KernelMismatchError("Tangent field is not c s_k(r) theta",
                                  details={"axis": deviation_axis, "across": deviation_across})

    dilation = grid.from_half_space(lambda a, b: dilation_field(profile, a, b))
    bulk_mean = abs(grid.integrate(dilation.values))
    boundary_mean = abs(grid.integrate_boundary(dilation.boundary))

    nodes = cosine_grid(R, settings.grid_nodes)[1:]
    radial = RadialFunction(nodes, s_kappa(kappa, nodes), s_kappa_prime(kappa, nodes), 1)
    q_value = q_form_sector(ball, 1, radial)
    n_value = n_form_sector(ball, profile, 1, radial)
    gram = np.diag([c_axis ** 2] + [c_across ** 2] * (n - 1)) * n_value * sphere_area(n - 1) / n
    gram_eigen = np.linalg.eigvalsh(gram)
    mismatch, _ = shoot(ball, 1, 0.0, settings)

    residuals = {
        "radial_deviation_axis": deviation_axis,
        "radial_deviation_across": deviation_across,
        "bulk_constraint": bulk_mean,
        "boundary_constraint": boundary_mean,
        "q_form_l1": abs(q_value) / n_value,
        "shoot_mismatch_l1": abs(mismatch),
        "robin_coefficient": abs(ball.beta - float(cot_kappa(kappa, R))) / max(1.0, abs(ball.beta)),
    }
    diagnostics = {
        "gram_min_eigenvalue": float(gram_eigen[0]),
        "gram_condition": float(gram_eigen[-1] / gram_eigen[0]),
        "frobenius_slope_l1": frobenius_slope(ball, 1, settings),
        "singular_branch_exponent_l1": singular_branch_exponent(n, 1),
    }
    labels = ["Z0"] + [f"Z{i}" for i in range(2, n + 1)]
    coefficients = [c_axis] + [c_across] * (n - 1)
    return KernelFields(radial=radial, labels=labels, coefficients=coefficients,
                        residuals=residuals, diagnostics=diagnostics)


def kernel_model_field(grid: ModelGrid, profile: BridgeProfile) -> ModelField:
    """Z0/U sampled on a model grid."""
    return grid.from_half_space(lambda a, b: dilation_field(profile, a, b))
