"""
Bridge profiles U(x) = C (eta + |x - t e1|^2)^{-(n-2)/2} on the half-space {x1 > 0}.

Integrals over x' are done in closed form,
    int_{R^{n-1}} (b^2 + |x'|^2)^{-p} dx' = pi^{(n-1)/2} Gamma(p - (n-1)/2) / Gamma(p) * b^{n-1-2p},
leaving one-dimensional integrals in x1 on the half-line.
"""

import dataclasses
from typing import Dict, Optional, Tuple

import numpy as np
import structlog
from scipy.optimize import bisect, newton
from scipy.special import gammaln

from src.models.config import ProfileSettings, QuadratureSpec
from src.models.geometry import Branch, ModelBall
from src.models.profile import BridgeProfile, Exponents
from src.services.geometry_service import cot_kappa, model_ball_from_profile
from src.services.quadrature_service import integrate_half_line
from src.utils.exceptions import (
    DegenerateBridgeError,
    DomainError,
    ELConsistencyError,
    IntegralError,
    RootError,
)

logger = structlog.get_logger()

# Shape sign of the Escobar bubble c |x + e1|^{-(n-2)}.
FLAT = 0
ESCOBAR_SHIFT = -1.0


def sphere_area(dim: int) -> float:
    """Area of the unit sphere S^dim."""
    return float(2.0 * np.exp(0.5 * (dim + 1) * np.log(np.pi) - gammaln(0.5 * (dim + 1))))


def _check_shift(n: int, eta: int, t: float) -> None:
    if n < 3:
        raise DomainError("Dimension must be at least 3", details={"n": n})
    if not np.isfinite(t):
        raise DomainError("Shift must be finite", details={"t": t})
    if eta < 0 and not t < -1.0:
        raise DomainError("Hyperbolic branch requires t < -1", details={"t": t})


def shape_square(eta: int, t: float, x1) -> np.ndarray:
    """eta + (x1 - t)^2, factored on the hyperbolic branch to avoid cancellation."""
    d = np.asarray(x1, dtype=float) - t
    if eta < 0:
        return (d - 1.0) * (d + 1.0)
    return eta + d * d


def reduced_constant(n: int, p: float) -> float:
    """pi^{m/2} Gamma(p - m/2) / Gamma(p) with m = n - 1."""
    m = n - 1
    if not p > 0.5 * m:
        raise IntegralError("Tangential integral diverges", details={"n": n, "power": p})
    return float(np.exp(0.5 * m * np.log(np.pi) + gammaln(p - 0.5 * m) - gammaln(p)))


def _peak_and_width(eta: int, t: float, quad: QuadratureSpec, scale: float = 1.0) -> Tuple[float, float]:
    peak = t / scale if (eta > 0 and t > 0.0) else 0.0
    return peak, quad.tail_cutoff * max(1.0, abs(t)) / scale


def _bulk_power(n: int, eta: int, t: float, q: float, quad: QuadratureSpec, scale: float = 1.0) -> float:
    """
    int over the half-space of (eta + (a x1 - t)^2 + a^2 |x'|^2)^{-q(n-2)/2}, with a = scale.
    """
    p = 0.5 * q * (n - 2)
    if not p > 0.5 * n:
        raise IntegralError(
            "Bulk integral diverges",
            details={"n": n, "q": q, "required": f"q > {n}/(n-2)"}
        )
    constant = reduced_constant(n, p) * scale ** (-(n - 1))
    exponent = 0.5 * (n - 1) - p
    peak, width = _peak_and_width(eta, t, quad, scale)
    return constant * integrate_half_line(
        lambda x1: shape_square(eta, t, scale * x1) ** exponent, peak, width, quad
    )


def _boundary_power(n: int, eta: int, t: float, q: float) -> float:
    p = 0.5 * q * (n - 2)
    return reduced_constant(n, p) * float(shape_square(eta, t, 0.0)) ** (0.5 * (n - 1) - p)


def _boundary_radial(n: int, eta: int, t: float, quad: QuadratureSpec) -> float:
    m = n - 1
    a2 = float(shape_square(eta, t, 0.0))
    width = quad.tail_cutoff * np.sqrt(a2)
    return sphere_area(m - 1) * integrate_half_line(
        lambda rho: rho ** (m - 1) * (a2 + rho * rho) ** (-(n - 1)), 0.0, width, quad
    )


def bulk_integral(n: int, branch: Branch, t: float, q: float, quad: QuadratureSpec) -> float:
    """
    int_{H^n} (eta + |x - t e1|^2)^{-q(n-2)/2} dx.

    Raises:
        DomainError: For a hyperbolic shift t >= -1.
        IntegralError: If q <= n/(n-2) (the integral diverges).
    """
    _check_shift(n, branch.eta, t)
    return _bulk_power(n, branch.eta, t, q, quad)


def boundary_integral(n: int, branch: Branch, t: float, quad: QuadratureSpec) -> float:
    """
    int_{R^{n-1}} (eta + t^2 + |x'|^2)^{-(n-1)} dx', in closed form with a radial cross-check.

    Raises:
        IntegralError: If closed form and radial quadrature disagree beyond 1e-8.
    """
    _check_shift(n, branch.eta, t)
    return _checked_boundary(n, branch.eta, t, quad)


def _checked_boundary(n: int, eta: int, t: float, quad: QuadratureSpec) -> float:
    closed = _boundary_power(n, eta, t, float(Exponents(n).two_sharp))
    radial = _boundary_radial(n, eta, t, quad)
    if abs(closed - radial) > 1e-8 * closed:
        logger.error("Boundary integral cross-check failed", n=n, t=t, closed=closed, radial=radial)
        raise IntegralError("Boundary integral cross-check failed", details={"closed": closed, "radial": radial})
    return closed


def normalize(n: int, branch: Branch, t: float, quad: QuadratureSpec) -> float:
    """Amplitude C with int U^{2*} = 1."""
    two_star = Exponents(n).bulk
    return bulk_integral(n, branch, t, two_star, quad) ** (-1.0 / two_star)


def trace_constraint(n: int, branch: Branch, t: float, quad: QuadratureSpec) -> float:
    """Boundary L^{2#} norm of the normalized profile."""
    two_sharp = Exponents(n).trace
    return normalize(n, branch, t, quad) * boundary_integral(n, branch, t, quad) ** (1.0 / two_sharp)


def _trace_of(n: int, eta: int, t: float, quad: QuadratureSpec) -> float:
    exps = Exponents(n)
    C = _bulk_power(n, eta, t, exps.bulk, quad) ** (-1.0 / exps.bulk)
    return C * _boundary_power(n, eta, t, exps.trace) ** (1.0 / exps.trace)


def laplacian_ratio(n: int, eta: int, t: float, C: float, x: np.ndarray) -> np.ndarray:
    """-Laplacian(U) / U^{2*-1} at points x of shape (..., n)."""
    k = 0.5 * (n - 2)
    y = np.array(x, dtype=float)
    y[..., 0] -= t
    y2 = np.sum(y * y, axis=-1)
    base = shape_square(eta, t, x[..., 0]) + np.sum(y[..., 1:] ** 2, axis=-1)
    laplacian = C * (-2.0 * k * n * base ** (-k - 1.0) + 4.0 * k * (k + 1.0) * y2 * base ** (-k - 2.0))
    return -laplacian / (C * base ** -k) ** ((n + 2.0) / (n - 2.0))


def boundary_ratio(n: int, eta: int, t: float, C: float, x_tan: np.ndarray) -> np.ndarray:
    """-d_nu U / U^{2#-1} on the boundary x1 = 0, with d_nu = -d/dx1."""
    k = 0.5 * (n - 2)
    base = float(shape_square(eta, t, 0.0)) + np.sum(np.asarray(x_tan) ** 2, axis=-1)
    d1 = -2.0 * k * C * base ** (-k - 1.0) * (0.0 - t)
    return d1 / (C * base ** -k) ** (n / (n - 2.0))


def multipliers(n: int, branch: Branch, t: float, C: float,
                samples: int = 50, seed: int = 7) -> Tuple[float, float]:
    """
    Bulk and boundary multipliers of -Lap U = lam U^{2*-1}, d_nu U = -sigma U^{2#-1}.

    Both ratios are evaluated at `samples` random points; their spread must stay below 1e-9.

    Raises:
        ELConsistencyError: If either ratio is not constant.
    """
    _check_shift(n, branch.eta, t)
    rng = np.random.default_rng(seed)
    if branch.eta > 0 and t > 0.0:
        low, reach = max(0.0, t - 2.0), 2.0
    else:
        low, reach = 0.0, min(10.0, max(1.0, float(np.sqrt(abs(shape_square(branch.eta, t, 0.0))))))
    interior = rng.uniform(-reach, reach, size=(samples, n))
    interior[:, 0] = rng.uniform(low, low + 2.0 * reach, size=samples)
    tangential = rng.uniform(-reach, reach, size=(samples, n - 1))
    lam_samples = laplacian_ratio(n, branch.eta, t, C, interior)
    sigma_samples = boundary_ratio(n, branch.eta, t, C, tangential)
    lam = float(np.median(lam_samples))
    sigma = float(np.median(sigma_samples))
    lam_spread = float(np.ptp(lam_samples)) / max(abs(lam), 1e-300)
    sigma_spread = float(np.ptp(sigma_samples)) / max(abs(sigma), 1e-300)
    if lam_spread > 1e-9 or sigma_spread > 1e-9:
        logger.error("Multiplier ratios not constant", lam_spread=lam_spread, sigma_spread=sigma_spread)
        raise ELConsistencyError(
            "Euler-Lagrange ratios are not constant",
            details={"lam_spread": lam_spread, "sigma_spread": sigma_spread}
        )
    return lam, sigma


def profile_eval(profile: BridgeProfile, x) -> Tuple[np.ndarray, np.ndarray]:
    """
    Value and gradient of U at half-space points x of shape (..., n).

    Raises:
        DomainError: If a point has x1 < 0.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x[..., 0] < 0.0):
        raise DomainError("Point outside the closed half-space")
    return _family_eval(profile.n, profile.eta, profile.t, profile.C, x)


def _family_eval(n: int, eta: int, t: float, C: float, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    k = 0.5 * (n - 2)
    y = np.array(x, dtype=float)
    y[..., 0] -= t
    base = shape_square(eta, t, x[..., 0]) + np.sum(y[..., 1:] ** 2, axis=-1)
    value = C * base ** -k
    gradient = (-2.0 * k * value / base)[..., None] * y
    return value, gradient


def _dirichlet_reduced(n: int, eta: int, t: float, quad: QuadratureSpec, scale: float = 1.0) -> float:
    """int |grad (eta + (a x1 - t)^2 + a^2|x'|^2)^{-k}|^2 dx, a = scale."""
    k = 0.5 * (n - 2)
    m = n - 1
    c1 = reduced_constant(n, n - 1.0)
    c0 = reduced_constant(n, float(n))
    peak, width = _peak_and_width(eta, t, quad, scale)

    def integrand(x1):
        b2 = shape_square(eta, t, scale * x1)
        return c1 * b2 ** (0.5 * m - (n - 1.0)) - eta * c0 * b2 ** (0.5 * m - n)

    return 4.0 * k * k * scale ** (2.0 * k + 2.0 - m) * integrate_half_line(integrand, peak, width, quad)


def dirichlet_integral(n: int, branch: Branch, t: float, C: float, quad: QuadratureSpec) -> float:
    """Dirichlet energy of C (eta + |x - t e1|^2)^{-(n-2)/2}."""
    _check_shift(n, branch.eta, t)
    return C * C * _dirichlet_reduced(n, branch.eta, t, quad)


def family_norms(n: int, eta: int, C: float, t: float, scale: float, quad: QuadratureSpec) -> Dict[str, float]:
    """
    Bulk L^{2*} norm, boundary L^{2#} norm and Dirichlet energy of the dilated profile
    a^{(n-2)/2} U(a x1, a x'), integrated in the original variables.
    """
    exps = Exponents(n)
    k = exps.decay
    amplitude = scale ** k * C
    bulk = amplitude ** exps.bulk * _bulk_power(n, eta, t, exps.bulk, quad, scale)
    boundary = amplitude ** exps.trace * scale ** (-(n - 1)) * _boundary_power(n, eta, t, exps.trace)
    return {
        "bulk": bulk ** (1.0 / exps.bulk),
        "boundary": boundary ** (1.0 / exps.trace),
        "dirichlet": C * C * _dirichlet_reduced(n, eta, t, quad, scale),
    }


def phi_value(profile: BridgeProfile, quad: QuadratureSpec) -> float:
    """
    Phi(T) from the Dirichlet energy of U, checked against lam - sigma T^{2#}.

    Raises:
        ELConsistencyError: If the two values disagree beyond 1e-8 relative.
    """
    energy = dirichlet_integral(profile.n, profile.branch, profile.t, profile.C, quad)
    _check_energy_identity(profile.n, energy, profile.lam, profile.sigma, profile.T)
    return float(np.sqrt(energy))


def _check_energy_identity(n: int, energy: float, lam: float, sigma: float, T: float) -> float:
    identity = lam - sigma * T ** Exponents(n).trace
    gap = abs(energy - identity) / energy
    if gap > 1e-8:
        logger.error("Energy identity violated", energy=energy, identity=identity)
        raise ELConsistencyError("Dirichlet energy disagrees with lam - sigma T^{2#}",
                                 details={"energy": energy, "identity": identity})
    return gap


def escobar_threshold(n: int, quad: QuadratureSpec) -> float:
    """
    Trace level T_E of the normalized harmonic Escobar bubble c |x + e1|^{-(n-2)}.

    Raises:
        ELConsistencyError: If the bubble is not harmonic to 1e-10 at sample points.
    """
    if n < 3:
        raise DomainError("Dimension must be at least 3", details={"n": n})
    exps = Exponents(n)
    c = _bulk_power(n, FLAT, ESCOBAR_SHIFT, exps.bulk, quad) ** (-1.0 / exps.bulk)
    points = np.random.default_rng(n).uniform(0.0, 3.0, size=(16, n))
    residual = float(np.max(np.abs(laplacian_ratio(n, FLAT, ESCOBAR_SHIFT, c, points))))
    if residual > 1e-10:
        raise ELConsistencyError("Escobar bubble is not harmonic", details={"residual": residual})
    return c * _boundary_power(n, FLAT, ESCOBAR_SHIFT, exps.trace) ** (1.0 / exps.trace)


def escobar_energy(n: int, quad: QuadratureSpec) -> float:
    """Dirichlet energy Phi(T_E)^2 of the normalized Escobar bubble."""
    exps = Exponents(n)
    c = _bulk_power(n, FLAT, ESCOBAR_SHIFT, exps.bulk, quad) ** (-1.0 / exps.bulk)
    return c * c * _dirichlet_reduced(n, FLAT, ESCOBAR_SHIFT, quad)


def sobolev_constant(n: int, quad: QuadratureSpec) -> float:
    """
    Sharp whole-space Sobolev constant from the Aubin-Talenti bubble (1+|x|^2)^{-(n-2)/2}.

    Raises:
        IntegralError: If the radial quadrature misses n(n-2)/4 |S^n|^{2/n}.
    """
    k = 0.5 * (n - 2)
    exps = Exponents(n)
    area = sphere_area(n - 1)
    gradient = area * integrate_half_line(
        lambda r: 4.0 * k * k * r ** (n + 1) * (1.0 + r * r) ** (-float(n)), 0.0, quad.tail_cutoff, quad)
    mass = area * integrate_half_line(
        lambda r: r ** (n - 1) * (1.0 + r * r) ** (-float(n)), 0.0, quad.tail_cutoff, quad)
    value = gradient / mass ** (2.0 / exps.bulk)
    closed = 0.25 * n * (n - 2) * sphere_area(n) ** (2.0 / n)
    if abs(value - closed) > 1e-10 * closed:
        raise IntegralError("Sobolev constant quadrature failed", details={"value": value, "closed": closed})
    return value


def _build_profile(n: int, branch: Branch, t: float, quad: QuadratureSpec,
                   settings: ProfileSettings) -> Tuple[BridgeProfile, ModelBall]:
    _check_shift(n, branch.eta, t)
    C = normalize(n, branch, t, quad)
    T = trace_constraint(n, branch, t, quad)
    lam, sigma = multipliers(n, branch, t, C, settings.el_samples, settings.el_seed)
    profile = BridgeProfile(n=n, branch=branch, t=t, C=C, lam=lam, sigma=sigma, T=T, phi=0.0)
    profile = dataclasses.replace(profile, phi=phi_value(profile, quad))
    ball = model_ball_from_profile(profile)
    profile = dataclasses.replace(profile, diagnostics=profile_invariants(profile, ball, quad, settings))
    logger.info("Bridge profile built", n=n, branch=branch.value, t=t, T=T)
    return profile, ball


def profile_from_shift(n: int, branch: Branch, t: float, quad: QuadratureSpec,
                       settings: Optional[ProfileSettings] = None) -> BridgeProfile:
    """Profile with a prescribed shift t on the given branch."""
    return _build_profile(n, branch, t, quad, settings or ProfileSettings())[0]


def scan_grid(branch: Branch, settings: ProfileSettings) -> np.ndarray:
    """Increasing shifts on which the trace level is bracketed."""
    limit = settings.t_scan_limit
    if branch is Branch.SPHERICAL:
        half = np.logspace(-3.0, np.log10(limit), settings.scan_points // 2)
        return np.concatenate([-half[::-1], [0.0], half])
    offsets = np.logspace(np.log10(settings.hyperbolic_min_offset), np.log10(limit - 1.0), settings.scan_points)
    return -1.0 - offsets[::-1]


def trace_scan(n: int, branch: Branch, quad: QuadratureSpec, settings: ProfileSettings) -> Dict[str, object]:
    """Trace levels on the scan grid and whether they are strictly monotone."""
    grid = scan_grid(branch, settings)
    levels = np.array([_trace_of(n, branch.eta, t, quad) for t in grid])
    steps = np.diff(levels)
    monotone = bool(np.all(steps < 0.0) or np.all(steps > 0.0))
    if not monotone:
        logger.warning("Trace level not monotone on the scan grid", n=n, branch=branch.value)
    return {"grid": grid, "levels": levels, "monotone": monotone}


def solve_profile(n: int, T: float, quad: QuadratureSpec,
                  settings: Optional[ProfileSettings] = None) -> BridgeProfile:
    """
    Bridge profile with boundary L^{2#} norm T.

    Raises:
        DegenerateBridgeError: If T is within the degenerate tolerance of T_E.
        RootError: If T is outside the scanned range or refinement misses 1e-10.
    """
    settings = settings or ProfileSettings()
    if not (T > 0.0 and np.isfinite(T)):
        raise DomainError("Trace level must be positive", details={"T": T})
    T_E = escobar_threshold(n, quad)
    if abs(T - T_E) <= settings.degenerate_tol * T_E:
        raise DegenerateBridgeError("Trace level equals the Escobar threshold", details={"T": T, "T_E": T_E})
    branch = Branch.SPHERICAL if T < T_E else Branch.HYPERBOLIC
    scan = trace_scan(n, branch, quad, settings)
    grid, residual = scan["grid"], np.log(scan["levels"]) - np.log(T)

    crossings = np.nonzero(np.sign(residual[:-1]) != np.sign(residual[1:]))[0]
    if crossings.size == 0:
        raise RootError(
            "Trace level outside the scanned shift range",
            details={"T": T, "branch": branch.value, "range": [float(scan["levels"].min()), float(scan["levels"].max())]}
        )
    i = int(crossings[0])

    def mismatch(t: float) -> float:
        return float(np.log(_trace_of(n, branch.eta, t, quad)) - np.log(T))

    t_star = bisect(mismatch, grid[i], grid[i + 1], xtol=1e-12, rtol=4 * np.finfo(float).eps, maxiter=400)
    refined = newton(mismatch, t_star, x1=t_star + 1e-7 * max(1.0, abs(t_star)), maxiter=2, tol=0.0, disp=False)
    if np.isfinite(refined) and grid[i] <= refined <= grid[i + 1] and abs(mismatch(refined)) < abs(mismatch(t_star)):
        t_star = float(refined)
    if abs(np.expm1(mismatch(t_star))) > settings.root_tol:
        raise RootError("Shift refinement missed the trace level", details={"T": T, "t": t_star})

    profile, _ = _build_profile(n, branch, float(t_star), quad, settings)
    diagnostics = dict(profile.diagnostics)
    diagnostics["trace_monotone"] = {"value": float(scan["monotone"]), "tol": 0.0, "pass": scan["monotone"]}
    logger.info("Profile solved", n=n, T=T, branch=branch.value, t=t_star)
    return dataclasses.replace(profile, diagnostics=diagnostics)


def _entry(value: float, tol: float) -> dict:
    return {"value": float(value), "tol": tol, "pass": bool(value <= tol)}


def profile_invariants(profile: BridgeProfile, ball: ModelBall, quad: QuadratureSpec,
                       settings: Optional[ProfileSettings] = None) -> Dict[str, dict]:
    """
    Invariant battery of a profile: constraint norms recomputed with an independent rule, the
    multiplier-curvature identity, the energy identity and the Robin coefficient.
    """
    settings = settings or ProfileSettings()
    n, exps = profile.n, profile.exponents
    check_rule = QuadratureSpec(scheme="gauss-legendre", node_count=512, tail_cutoff=quad.tail_cutoff, tol=quad.tol)
    bulk = profile.C ** exps.bulk * _bulk_power(n, profile.eta, profile.t, exps.bulk, check_rule)
    trace = profile.C * _boundary_radial(n, profile.eta, profile.t, check_rule) ** (1.0 / exps.trace)
    lam_expected = 0.25 * n * (n - 2) * ball.kappa
    lam_points, sigma_points = multipliers(
        n, profile.branch, profile.t, profile.C, settings.el_samples, settings.el_seed + 1
    )
    energy = profile.phi ** 2
    return {
        "bulk_norm": _entry(abs(bulk - 1.0), 1e-9),
        "trace_norm": _entry(abs(trace - profile.T) / profile.T, 1e-9),
        "lambda_kappa": _entry(abs(profile.lam - lam_expected) / abs(lam_expected), 1e-8),
        "energy_identity": _entry(
            abs(energy - (profile.lam - profile.sigma * profile.T ** exps.trace)) / energy, 1e-8),
        "el_interior": _entry(abs(lam_points - profile.lam) / abs(profile.lam), 1e-9),
        "el_boundary": _entry(abs(sigma_points - profile.sigma) / max(abs(profile.sigma), 1e-300), 1e-9),
        "robin_coefficient": _entry(
            abs(ball.beta - float(cot_kappa(ball.kappa, ball.radius))) / max(1.0, abs(ball.beta)), 1e-8),
    }

