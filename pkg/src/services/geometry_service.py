"""
Constant-curvature model spaces.

Curvature-scaled sine, inverse stereographic projections, geodesic distances, the model ball
of a bridge profile and the meridian chart between half-space and geodesic polar coordinates.
"""

from typing import Tuple

import numpy as np
import structlog
from scipy.optimize import brentq

from src.models.geometry import Branch, ModelBall, ModelPoint
from src.models.profile import BridgeProfile
from src.utils.exceptions import DomainError, GeometryError, IsometryError

logger = structlog.get_logger()

SERIES_THRESHOLD = 1e-4
INNER_PRODUCT_SLACK = 1e-10


def _check_kappa(kappa: float) -> None:
    if kappa == 0.0 or not np.isfinite(kappa):
        raise DomainError("Flat curvature is excluded", details={"kappa": kappa})


def s_kappa(kappa: float, r):
    """
    sin(sqrt(k) r)/sqrt(k) for k > 0 and sinh(sqrt(-k) r)/sqrt(-k) for k < 0.

    Args:
        kappa: Nonzero curvature.
        r: Nonnegative radius (scalar or array).

    Returns:
        Value with the shape of r.
    """
    _check_kappa(kappa)
    r = np.asarray(r, dtype=float)
    root = np.sqrt(abs(kappa))
    x = root * r
    small = x < SERIES_THRESHOLD
    with np.errstate(over="ignore"):
        exact = (np.sin(x) if kappa > 0 else np.sinh(x)) / root
    series = r * (1.0 - kappa * r ** 2 / 6.0 + kappa ** 2 * r ** 4 / 120.0)
    result = np.where(small, series, exact)
    return float(result) if result.ndim == 0 else result


def s_kappa_prime(kappa: float, r):
    """r-derivative of s_kappa."""
    _check_kappa(kappa)
    r = np.asarray(r, dtype=float)
    x = np.sqrt(abs(kappa)) * r
    with np.errstate(over="ignore"):
        result = np.cos(x) if kappa > 0 else np.cosh(x)
    return float(result) if result.ndim == 0 else result


def cot_kappa(kappa: float, r):
    """s'_k(r)/s_k(r), by series below the threshold."""
    _check_kappa(kappa)
    r = np.asarray(r, dtype=float)
    root = np.sqrt(abs(kappa))
    x = root * r
    small = x < SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    with np.errstate(over="ignore", invalid="ignore"):
        exact = root / np.tan(safe) if kappa > 0 else root / np.tanh(safe)
    series = 1.0 / np.where(small, r, 1.0) - kappa * r / 3.0 - kappa ** 2 * r ** 3 / 45.0
    result = np.where(small, series, exact)
    return float(result) if result.ndim == 0 else result


def stereo_inverse_coords(branch: Branch, y: np.ndarray) -> np.ndarray:
    """
    Vectorized inverse stereographic projection; y has shape (..., n), result (..., n+1).
    """
    y = np.asarray(y, dtype=float)
    norm2 = np.sum(y * y, axis=-1, keepdims=True)
    if branch is Branch.SPHERICAL:
        denom = 1.0 + norm2
        return np.concatenate([2.0 * y / denom, (norm2 - 1.0) / denom], axis=-1)
    if np.any(norm2 <= 1.0):
        raise DomainError("Hyperbolic projection needs |y| > 1", details={"min_norm2": float(np.min(norm2))})
    denom = norm2 - 1.0
    return np.concatenate([2.0 * y / denom, (norm2 + 1.0) / denom], axis=-1)


def stereo_inverse(branch: Branch, y) -> ModelPoint:
    """
    Inverse stereographic projection from the north pole (sphere) or onto the upper sheet
    of the hyperboloid.

    Raises:
        DomainError: For a hyperbolic point with |y| <= 1.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.ndim != 1:
        raise GeometryError("Expected a single point", details={"shape": list(y.shape)})
    return ModelPoint(branch, stereo_inverse_coords(branch, y))


def conformal_factor(branch: Branch, y) -> float:
    """Density of the pulled-back model metric: 4/(1+|y|^2)^2 or 4/(|y|^2-1)^2."""
    y = np.asarray(y, dtype=float)
    norm2 = float(y @ y)
    if branch is Branch.SPHERICAL:
        return 4.0 / (1.0 + norm2) ** 2
    if norm2 <= 1.0:
        raise DomainError("Hyperbolic conformal factor needs |y| > 1", details={"norm2": norm2})
    return 4.0 / (norm2 - 1.0) ** 2


def minkowski(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a[..., :-1] * b[..., :-1], axis=-1) - a[..., -1] * b[..., -1]


def geodesic_distance(branch: Branch, alpha: float, p: ModelPoint, q: ModelPoint) -> float:
    """
    Distance in the metric alpha * g_1 of the unit model.

    Raises:
        GeometryError: On mixed branches or an inner product outside its admissible range.
    """
    if p.branch is not branch or q.branch is not branch or p.coords.shape != q.coords.shape:
        raise GeometryError("Points belong to different model spaces")
    if alpha <= 0.0:
        raise GeometryError("Metric scale must be positive", details={"alpha": alpha})
    a, b = p.coords, q.coords
    diff = a - b
    if branch is Branch.SPHERICAL:
        dot = float(a @ b)
        if abs(dot) > 1.0 + INNER_PRODUCT_SLACK:
            raise GeometryError("Spherical inner product out of range", details={"dot": dot})
        angle = 2.0 * np.arctan2(np.linalg.norm(diff), np.linalg.norm(a + b))
    else:
        inner = float(minkowski(a, b))
        if inner > -1.0 + INNER_PRODUCT_SLACK * max(1.0, abs(inner)):
            raise GeometryError("Hyperbolic inner product out of range", details={"inner": inner})
        chord2 = max(float(minkowski(diff, diff)), 0.0)
        angle = 2.0 * np.arcsinh(0.5 * np.sqrt(chord2))
    return float(np.sqrt(alpha) * angle)


def north_pole(branch: Branch, n: int) -> ModelPoint:
    """Image of the point at infinity: (0, ..., 0, 1) on both branches."""
    coords = np.zeros(n + 1)
    coords[-1] = 1.0
    return ModelPoint(branch, coords)


def _axis_point(branch: Branch, n: int, t: float, height: float) -> ModelPoint:
    y = np.zeros(n)
    y[0] = height - t
    return stereo_inverse(branch, y)


def locate_center(branch: Branch, n: int, t: float) -> float:
    """
    x1 coordinate of the axis point whose image is equidistant from the images of the boundary
    point x = 0 and of infinity.

    Raises:
        IsometryError: If no sign change is found.
    """
    origin = _axis_point(branch, n, t, 0.0)
    infinity = north_pole(branch, n)

    def mismatch(log_height: float) -> float:
        point = _axis_point(branch, n, t, float(np.exp(log_height)))
        return geodesic_distance(branch, 1.0, point, origin) - geodesic_distance(branch, 1.0, point, infinity)

    guess = 0.5 * np.log(max(abs(branch.eta + t * t), 1e-12))
    lo, hi = guess - 2.0, guess + 2.0
    for _ in range(60):
        if mismatch(lo) < 0.0:
            break
        lo -= 2.0
    for _ in range(60):
        if mismatch(hi) > 0.0:
            break
        hi += 2.0
    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if not (f_lo < 0.0 < f_hi):
        raise IsometryError("Ball center not bracketed on the axis", details={"t": t, "lo": f_lo, "hi": f_hi})
    log_height = brentq(mismatch, lo, hi, xtol=1e-15, rtol=4e-16, maxiter=200)
    return float(np.exp(log_height))


def model_ball_from_profile(profile: BridgeProfile) -> ModelBall:
    """
    Geodesic ball (B(R), alpha g_1) isometric to the half-space with the metric U^{4/(n-2)}|dx|^2.

    Raises:
        IsometryError: If boundary samples disagree on the radius or the Robin coefficient
            differs from s'(R)/s(R).
    """
    n, branch, t = profile.n, profile.branch, profile.t
    alpha = profile.C ** (4.0 / (n - 2)) / 4.0
    kappa = branch.eta / alpha

    height = locate_center(branch, n, t)
    center = _axis_point(branch, n, t, height)
    boundary_y = np.zeros(n)
    boundary_y[0] = -t
    radius = geodesic_distance(branch, alpha, center, stereo_inverse(branch, boundary_y))
    boundary_y[1] = 1.0
    radius_e2 = geodesic_distance(branch, alpha, center, stereo_inverse(branch, boundary_y))
    radius_inf = geodesic_distance(branch, alpha, center, north_pole(branch, n))
    spread = max(abs(radius - radius_e2), abs(radius - radius_inf)) / radius
    if spread > 1e-8:
        logger.error("Boundary images not on one metric sphere", spread=spread, t=t)
        raise IsometryError("Radius depends on the boundary sample", details={"spread": spread, "t": t})

    beta = -2.0 * profile.sigma / (n - 2)
    expected = float(cot_kappa(kappa, radius))
    if abs(beta - expected) > 1e-8 * max(1.0, abs(beta)):
        logger.error("Robin coefficient mismatch", beta=beta, expected=expected)
        raise IsometryError("Robin coefficient is not s'(R)/s(R)", details={"beta": beta, "cot": expected})

    ball = ModelBall(
        n=n, branch=branch, alpha=alpha, kappa=kappa, radius=radius, beta=beta,
        shift=t, center_height=height,
    )
    logger.debug("Model ball built", n=n, branch=branch.value, radius=radius, kappa=kappa)
    return ball


class ModelChart:
    """
    Meridian chart between half-space points (x1, rho = |x'|, with x' along e2) and geodesic
    polar coordinates (r, u) about the ball center, u being the cosine of the angle to the axis
    that points toward the image of infinity.

    All ambient vectors live in the span of (e1, e2, e_{n+1}), stored as 3-vectors.
    """

    def __init__(self, ball: ModelBall):
        self.ball = ball
        self.branch = ball.branch
        self.t = ball.shift
        self.sqrt_alpha = float(np.sqrt(ball.alpha))
        self.center = self._project(np.array([[ball.center_height - ball.shift, 0.0]]))[0]
        pole = np.array([0.0, 0.0, 1.0])
        tangent = pole + self._sign * self._inner(self.center, pole) * self.center
        self.axis = tangent / np.sqrt(self._inner(tangent, tangent))
        self.normal = np.array([0.0, 1.0, 0.0])

    @property
    def _sign(self) -> float:
        # tangent projection q - <p,q>p / <p,p>
        return -1.0 if self.branch is Branch.SPHERICAL else 1.0

    def _inner(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.branch is Branch.SPHERICAL:
            return np.sum(a * b, axis=-1)
        return minkowski(a, b)

    def _project(self, y: np.ndarray) -> np.ndarray:
        return stereo_inverse_coords(self.branch, y)

    def _trig(self, angle: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        if self.branch is Branch.SPHERICAL:
            return np.cos(angle), np.sin(angle)
        return np.cosh(angle), np.sinh(angle)

    def to_half_space(self, r, u) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Maps model coordinates to the meridian half-plane.

        Returns:
            Tuple (x1, rho, jacobian) with jacobian[..., i, j] = d(x1, rho)_i / d(r, u)_j.
        """
        r, u = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(u, dtype=float))
        angle = r / self.sqrt_alpha
        c, s = self._trig(angle)
        v = np.sqrt(np.clip(1.0 - u * u, 0.0, None))
        direction = u[..., None] * self.axis + v[..., None] * self.normal
        p = self.center
        q = c[..., None] * p + s[..., None] * direction
        if self.branch is Branch.SPHERICAL:
            dq_dangle = -s[..., None] * p + c[..., None] * direction
        else:
            dq_dangle = s[..., None] * p + c[..., None] * direction
        with np.errstate(divide="ignore", invalid="ignore"):
            dq_du = s[..., None] * (self.axis - (u / v)[..., None] * self.normal)
        sign = -1.0 if self.branch is Branch.SPHERICAL else 1.0
        denom = sign * (q[..., 2] - 1.0)
        y = q[..., :2] / denom[..., None]

        def pushforward(dq):
            d_denom = sign * dq[..., 2]
            return dq[..., :2] / denom[..., None] - q[..., :2] * (d_denom / denom ** 2)[..., None]

        dy_dr = pushforward(dq_dangle) / self.sqrt_alpha
        dy_du = pushforward(dq_du)
        jacobian = np.stack([dy_dr, dy_du], axis=-1)
        return y[..., 0] + self.t, y[..., 1], jacobian

    def from_half_space(self, x1, rho) -> Tuple[np.ndarray, np.ndarray]:
        """Maps meridian half-plane points to model coordinates (r, u)."""
        x1, rho = np.broadcast_arrays(np.asarray(x1, dtype=float), np.asarray(rho, dtype=float))
        y = np.stack([x1 - self.t, rho], axis=-1)
        q = self._project(y)
        p = np.broadcast_to(self.center, q.shape)
        diff = q - p
        if self.branch is Branch.SPHERICAL:
            angle = 2.0 * np.arctan2(np.linalg.norm(diff, axis=-1), np.linalg.norm(q + p, axis=-1))
        else:
            angle = 2.0 * np.arcsinh(0.5 * np.sqrt(np.clip(minkowski(diff, diff), 0.0, None)))
        tangent = q + self._sign * self._inner(p, q)[..., None] * p
        along = self._inner(tangent, np.broadcast_to(self.axis, q.shape))
        across = tangent[..., 1]
        hyp = np.hypot(along, across)
        u = np.where(hyp > 0.0, along / np.where(hyp > 0.0, hyp, 1.0), 1.0)
        return self.sqrt_alpha * angle, np.clip(u, -1.0, 1.0)
