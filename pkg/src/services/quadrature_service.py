"""
Finite quadrature rules on intervals and on the half-line [0, inf).

The tanh-sinh rule keeps node distances to both interval ends separately, so integrands with
endpoint singularities are never evaluated at the endpoint itself.
"""

from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
import structlog

from src.models.config import QuadratureSpec
from src.utils.exceptions import IntegralError

logger = structlog.get_logger()

Integrand = Callable[[np.ndarray], np.ndarray]

# Largest abscissa of the tanh-sinh sum; weights beyond it are below double precision.
TANH_SINH_EXTENT = 3.5

# Node doublings tried before a rule that misses its tolerance is accepted with a warning.
MAX_REFINEMENTS = 2


@lru_cache(maxsize=16)
def tanh_sinh_rule(order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Tanh-sinh rule on [0, 1] with `order` nodes.

    Returns:
        Tuple (left, right, weights) where left[k] and right[k] are the distances of node k to
        0 and to 1, and the weights sum to 1.
    """
    half = (order - 1) // 2
    h = TANH_SINH_EXTENT / half
    t = h * np.arange(-half, half + 1)
    v = 0.5 * np.pi * np.sinh(t)
    cosh_v = np.cosh(v)
    # 1 - tanh(v) and 1 + tanh(v), both without cancellation
    left = 0.5 * np.exp(v) / cosh_v
    right = 0.5 * np.exp(-v) / cosh_v
    weights = 0.5 * h * 0.5 * np.pi * np.cosh(t) / cosh_v ** 2
    return left, right, weights


@lru_cache(maxsize=16)
def tanh_sinh_embedded_weights(order: int) -> np.ndarray:
    """
    Weights of the tanh-sinh rule with twice the step, laid out on the nodes of `order`.

    Every other node carries twice its weight and the rest carry none, so one set of integrand
    values gives both estimates.
    """
    half = (order - 1) // 2
    _, _, weights = tanh_sinh_rule(order)
    even = np.arange(-half, half + 1) % 2 == 0
    return np.where(even, 2.0 * weights, 0.0)


@lru_cache(maxsize=16)
def gauss_legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on [0, 1] in the same (left, right, weights) layout."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (1.0 + nodes), 0.5 * (1.0 - nodes), 0.5 * weights


def unit_rule(quad: QuadratureSpec, embedded: bool = False) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Unit rule of the spec. With `embedded`, the tanh-sinh weights are those of the coarser
    rule nested in the same nodes.
    """
    if quad.scheme == "tanh-sinh":
        left, right, weights = tanh_sinh_rule(quad.node_count)
        if embedded:
            weights = tanh_sinh_embedded_weights(quad.node_count)
        return left, right, weights
    if embedded:
        raise IntegralError("Gauss-Legendre has no embedded rule", details={"node_count": quad.node_count})
    return gauss_legendre_rule(quad.node_count)


def interval_nodes(a: float, b: float, quad: QuadratureSpec,
                   embedded: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights of the rule mapped to [a, b].

    Nodes in the left half are measured from a and nodes in the right half from b.
    """
    left, right, weights = unit_rule(quad, embedded)
    length = b - a
    x = np.where(left < 0.5, a + length * left, b - length * right)
    return x, length * weights


def tail_nodes(start: float, width: float, quad: QuadratureSpec,
               embedded: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes and weights for [start, inf) through x = start + width (1/v - 1), v in (0, 1].
    """
    left, right, weights = unit_rule(quad, embedded)
    v = left
    x = start + width * (right / v)
    return x, weights * width / v ** 2


def half_line_nodes(peak: float, width: float, quad: QuadratureSpec,
                    embedded: bool = False) -> Tuple[np.ndarray, np.ndarray]:
    """
    Composite nodes and weights on [0, inf) with breakpoints around `peak`.

    Args:
        peak: Location of the integrand's maximum (>= 0).
        width: Width of the inner pieces on each side of the peak.
        quad: Quadrature rule and node count.
        embedded: Return the weights of the nested coarser tanh-sinh rule.

    Returns:
        Tuple of nodes and weights.
    """
    if width <= 0.0 or not np.isfinite(width):
        raise IntegralError("Half-line rule needs a positive width", details={"width": width})
    peak = max(0.0, float(peak))
    pieces = []
    if peak > width:
        pieces.append(interval_nodes(0.0, peak - width, quad, embedded))
        pieces.append(interval_nodes(peak - width, peak, quad, embedded))
    elif peak > 0.0:
        pieces.append(interval_nodes(0.0, peak, quad, embedded))
    pieces.append(interval_nodes(peak, peak + width, quad, embedded))
    pieces.append(tail_nodes(peak + width, width, quad, embedded))
    x = np.concatenate([piece[0] for piece in pieces])
    w = np.concatenate([piece[1] for piece in pieces])
    return x, w


def estimate(f: Integrand, nodes: Callable[..., Tuple[np.ndarray, np.ndarray]],
             quad: QuadratureSpec) -> Tuple[float, float, float]:
    """
    One quadrature sum with its error estimate.

    The estimate compares against the nested half-step rule for tanh-sinh and against half the
    nodes for Gauss-Legendre.

    Returns:
        Tuple (integral, error estimate, integral of |f|).
    """
    x, w = nodes(quad)
    values = f(x)
    total = float(np.sum(w * values))
    scale = float(np.sum(np.abs(w * values)))
    if quad.scheme == "tanh-sinh":
        coarse = float(np.sum(nodes(quad, embedded=True)[1] * values))
    else:
        x_coarse, w_coarse = nodes(quad.model_copy(update={"node_count": quad.node_count // 2}))
        coarse = float(np.sum(w_coarse * f(x_coarse)))
    return total, abs(total - coarse), scale


def _integrate_to_tolerance(f: Integrand, nodes, quad: QuadratureSpec, **context) -> float:
    requested = quad.node_count
    for _ in range(MAX_REFINEMENTS + 1):
        total, error, scale = estimate(f, nodes, quad)
        if not np.isfinite(total):
            logger.error("Non-finite quadrature sum", node_count=quad.node_count, **context)
            raise IntegralError("Quadrature sum is not finite", details={"node_count": quad.node_count, **context})
        if error <= quad.tol * scale:
            if quad.node_count != requested:
                logger.debug("Quadrature refined", node_count=quad.node_count, error=error)
            return total
        last = quad.node_count
        quad = quad.model_copy(update={"node_count": 2 * quad.node_count - 1})
    logger.warning("Quadrature tolerance not reached", node_count=last, error=error, scale=scale,
                   tol=quad.tol, **context)
    return total


def integrate_interval(f: Integrand, a: float, b: float, quad: QuadratureSpec) -> float:
    """
    Integrates a vectorized integrand over [a, b], doubling the nodes until the error estimate
    is within `quad.tol` of the integral of |f|.

    Raises:
        IntegralError: If the quadrature sum is not finite.
    """
    if not b > a:
        return 0.0

    def nodes(spec: QuadratureSpec, embedded: bool = False):
        return interval_nodes(a, b, spec, embedded)

    return _integrate_to_tolerance(f, nodes, quad, a=a, b=b)


def integrate_half_line(f: Integrand, peak: float, width: float, quad: QuadratureSpec) -> float:
    """
    Integrates a vectorized integrand over [0, inf) to the tolerance of `quad`.

    Raises:
        IntegralError: If the quadrature sum is not finite.
    """
    def nodes(spec: QuadratureSpec, embedded: bool = False):
        return half_line_nodes(peak, width, spec, embedded)

    return _integrate_to_tolerance(f, nodes, quad, peak=peak, width=width)
