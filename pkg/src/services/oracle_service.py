"""
Monte Carlo oracle for the profile integrals.

Importance sampling with a heavy-tailed Student-t proposal folded onto the half-space, so the
weight ratio stays bounded for the algebraically decaying integrands.
"""

from typing import Tuple

import numpy as np
import structlog
from scipy.stats import multivariate_t

from src.models.geometry import Branch
from src.models.profile import Exponents
from src.services.profile_service import shape_square
from src.utils.exceptions import DomainError, IntegralError

logger = structlog.get_logger()

PROPOSAL_DOF = 1.0


def _proposal(dim: int, center: np.ndarray, scale: float):
    return multivariate_t(loc=center, shape=scale ** 2 * np.eye(dim), df=PROPOSAL_DOF)


def _bulk_chunk(n: int, eta: int, t: float, q: float, size: int, rng: np.random.Generator,
                center: np.ndarray, scale: float) -> Tuple[float, float]:
    proposal = _proposal(n, center, scale)
    y = proposal.rvs(size=size, random_state=rng).reshape(size, n)
    x = y.copy()
    x[:, 0] = np.abs(x[:, 0])
    mirrored = x.copy()
    mirrored[:, 0] = -mirrored[:, 0]
    density = np.exp(proposal.logpdf(x)) + np.exp(proposal.logpdf(mirrored))
    base = shape_square(eta, t, x[:, 0]) + np.sum(x[:, 1:] ** 2, axis=1)
    ratio = base ** (-0.5 * q * (n - 2)) / density
    return float(np.sum(ratio)), float(np.sum(ratio * ratio))


def _boundary_chunk(n: int, eta: int, t: float, q: float, size: int, rng: np.random.Generator,
                    scale: float) -> Tuple[float, float]:
    dim = n - 1
    proposal = _proposal(dim, np.zeros(dim), scale)
    x = proposal.rvs(size=size, random_state=rng).reshape(size, dim)
    density = np.exp(proposal.logpdf(x))
    base = float(shape_square(eta, t, 0.0)) + np.sum(x * x, axis=1)
    ratio = base ** (-0.5 * q * (n - 2)) / density
    return float(np.sum(ratio)), float(np.sum(ratio * ratio))


def mc_oracle(n: int, branch: Branch, t: float, q: float, samples: int, seed: int,
              domain: str = "bulk", chunk_size: int = 1_000_000) -> Tuple[float, float]:
    """
    Importance-sampling estimate of a bulk or boundary profile integral.

    Each chunk draws from its own stream spawned from `seed`, so the estimate depends only on
    (seed, samples, chunk_size).

    Args:
        n: Dimension.
        branch: Profile branch.
        t: Shift.
        q: Exponent of U (the integrand is the unnormalized U^q).
        samples: Number of samples.
        seed: Root seed.
        domain: "bulk" for the half-space, "boundary" for x1 = 0.
        chunk_size: Samples per stream.

    Returns:
        Tuple of estimate and standard error.
    """
    if branch.eta < 0 and not t < -1.0:
        raise DomainError("Hyperbolic branch requires t < -1", details={"t": t})
    if domain not in ("bulk", "boundary"):
        raise DomainError(f"Unknown integration domain: {domain}", details={"domain": domain})
    if samples < 2:
        raise DomainError("Need at least two samples", details={"samples": samples})
    Exponents(n)

    eta = branch.eta
    spread = float(np.sqrt(abs(shape_square(eta, t, 0.0))))
    if eta > 0 and t > 0.0:
        center, scale = np.eye(n)[0] * t, 1.0
    else:
        center, scale = np.zeros(n), max(spread, 1e-3)

    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    total, total_sq = 0.0, 0.0
    for size, stream in zip(sizes, streams):
        rng = np.random.default_rng(stream)
        if domain == "bulk":
            part, part_sq = _bulk_chunk(n, eta, t, q, size, rng, center, scale)
        else:
            part, part_sq = _boundary_chunk(n, eta, t, q, size, rng, max(spread, 1e-3))
        total += part
        total_sq += part_sq

    mean = total / samples
    variance = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    error = float(np.sqrt(variance / samples))
    if not (np.isfinite(mean) and np.isfinite(error)):
        raise IntegralError("Monte Carlo estimate is not finite", details={"t": t, "q": q})
    logger.debug("Monte Carlo estimate", n=n, branch=branch.value, t=t, q=q, domain=domain,
                 estimate=mean, standard_error=error)
    return float(mean), error
