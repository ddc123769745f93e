"""
Controller for the Monte Carlo oracle comparison.
"""

from typing import List, Tuple

import numpy as np
import structlog

from src.models.config import RunConfig
from src.models.geometry import Branch
from src.models.profile import Exponents
from src.services.oracle_service import mc_oracle
from src.services.profile_service import boundary_integral, bulk_integral
from src.utils.reporting import Artifact, check, envelope, invariant_summary

logger = structlog.get_logger()

COLUMNS = ["pair", "branch", "t", "domain", "quadrature", "monte_carlo", "standard_error", "sigmas"]


def oracle_pairs(count: int, seed: int) -> List[Tuple[Branch, float]]:
    """Alternating-branch shifts drawn from the seed: t in (-3, 3) or t = -1 - e^v, v in (log 0.1, log 3)."""
    rng = np.random.default_rng(seed)
    pairs = []
    for index in range(count):
        if index % 2 == 0:
            pairs.append((Branch.SPHERICAL, float(rng.uniform(-3.0, 3.0))))
        else:
            pairs.append((Branch.HYPERBOLIC, float(-1.0 - np.exp(rng.uniform(np.log(0.1), np.log(3.0))))))
    return pairs


def cmd_oracle(config: RunConfig) -> Artifact:
    """Beta-reduced quadrature against importance sampling for bulk and boundary integrals."""
    oracle, quad, n = config.settings.oracle, config.quad, config.n
    exps = Exponents(n)
    records = []
    for index, (branch, t) in enumerate(oracle_pairs(oracle.pairs, oracle.seed)):
        exact = {
            "bulk": (bulk_integral(n, branch, t, exps.bulk, quad), exps.bulk),
            "boundary": (boundary_integral(n, branch, t, quad), exps.trace),
        }
        for offset, (domain, (value, power)) in enumerate(exact.items()):
            estimate, error = mc_oracle(n, branch, t, power, oracle.samples, oracle.seed + 2 * index + offset,
                                        domain=domain, chunk_size=oracle.chunk_size)
            sigmas = abs(estimate - value) / error if error > 0.0 else 0.0
            records.append({
                "pair": index,
                "branch": branch.value,
                "t": t,
                "domain": domain,
                "quadrature": value,
                "monte_carlo": estimate,
                "standard_error": error,
                "sigmas": sigmas,
            })
            logger.info("Oracle comparison", branch=branch.value, t=t, domain=domain, sigmas=sigmas)
    checks = {
        f"pair_{record['pair']}_{record['domain']}": check(record["sigmas"], oracle.tolerance_sigmas)
        for record in records
    }
    rows = [[record[column] for column in COLUMNS] for record in records]
    document = envelope("oracle", config.model_dump(), {"comparisons": records}, invariant_summary(checks))
    return Artifact(document, COLUMNS, rows)
