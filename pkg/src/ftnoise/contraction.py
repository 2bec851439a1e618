"""Combinatorics of contractions among marked locations

A k-contraction is a single coupling term producing the first insertion at
k marked locations at once. Bounding the fault-path sum for r marked
locations reduces to

    sum over (r_1, r_2, ...) with sum_k k r_k = r of prod_k eta_k**r_k / r_k!

which is the x**r coefficient of exp(sum_k eta_k x**k). Relaxing the
constraint on the multiplicities bounds it by a product of exponentials,
(2 alpha exp(sum_k g_k / (2 k!)))**r. This module computes both sides so the
direction of each inequality can be checked numerically.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Generator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ftnoise.bound_engine import Envelope, SeriesValue, exponent_sum
from ftnoise.constants import PARTITION_R_MAX
from ftnoise.errors import InputError, ResourceError
from ftnoise.noise_model import EtaProfile

_logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ContractionStrengths:
    """Upper bounds eta_1..eta_r on the strength of k-contractions among r
    marked locations"""

    r: int
    eta: Tuple[float, ...]

    def __getitem__(self, k: int) -> float:
        """eta_k, 1-indexed"""
        return self.eta[k - 1]


def contraction_strengths(
    r: int, eta1_components: Sequence[float]
) -> ContractionStrengths:
    """Builds contraction strengths from the single-location components

    eta_1 = sum_j eta1_components[j], and for k > 1
    eta_k = (r / (2k)) sum_{l>=0} 2**(k+l) eta1_components[k+l].

    Args:
      r (int): number of marked locations
      eta1_components: eta_1^(j) for j = 1..j_max, already maximised over
        the anchor qubit

    Returns:
      ContractionStrengths with one entry per k = 1..r
    """
    if r < 1:
        raise InputError(f"r must be at least 1, got {r}")
    components = [float(c) for c in eta1_components]
    if any(c < 0 or not math.isfinite(c) for c in components):
        raise InputError("eta_1 components must be finite and nonnegative")
    eta = [sum(components)]
    for k in range(2, r + 1):
        total = sum(2.0**j * components[j - 1] for j in range(k, len(components) + 1))
        eta.append(r / (2.0 * k) * total)
    return ContractionStrengths(r=r, eta=tuple(eta))


def multiplicity_vectors(
    r: int, largest: Optional[int] = None
) -> Generator[Dict[int, int], None, None]:
    """Yields every partition of r as a {part: multiplicity} dict, by
    recursive descent over the largest part"""
    if largest is None:
        largest = r
    if r == 0:
        yield {}
        return
    for part in range(min(r, largest), 0, -1):
        for count in range(r // part, 0, -1):
            rest = r - part * count
            for tail in multiplicity_vectors(rest, part - 1):
                vector = {part: count}
                vector.update(tail)
                yield vector


def exact_partition_sum(
    r: int, eta: Sequence[float], r_max: int = PARTITION_R_MAX
) -> float:
    """sum over multiplicity vectors with sum_k k r_k = r of
    prod_k eta_k**r_k / r_k!

    Args:
      r (int): number of marked locations
      eta: eta_1, eta_2, ... with at least r entries
      r_max (int): enumeration cap

    Raises:
      ResourceError if r exceeds r_max
    """
    if r < 1:
        raise InputError(f"r must be at least 1, got {r}")
    if r > r_max:
        raise ResourceError(f"partition enumeration is capped at r = {r_max}, got {r}")
    eta = list(eta)
    if len(eta) < r:
        raise InputError(f"need eta_k for k <= {r}, got {len(eta)} values")
    total = 0.0
    n_partitions = 0
    for vector in multiplicity_vectors(r):
        product = 1.0
        for k, count in vector.items():
            product *= eta[k - 1] ** count / math.factorial(count)
        total += product
        n_partitions += 1
    _logger.debug(f"r = {r}: {n_partitions} partitions")
    return total


def series_exp_coefficient(r: int, eta: Sequence[float]) -> float:
    """The x**r coefficient of exp(sum_{k<=r} eta_k x**k), by truncated
    power-series multiplication"""
    if r < 1:
        raise InputError(f"r must be at least 1, got {r}")
    poly = np.zeros(r + 1)
    poly[1:] = np.asarray(list(eta)[:r], dtype=float)
    result = np.zeros(r + 1)
    result[0] = 1.0
    power = result.copy()
    # P has no constant term, so P**j contributes nothing below x**j
    for j in range(1, r + 1):
        power = np.convolve(power, poly)[: r + 1] / j
        result += power
    return float(result[r])


def contraction_ceiling(r: int, k: int, alpha: float, g_k: float) -> float:
    """The bound eta_k <= r g_k (2 alpha)**k / (2 k!)"""
    return r * g_k * (2.0 * alpha) ** k / (2.0 * math.factorial(k))


def relaxed_product_bound(
    r: int,
    alpha: float,
    g: Sequence[Union[SeriesValue, float]],
    envelope: Optional[Envelope] = None,
) -> float:
    """(2 alpha exp(sum_k g_k / (2 k!)))**r, the partition sum with the
    constraint on multiplicities dropped"""
    if r < 1:
        raise InputError(f"r must be at least 1, got {r}")
    if alpha == 0:
        return 0.0
    exponent = exponent_sum(g, alpha, envelope)
    return (2.0 * alpha * math.exp(exponent.upper)) ** r


def binomial_violations(max_total: int = 30) -> List[Tuple[int, int]]:
    """Pairs (k, l) with k >= 1, l >= 0, k + l <= max_total for which
    C(k+l-1, l) > 2**(k+l-1), in exact integer arithmetic. Expected empty."""
    return [
        (k, l)
        for k in range(1, max_total + 1)
        for l in range(0, max_total - k + 1)
        if math.comb(k + l - 1, l) > 2 ** (k + l - 1)
    ]


@dataclass(frozen=True)
class ContractionCheck:
    r: int
    strengths: Tuple[float, ...]
    partition_sum: float
    relaxed_bound: float

    @property
    def holds(self) -> bool:
        return self.partition_sum <= self.relaxed_bound * (1.0 + 1e-12)

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "strengths": list(self.strengths),
            "partition_sum": self.partition_sum,
            "relaxed_bound": self.relaxed_bound,
            "holds": self.holds,
        }


def contraction_diagnostics(
    profile: EtaProfile,
    alpha: float,
    g: Sequence[Union[SeriesValue, float]],
    max_r: int = 3,
    envelope: Optional[Envelope] = None,
) -> List[ContractionCheck]:
    """For r = 1..max_r, compares the partition sum over the profile's own
    contraction strengths with the relaxed product bound, for single-qubit
    locations"""
    checks = []
    for r in range(1, max_r + 1):
        strengths = contraction_strengths(r, profile.eta_set)
        checks.append(
            ContractionCheck(
                r=r,
                strengths=strengths.eta,
                partition_sum=exact_partition_sum(r, strengths.eta),
                relaxed_bound=relaxed_product_bound(r, alpha, g, envelope),
            )
        )
        if not checks[-1].holds:
            _logger.warning(f"relaxed product bound fails at r = {r}")
    return checks
