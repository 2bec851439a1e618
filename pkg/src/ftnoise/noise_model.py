"""Coupling-norm models of correlated Hamiltonian noise

A NoiseModel declares upper bounds on the operator norms of the k-body
system-bath terms H^(k) over a finite layout of system qubits, and reduces
them to the per-qubit noise sums which feed the effective noise strength
bound.

    from ftnoise.noise_model import CouplingSpec, NoiseModel, QubitLayout
    from ftnoise.noise_model import eta_profile

    model = NoiseModel(
        layout=QubitLayout(count=3),
        coupling=CouplingSpec(variant="table", table={(0, 1): 0.01}),
        t0=1.0,
    )
    profile = eta_profile(model)
    print(profile.eta_tilde)

Norms are functions of the unordered set of qubits a term acts on, so a
sum over ordered tuples of distinct qubits is (k - 1)! times the sum over
sets; the profile records both forms.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable, List, Mapping, Optional, Tuple

import numpy as np

from ftnoise.constants import (
    COUPLING_VARIANTS,
    ENUMERATION_BUDGET,
    KERNELS,
    METRICS,
)
from ftnoise.errors import InputError, ResourceError

_logger = logging.getLogger(__name__)


def canonical_qubits(qubits: Iterable[int]) -> Tuple[int, ...]:
    """Returns a qubit set as a sorted tuple

    Raises:
      InputError if an index is repeated: H^(k) vanishes when two of its
      indices coincide, so such terms can't be declared
    """
    canon = tuple(sorted(int(q) for q in qubits))
    if len(set(canon)) != len(canon):
        raise InputError(f"Repeated qubit index in {list(qubits)}")
    return canon


@dataclass(frozen=True)
class QubitLayout:
    """The system qubits, optionally placed on a lattice

    Args:
      count (int): number of system qubits
      positions: one coordinate tuple per qubit, in lattice units
      metric (str): "euclidean" or "manhattan"
    """

    count: int
    positions: Optional[Tuple[Tuple[float, ...], ...]] = None
    metric: str = "euclidean"

    def __post_init__(self):
        if self.positions is not None:
            positions = tuple(tuple(float(x) for x in p) for p in self.positions)
            object.__setattr__(self, "positions", positions)

    def distance(self, i: int, j: int) -> float:
        if self.positions is None:
            raise InputError("positions required to measure distances")
        a = np.asarray(self.positions[i])
        b = np.asarray(self.positions[j])
        if self.metric == "manhattan":
            return float(np.abs(a - b).sum())
        return float(np.linalg.norm(a - b))

    def distance_matrix(self) -> np.ndarray:
        """All pairwise distances as a (count, count) array"""
        if self.positions is None:
            raise InputError("positions required to measure distances")
        points = np.asarray(self.positions)
        diff = points[:, None, :] - points[None, :, :]
        if self.metric == "manhattan":
            return np.abs(diff).sum(axis=-1)
        return np.sqrt((diff**2).sum(axis=-1))

    def diameter(self, qubits: Iterable[int]) -> float:
        """Largest pairwise distance within a set of qubits; zero for a
        single qubit"""
        qubits = list(qubits)
        if len(qubits) < 2:
            return 0.0
        return max(self.distance(i, j) for i, j in itertools.combinations(qubits, 2))


@dataclass(frozen=True)
class CouplingSpec:
    """Upper bounds on the norms of the k-body coupling terms

    Two variants are supported:

    table: an explicit map from qubit sets to norm bounds. Sets absent from
    the table have norm zero.

    parametric: norm = amplitudes[k - 1] * kernel(diameter) where the kernel
    is exp(-rate * d) ("exponential") or (1 + d) ** -rate ("power_law").

    Keyword args:
      variant (str) - "table" or "parametric"
      table (dict) - {qubit tuple: norm}
      amplitudes (tuple of float) - lambda_k for k = 1, 2, ...
      kernel (str) - "exponential" or "power_law"
      rate (float) - decay rate mu, or exponent q for the power law
      k_max (int) - largest k with nonzero terms, deduced if not given
    """

    variant: str = "table"
    table: Mapping[Tuple[int, ...], float] = field(default_factory=dict)
    amplitudes: Tuple[float, ...] = ()
    kernel: str = "exponential"
    rate: float = 0.0
    k_max: Optional[int] = None

    def __post_init__(self):
        table = {}
        for qubits, norm in dict(self.table).items():
            key = canonical_qubits(qubits)
            if key in table and table[key] != float(norm):
                raise InputError(f"Conflicting norms declared for qubits {list(key)}")
            table[key] = float(norm)
        object.__setattr__(self, "table", MappingProxyType(table))
        object.__setattr__(
            self, "amplitudes", tuple(float(a) for a in self.amplitudes)
        )
        if self.k_max is None:
            if self.variant == "parametric":
                k_max = max(len(self.amplitudes), 1)
            else:
                k_max = max((len(q) for q in table), default=1)
            object.__setattr__(self, "k_max", k_max)

    def kernel_value(self, diameter: float) -> float:
        if self.kernel == "power_law":
            return (1.0 + diameter) ** (-self.rate)
        return math.exp(-self.rate * diameter)

    def scaled(self, factor: float) -> "CouplingSpec":
        return replace(
            self,
            table={q: n * factor for q, n in self.table.items()},
            amplitudes=tuple(a * factor for a in self.amplitudes),
        )


@dataclass(frozen=True)
class NoiseModel:
    """A layout, its coupling norms, and the maximal location duration t0"""

    layout: QubitLayout
    coupling: CouplingSpec
    t0: float = 1.0

    def scaled(self, factor: float) -> "NoiseModel":
        """Returns a copy with every coupling norm multiplied by factor"""
        return replace(self, coupling=self.coupling.scaled(factor))

    def with_t0(self, t0: float) -> "NoiseModel":
        return replace(self, t0=t0)


@dataclass(frozen=True)
class EtaProfile:
    """Per-qubit noise sums for k = 1..k_max

    eta_tilde[k - 1] is the ordered-tuple sum, eta_set[k - 1] the
    unordered-set sum; they differ by a factor (k - 1)!. anchors[k - 1] is a
    qubit achieving the maximum.
    """

    k_max: int
    eta_tilde: Tuple[float, ...]
    eta_set: Tuple[float, ...]
    anchors: Tuple[int, ...] = ()
    evaluations: Tuple[int, ...] = ()

    @classmethod
    def from_eta_tilde(cls, eta_tilde: Iterable[float]) -> "EtaProfile":
        """Builds a profile directly from eta-tilde values, for analysing
        hand-computed or published noise figures"""
        eta_tilde = tuple(float(e) for e in eta_tilde)
        eta_set = tuple(e / math.factorial(k) for k, e in enumerate(eta_tilde))
        return cls(k_max=len(eta_tilde), eta_tilde=eta_tilde, eta_set=eta_set)

    def tilde(self, k: int) -> float:
        return self.eta_tilde[k - 1]

    def scaled(self, factor: float) -> "EtaProfile":
        return replace(
            self,
            eta_tilde=tuple(e * factor for e in self.eta_tilde),
            eta_set=tuple(e * factor for e in self.eta_set),
        )


def term_norm(model: NoiseModel, qubits: Iterable[int]) -> float:
    """The declared bound on the norm of the term acting on a set of qubits

    Args:
      model (NoiseModel): the noise model
      qubits: distinct qubit indices, in any order

    Returns:
      float: the norm bound, zero for sets larger than k_max

    Raises:
      InputError for an empty set or out-of-range index
    """
    key = canonical_qubits(qubits)
    if not key:
        raise InputError("Empty qubit set")
    bad = [q for q in key if q < 0 or q >= model.layout.count]
    if bad:
        raise InputError(
            f"Qubit index {bad[0]} out of range for {model.layout.count} qubits"
        )
    coupling = model.coupling
    k = len(key)
    if k > coupling.k_max:
        return 0.0
    if coupling.variant == "table":
        return coupling.table.get(key, 0.0)
    if k > len(coupling.amplitudes):
        return 0.0
    diameter = model.layout.diameter(key) if k > 1 else 0.0
    return coupling.amplitudes[k - 1] * coupling.kernel_value(diameter)


def _table_anchor_sums(model: NoiseModel, k: int) -> np.ndarray:
    """Credits each k-body table entry to every qubit in its set"""
    n = model.layout.count
    sums = np.zeros(n)
    for qubits, norm in model.coupling.table.items():
        if len(qubits) != k:
            continue
        if qubits[0] < 0 or qubits[-1] >= n:
            raise InputError(
                f"table entry {list(qubits)} references a qubit outside {n} qubits"
            )
        sums[list(qubits)] += norm
    return sums


def _enumerated_anchor_sums(model: NoiseModel, k: int) -> np.ndarray:
    """Sums the parametric norm over every (k-1)-subset of the other qubits,
    for each anchor"""
    n = model.layout.count
    coupling = model.coupling
    sums = np.zeros(n)
    if k > len(coupling.amplitudes):
        return sums
    amplitude = coupling.amplitudes[k - 1]
    if k == 1:
        sums[:] = amplitude
        return sums
    dist = model.layout.distance_matrix()
    for anchor in range(n):
        others = [q for q in range(n) if q != anchor]
        total = 0.0
        for subset in itertools.combinations(others, k - 1):
            members = (anchor,) + subset
            diameter = dist[np.ix_(members, members)].max()
            total += coupling.kernel_value(float(diameter))
        sums[anchor] = amplitude * total
    return sums


def eta_profile(
    model: NoiseModel, k_max: Optional[int] = None, budget: int = ENUMERATION_BUDGET
) -> EtaProfile:
    """Computes the per-qubit noise sums for k = 1..k_max

    eta_set[k] = max over anchor qubits i of the sum, over (k-1)-subsets S
    of the other qubits, of term_norm({i} | S), times t0. eta_tilde[k] is
    (k-1)! eta_set[k], the sum over ordered tuples of distinct qubits.

    Args:
      model (NoiseModel): the noise model
      k_max (int): largest k, defaults to the coupling's k_max
      budget (int): maximum number of subset evaluations for parametric
        couplings, summed over k

    Returns:
      EtaProfile

    Raises:
      ResourceError if the enumeration budget would be exceeded
    """
    coupling = model.coupling
    if k_max is None:
        k_max = coupling.k_max
    if k_max < 1 or k_max > coupling.k_max:
        raise InputError(f"k_max must be between 1 and {coupling.k_max}, got {k_max}")
    n = model.layout.count
    eta_tilde, eta_set, anchors, evaluations = [], [], [], []
    used = 0
    for k in range(1, k_max + 1):
        if coupling.variant == "table":
            count = sum(1 for q in coupling.table if len(q) == k)
            sums = _table_anchor_sums(model, k)
        else:
            count = n * math.comb(n - 1, k - 1)
            used += count
            if used > budget:
                raise ResourceError(
                    f"Enumeration budget of {budget} subset evaluations "
                    f"exceeded at k = {k}"
                )
            sums = _enumerated_anchor_sums(model, k)
        _logger.debug(f"k = {k}: {count} norm evaluations")
        anchor = int(np.argmax(sums)) if n else 0
        value = float(sums[anchor]) * model.t0 if n else 0.0
        eta_set.append(value)
        eta_tilde.append(math.factorial(k - 1) * value)
        anchors.append(anchor)
        evaluations.append(count)
    _logger.info(f"eta profile for k <= {k_max}: {eta_tilde}")
    return EtaProfile(
        k_max=k_max,
        eta_tilde=tuple(eta_tilde),
        eta_set=tuple(eta_set),
        anchors=tuple(anchors),
        evaluations=tuple(evaluations),
    )


def validate(model: NoiseModel) -> List[str]:
    """Checks a noise model and returns a list of problems, which is empty
    if the model is valid. Never raises.

    Args:
      model (NoiseModel)

    Returns:
      List(str): diagnostics
    """
    diagnostics = []
    layout = model.layout
    coupling = model.coupling
    if not (isinstance(model.t0, (int, float)) and math.isfinite(model.t0)) or (
        model.t0 <= 0
    ):
        diagnostics.append(f"t0 must be positive, got {model.t0}")
    if layout.count < 1:
        diagnostics.append(f"layout count must be positive, got {layout.count}")
    if layout.metric not in METRICS:
        diagnostics.append(f"unknown metric '{layout.metric}'")
    if layout.positions is not None:
        if len(layout.positions) != layout.count:
            diagnostics.append(
                f"{len(layout.positions)} positions given for {layout.count} qubits"
            )
        if len({len(p) for p in layout.positions}) > 1:
            diagnostics.append("positions have inconsistent dimensions")
    if coupling.k_max is None or coupling.k_max < 1:
        diagnostics.append(f"k_max must be positive, got {coupling.k_max}")

    if coupling.variant == "table":
        for qubits, norm in coupling.table.items():
            if not math.isfinite(norm) or norm < 0:
                diagnostics.append(
                    f"table entry {list(qubits)}: norm {norm} is not a finite "
                    "nonnegative number"
                )
            out_of_range = [q for q in qubits if q < 0 or q >= layout.count]
            if out_of_range:
                diagnostics.append(
                    f"table entry {list(qubits)}: qubit index {out_of_range[0]} "
                    f"out of range for {layout.count} qubits"
                )
            if len(qubits) > (coupling.k_max or 0):
                diagnostics.append(
                    f"table entry {list(qubits)} acts on more than k_max = "
                    f"{coupling.k_max} qubits"
                )
    elif coupling.variant == "parametric":
        for k, amplitude in enumerate(coupling.amplitudes, start=1):
            if not math.isfinite(amplitude) or amplitude < 0:
                diagnostics.append(
                    f"amplitude for k = {k} is not a finite nonnegative number"
                )
        if coupling.kernel not in KERNELS:
            diagnostics.append(f"unknown kernel '{coupling.kernel}'")
        if not math.isfinite(coupling.rate) or coupling.rate < 0:
            diagnostics.append(f"kernel rate must be nonnegative, got {coupling.rate}")
        if layout.positions is None and len(coupling.amplitudes) > 1:
            diagnostics.append("positions required for a parametric kernel")
    else:
        diagnostics.append(
            f"unknown coupling variant '{coupling.variant}', expected one of "
            f"{COUPLING_VARIANTS}"
        )
    return diagnostics
