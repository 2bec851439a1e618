"""Exact fault-path operators for small system + bath instances

A SimInstance is an explicit Hamiltonian on a few system and bath qubits,
with a schedule of steps. Each step lasts t0 (its duration), starts with
optional ideal gates, and partitions some of the system qubits into
locations. The noisy evolution is the time-ordered product of exact step
propagators exp(-i H_step t0), where H_step is H_B plus the coupling terms.

Masked evolution: coupling terms whose qubit set intersects a masked
location are switched off for the whole step that location belongs to.

Fault operator: for a set I of marked locations,

    E(I) = sum over subsets S of I of (-1)**|S| U_S

with U_S the evolution with S masked. Expanding each U_S as a Dyson series
in the coupling, a fault path (a time-ordered sequence of coupling
insertions) appears in U_S iff it avoids every location in S. By
inclusion-exclusion the alternating sum keeps exactly the paths which
strike every location of I at least once, with no truncation.

Striking a location at least once during its step is the same event as
having a first insertion there, so step-level masking reproduces the sum of
paths with first insertions at every marked location.
"""

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ftnoise.bound_engine import BoundReport, corollary1
from ftnoise.constants import (
    ALPHA0,
    DEFAULT_MAX_R,
    EPSILON0,
    MAX_BATH_QUBITS,
    MAX_DIMENSION,
    MAX_R_HARD_CAP,
    MAX_SYSTEM_QUBITS,
    VIOLATION_TOLERANCE,
)
from ftnoise.errors import InputError, ResourceError
from ftnoise.noise_model import (
    CouplingSpec,
    NoiseModel,
    QubitLayout,
    canonical_qubits,
    eta_profile,
)
from ftnoise.pauli import GATES, check_pauli_string, gate_operator, pauli_operator

_logger = logging.getLogger(__name__)

Location = Tuple[int, int]


@dataclass(frozen=True)
class BathTerm:
    coefficient: float
    paulis: str


@dataclass(frozen=True)
class CouplingTerm:
    """coefficient * (system Paulis on qubits) (x) (bath Pauli string)

    The system string is aligned with qubits as given; both are stored
    sorted by qubit index.
    """

    coefficient: float
    qubits: Tuple[int, ...]
    system: str
    bath: str

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        system = str(self.system).upper()
        if len(system) != len(qubits):
            raise InputError(
                f"system Pauli string '{system}' does not match qubits {list(qubits)}"
            )
        canonical_qubits(qubits)
        pairs = sorted(zip(qubits, system))
        object.__setattr__(self, "qubits", tuple(q for q, _ in pairs))
        object.__setattr__(self, "system", "".join(p for _, p in pairs))
        object.__setattr__(self, "bath", str(self.bath).upper())
        object.__setattr__(self, "coefficient", float(self.coefficient))


@dataclass(frozen=True)
class Gate:
    name: str
    qubits: Tuple[int, ...]


@dataclass(frozen=True)
class Step:
    locations: Tuple[Tuple[int, ...], ...]
    duration: float = 1.0
    gates: Tuple[Gate, ...] = ()


@dataclass(frozen=True)
class SimInstance:
    """An explicit system + bath Hamiltonian with a step schedule

    System qubits are numbered 0..n_sys-1 and come first in the tensor
    product, followed by the n_bath bath qubits.
    """

    n_sys: int
    n_bath: int
    bath_h: Tuple[BathTerm, ...]
    sb_terms: Tuple[CouplingTerm, ...]
    steps: Tuple[Step, ...]

    @property
    def n_qubits(self) -> int:
        return self.n_sys + self.n_bath

    @property
    def dimension(self) -> int:
        return 2**self.n_qubits

    @property
    def m(self) -> int:
        """Largest number of qubits at any location"""
        return max(
            (len(loc) for step in self.steps for loc in step.locations), default=1
        )

    def locations(self) -> List[Location]:
        return [
            (s, i)
            for s, step in enumerate(self.steps)
            for i in range(len(step.locations))
        ]

    def location_qubits(self, location: Location) -> Tuple[int, ...]:
        s, i = location
        if not (0 <= s < len(self.steps) and 0 <= i < len(self.steps[s].locations)):
            raise InputError(f"No location {i} in step {s}")
        return self.steps[s].locations[i]

    def scaled(self, factor: float) -> "SimInstance":
        """Returns a copy with every coupling coefficient multiplied by factor"""
        return replace(
            self,
            sb_terms=tuple(
                replace(t, coefficient=t.coefficient * factor) for t in self.sb_terms
            ),
        )

    def relabeled(self, permutation: Sequence[int]) -> "SimInstance":
        """Renames system qubit q to permutation[q] everywhere"""
        perm = list(permutation)
        if sorted(perm) != list(range(self.n_sys)):
            raise InputError(f"{perm} is not a permutation of {self.n_sys} qubits")

        def move(qubits):
            return tuple(perm[q] for q in qubits)

        return replace(
            self,
            sb_terms=tuple(
                CouplingTerm(t.coefficient, move(t.qubits), t.system, t.bath)
                for t in self.sb_terms
            ),
            steps=tuple(
                replace(
                    step,
                    locations=tuple(move(loc) for loc in step.locations),
                    gates=tuple(Gate(g.name, move(g.qubits)) for g in step.gates),
                )
                for step in self.steps
            ),
        )

    def validate(self):
        """Checks the instance

        Raises:
          ResourceError if the instance is too large to simulate
          InputError if it is malformed
        """
        if self.n_sys < 1 or self.n_bath < 0:
            raise InputError(
                f"need n_sys >= 1 and n_bath >= 0, got {self.n_sys} and {self.n_bath}"
            )
        if self.n_sys > MAX_SYSTEM_QUBITS or self.n_bath > MAX_BATH_QUBITS:
            raise ResourceError(
                f"at most {MAX_SYSTEM_QUBITS} system and {MAX_BATH_QUBITS} bath "
                f"qubits can be simulated, got {self.n_sys} and {self.n_bath}"
            )
        if self.dimension > MAX_DIMENSION:
            raise ResourceError(
                f"Hilbert dimension {self.dimension} exceeds {MAX_DIMENSION}"
            )
        for term in self.bath_h:
            check_pauli_string(term.paulis, self.n_bath)
        for term in self.sb_terms:
            check_pauli_string(term.system, len(term.qubits))
            check_pauli_string(term.bath, self.n_bath)
            qubits = term.qubits
            if qubits and (qubits[0] < 0 or qubits[-1] >= self.n_sys):
                raise InputError(f"coupling term on {list(qubits)} is out of range")
            if not term.qubits:
                raise InputError("coupling terms must act on at least one system qubit")
        for s, step in enumerate(self.steps):
            if not step.duration > 0:
                raise InputError(f"step {s} has non-positive duration {step.duration}")
            seen = set()
            for loc in step.locations:
                if not loc:
                    raise InputError(f"step {s} has an empty location")
                for q in loc:
                    if q < 0 or q >= self.n_sys:
                        raise InputError(f"step {s}: qubit {q} is out of range")
                    if q in seen:
                        raise InputError(f"step {s}: locations overlap on qubit {q}")
                    seen.add(q)
            for gate in step.gates:
                name = gate.name.upper()
                if name not in GATES:
                    raise InputError(f"step {s}: unknown gate '{gate.name}'")
                if GATES[name].shape[0] != 2 ** len(gate.qubits):
                    raise InputError(
                        f"step {s}: gate {name} can't act on {list(gate.qubits)}"
                    )
                if any(q < 0 or q >= self.n_sys for q in gate.qubits):
                    raise InputError(f"step {s}: gate {name} acts outside the system")
                if len(set(gate.qubits)) != len(gate.qubits):
                    raise InputError(f"step {s}: gate {name} repeats a qubit")


@dataclass(frozen=True)
class FaultQuery:
    """A set of marked locations, each a (step index, location index) pair"""

    locations: FrozenSet[Location]

    @classmethod
    def of(cls, *locations: Location) -> "FaultQuery":
        return cls(frozenset(tuple(loc) for loc in locations))

    @property
    def r(self) -> int:
        return len(self.locations)


@dataclass(frozen=True)
class FaultOperatorResult:
    query: FaultQuery
    norm: float
    epsilon_r: Optional[float]
    margin: Optional[float]
    conclusive: bool

    @property
    def violation(self) -> bool:
        """A conclusive bound which the exact norm exceeds"""
        return (
            self.conclusive
            and self.epsilon_r is not None
            and self.norm > self.epsilon_r + VIOLATION_TOLERANCE
        )

    @property
    def row(self) -> list:
        return [
            " ".join(f"{s}:{i}" for s, i in sorted(self.query.locations)),
            self.query.r,
            self.norm,
            self.epsilon_r,
            self.margin,
            self.conclusive,
        ]

    header = ["locations", "r", "norm", "epsilon_r", "margin", "conclusive"]


def hermitian_expm(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) for Hermitian h, from its eigendecomposition"""
    w, v = scipy.linalg.eigh(h)
    return (v * np.exp(-1j * t * w)) @ v.conj().T


class MaskedEvolver:
    """Builds the masked evolutions of one instance

    Step propagators are cached per (step, set of disabled terms), so the
    2**r evolutions needed by every fault query share their exponentials.
    """

    def __init__(self, instance: SimInstance):
        instance.validate()
        self._instance = instance
        n = instance.n_qubits
        dim = instance.dimension
        bath = np.zeros((dim, dim), dtype=complex)
        for term in instance.bath_h:
            placements = {instance.n_sys + b: p for b, p in enumerate(term.paulis)}
            bath += term.coefficient * pauli_operator(n, placements)
        self._bath_h = bath
        self._term_ops = []
        for term in instance.sb_terms:
            placements = dict(zip(term.qubits, term.system))
            placements.update(
                {instance.n_sys + b: p for b, p in enumerate(term.bath)}
            )
            self._term_ops.append(term.coefficient * pauli_operator(n, placements))
        self._gates = []
        for step in instance.steps:
            gate = np.eye(dim, dtype=complex)
            for g in step.gates:
                gate = gate_operator(n, g.name, g.qubits) @ gate
            self._gates.append(gate)
        self._cache: Dict[Tuple[int, FrozenSet[int]], np.ndarray] = {}
        self.hits = 0

    @property
    def instance(self) -> SimInstance:
        return self._instance

    @property
    def bath_hamiltonian(self) -> np.ndarray:
        return self._bath_h

    def term_operator(self, index: int) -> np.ndarray:
        return self._term_ops[index]

    def gate(self, step: int) -> np.ndarray:
        """The ideal gates applied at the start of a step"""
        return self._gates[step]

    def touching_terms(self, qubits: Iterable[int]) -> FrozenSet[int]:
        """Indices of coupling terms acting on any of the qubits"""
        qubits = set(qubits)
        return frozenset(
            i for i, t in enumerate(self._instance.sb_terms) if qubits & set(t.qubits)
        )

    def step_propagator(self, step: int, disabled: FrozenSet[int]) -> np.ndarray:
        """exp(-i H_step t0) G_step with the disabled coupling terms removed"""
        key = (step, disabled)
        if key in self._cache:
            self.hits += 1
            return self._cache[key]
        h = self._bath_h.copy()
        for i, op in enumerate(self._term_ops):
            if i not in disabled:
                h += op
        duration = self._instance.steps[step].duration
        propagator = hermitian_expm(h, duration) @ self._gates[step]
        self._cache[key] = propagator
        return propagator

    def bath_propagator(self, step: int) -> np.ndarray:
        """The step propagator with every coupling term removed"""
        return self.step_propagator(step, frozenset(range(len(self._term_ops))))

    def evolve(self, masked: Iterable[Location]) -> np.ndarray:
        instance = self._instance
        masked_qubits = defaultdict(set)
        for location in masked:
            masked_qubits[location[0]].update(instance.location_qubits(location))
        u = np.eye(instance.dimension, dtype=complex)
        for s in range(len(instance.steps)):
            disabled = self.touching_terms(masked_qubits.get(s, ()))
            u = self.step_propagator(s, disabled) @ u
        return u


def evolve_masked(
    instance: SimInstance,
    masked: Iterable[Location] = (),
    evolver: Optional[MaskedEvolver] = None,
) -> np.ndarray:
    """The full evolution with every coupling term touching a masked
    location switched off for that location's step

    Args:
      instance (SimInstance)
      masked: (step, location) pairs
      evolver (MaskedEvolver): reuse cached propagators of the instance

    Returns:
      np.ndarray: the unitary on system + bath

    Raises:
      ResourceError if the instance exceeds the simulation caps
    """
    if evolver is None:
        evolver = MaskedEvolver(instance)
    return evolver.evolve(masked)


def fault_operator(
    instance: SimInstance,
    query: FaultQuery,
    evolver: Optional[MaskedEvolver] = None,
    r_cap: int = MAX_R_HARD_CAP,
) -> np.ndarray:
    """E(I) = sum over subsets S of I of (-1)**|S| evolve_masked(S)

    Raises:
      ResourceError if r exceeds r_cap
    """
    if query.r > r_cap:
        raise ResourceError(f"fault queries are capped at r = {r_cap}, got {query.r}")
    if evolver is None:
        evolver = MaskedEvolver(instance)
    for location in query.locations:
        instance.location_qubits(location)
    marked = sorted(query.locations)
    total = np.zeros((instance.dimension, instance.dimension), dtype=complex)
    for size in range(len(marked) + 1):
        sign = -1.0 if size % 2 else 1.0
        for subset in itertools.combinations(marked, size):
            total += sign * evolver.evolve(subset)
    return total


def first_order_fault_operator(
    instance: SimInstance,
    location: Location,
    evolver: Optional[MaskedEvolver] = None,
) -> np.ndarray:
    """The part of E({location}) linear in the coupling

    Only the terms touching the location, in its own step, differ between
    the full and the masked evolution, so the linear part is the Frechet
    derivative of that step's bath-only exponential in their direction,
    sandwiched between bath-only evolutions of the other steps.
    """
    if evolver is None:
        evolver = MaskedEvolver(instance)
    s, _ = location
    touching = evolver.touching_terms(instance.location_qubits(location))
    dim = instance.dimension
    v = np.zeros((dim, dim), dtype=complex)
    for i in touching:
        v += evolver.term_operator(i)
    duration = instance.steps[s].duration
    _, derivative = scipy.linalg.expm_frechet(
        -1j * duration * evolver.bath_hamiltonian, -1j * duration * v
    )
    before = np.eye(dim, dtype=complex)
    for q in range(s):
        before = evolver.bath_propagator(q) @ before
    after = np.eye(dim, dtype=complex)
    for q in range(s + 1, len(instance.steps)):
        after = evolver.bath_propagator(q) @ after
    return after @ derivative @ evolver.gate(s) @ before


def spectral_norm(matrix: np.ndarray) -> float:
    """Largest singular value, from the top eigenvalue of M^dagger M

    Raises:
      InputError if any entry is not finite
    """
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    if not np.all(np.isfinite(matrix)):
        raise InputError("matrix has non-finite entries")
    gram = matrix.conj().T @ matrix
    n = gram.shape[0]
    top = scipy.linalg.eigvalsh(gram, subset_by_index=[n - 1, n - 1])
    return float(np.sqrt(max(top[-1], 0.0)))


def instance_noise_model(
    instance: SimInstance, evolver: Optional[MaskedEvolver] = None
) -> NoiseModel:
    """The table noise model induced by an instance's coupling terms

    A single Pauli term has norm |coefficient|; terms sharing a qubit set
    are summed and the norm of the sum is taken. t0 is the longest step.
    """
    groups = defaultdict(list)
    for i, term in enumerate(instance.sb_terms):
        groups[term.qubits].append(i)
    table = {}
    for qubits, indices in groups.items():
        if len(indices) == 1:
            table[qubits] = abs(instance.sb_terms[indices[0]].coefficient)
        else:
            if evolver is None:
                evolver = MaskedEvolver(instance)
            total = sum(evolver.term_operator(i) for i in indices)
            table[qubits] = spectral_norm(total)
    k_max = max((len(q) for q in table), default=1)
    t0 = max((step.duration for step in instance.steps), default=1.0)
    return NoiseModel(
        layout=QubitLayout(count=instance.n_sys),
        coupling=CouplingSpec(variant="table", table=table, k_max=k_max),
        t0=t0,
    )


def instance_bound(
    instance: SimInstance, epsilon0: float = EPSILON0, alpha0: float = ALPHA0
) -> BoundReport:
    """Corollary-1 bound for an instance, with m the largest location"""
    profile = eta_profile(instance_noise_model(instance))
    return corollary1(profile, m=instance.m, epsilon0=epsilon0, alpha0=alpha0)


def verify_instance(
    instance: SimInstance,
    max_r: int = DEFAULT_MAX_R,
    bound: Optional[BoundReport] = None,
    r_cap: int = MAX_R_HARD_CAP,
) -> List[FaultOperatorResult]:
    """Computes ||E(I)|| for every set I of at most max_r locations and
    compares it with epsilon**r

    Results are conclusive only when epsilon < 1; otherwise the bound is
    vacuous and only the norms are reported.

    Raises:
      ResourceError if max_r exceeds r_cap or the instance is too large
    """
    if max_r < 1:
        raise InputError(f"max_r must be at least 1, got {max_r}")
    if max_r > r_cap:
        raise ResourceError(f"fault queries are capped at r = {r_cap}, got {max_r}")
    evolver = MaskedEvolver(instance)
    if bound is None:
        bound = instance_bound(instance)
    epsilon = bound.epsilon
    conclusive = epsilon is not None and epsilon < 1.0
    if not conclusive:
        _logger.warning(f"epsilon = {epsilon} is not below 1: results inconclusive")
    results = []
    locations = instance.locations()
    for r in range(1, min(max_r, len(locations)) + 1):
        for marked in itertools.combinations(locations, r):
            query = FaultQuery(frozenset(marked))
            norm = spectral_norm(fault_operator(instance, query, evolver, r_cap))
            epsilon_r = None if epsilon is None else epsilon**r
            margin = None if epsilon_r is None else epsilon_r - norm
            result = FaultOperatorResult(query, norm, epsilon_r, margin, conclusive)
            if result.violation:
                _logger.warning(
                    f"||E|| = {norm:.6g} exceeds epsilon^{r} = {epsilon_r:.6g} "
                    f"at {sorted(marked)}"
                )
            results.append(result)
    _logger.info(
        f"verified {len(results)} fault queries, "
        f"{evolver.hits} step propagators reused"
    )
    return results


def random_instance(
    rng: np.random.Generator,
    scale: float = 1e-2,
    n_sys: Optional[int] = None,
    n_bath: Optional[int] = None,
    n_steps: Optional[int] = None,
    pair_probability: float = 0.7,
) -> SimInstance:
    """A random instance with k = 1 and k = 2 Pauli couplings

    Defaults draw 2-3 system qubits, 1-2 bath qubits and 2-4 steps whose
    locations hold one or two qubits. Coupling magnitudes are drawn from
    [0.2, 1] * scale with random signs; bath terms are order one.
    """
    n_sys = int(n_sys if n_sys is not None else rng.integers(2, 4))
    n_bath = int(n_bath if n_bath is not None else rng.integers(1, 3))
    n_steps = int(n_steps if n_steps is not None else rng.integers(2, 5))

    def paulis(length, alphabet="IXYZ"):
        return "".join(str(rng.choice(list(alphabet))) for _ in range(length))

    bath_h = tuple(
        BathTerm(float(rng.normal()), paulis(n_bath, "XYZ"))
        for _ in range(int(rng.integers(1, 3)))
    )

    def coefficient():
        return float(scale * rng.uniform(0.2, 1.0) * rng.choice([-1.0, 1.0]))

    sb_terms = [
        CouplingTerm(coefficient(), (q,), paulis(1, "XYZ"), paulis(n_bath))
        for q in range(n_sys)
    ]
    for pair in itertools.combinations(range(n_sys), 2):
        if rng.uniform() < pair_probability:
            sb_terms.append(
                CouplingTerm(coefficient(), pair, paulis(2, "XYZ"), paulis(n_bath))
            )

    steps = []
    for _ in range(n_steps):
        order = [int(q) for q in rng.permutation(n_sys)]
        locations = []
        while order:
            size = 2 if len(order) >= 2 and rng.uniform() < 0.5 else 1
            locations.append(tuple(sorted(order[:size])))
            order = order[size:]
        gates = []
        for loc in locations:
            if len(loc) == 2:
                gates.append(Gate(str(rng.choice(["CNOT", "CZ", "SWAP"])), loc))
            else:
                gates.append(Gate(str(rng.choice(["H", "S", "T", "X", "I"])), loc))
        steps.append(Step(tuple(locations), 1.0, tuple(gates)))
    return SimInstance(n_sys, n_bath, bath_h, tuple(sb_terms), tuple(steps))
