import itertools
from dataclasses import replace

import numpy as np
import pytest
import scipy.linalg

from ftnoise.bound_engine import Verdict
from ftnoise.constants import UNITARITY_TOLERANCE
from ftnoise.dyson import (
    BathTerm,
    CouplingTerm,
    FaultQuery,
    Gate,
    MaskedEvolver,
    SimInstance,
    Step,
    evolve_masked,
    fault_operator,
    first_order_fault_operator,
    hermitian_expm,
    instance_bound,
    instance_noise_model,
    random_instance,
    spectral_norm,
    verify_instance,
)
from ftnoise.errors import InputError, ResourceError
from ftnoise.noise_model import eta_profile


def single_term_instance(coupling):
    return SimInstance(
        n_sys=1,
        n_bath=1,
        bath_h=(),
        sb_terms=(CouplingTerm(coupling, (0,), "X", "X"),),
        steps=(Step(((0,),), 1.0),),
    )


@pytest.fixture
def two_qubit_instance():
    return SimInstance(
        n_sys=2,
        n_bath=1,
        bath_h=(BathTerm(0.8, "Z"), BathTerm(0.3, "X")),
        sb_terms=(
            CouplingTerm(0.01, (0,), "X", "Z"),
            CouplingTerm(-0.02, (1,), "Y", "X"),
            CouplingTerm(0.005, (1, 0), "ZX", "Y"),
        ),
        steps=(
            Step(((0, 1),), 1.0, (Gate("CNOT", (0, 1)),)),
            Step(((0,), (1,)), 0.5, (Gate("H", (0,)), Gate("T", (1,)))),
            Step(((1,), (0,)), 1.0),
        ),
    )


@pytest.mark.parametrize("coupling", [1e-3, 1e-2, 1e-1])
def test_analytic_fault_operator(coupling):
    instance = single_term_instance(coupling)
    query = FaultQuery.of((0, 0))
    norm = spectral_norm(fault_operator(instance, query))
    assert norm == pytest.approx(2.0 * abs(np.sin(coupling / 2.0)), abs=1e-10)
    bound = instance_bound(instance)
    assert instance.m == 1
    assert bound.method == "corollary1"
    assert bound.alpha == pytest.approx(coupling)
    assert norm <= bound.epsilon


def test_masking_disables_touching_terms(two_qubit_instance):
    evolver = MaskedEvolver(two_qubit_instance)
    assert evolver.touching_terms([0]) == frozenset({0, 2})
    assert evolver.touching_terms([1]) == frozenset({1, 2})
    everything = [(0, 0), (1, 0), (1, 1), (2, 0), (2, 1)]
    bath_only = np.eye(two_qubit_instance.dimension, dtype=complex)
    for s in range(3):
        bath_only = evolver.bath_propagator(s) @ bath_only
    assert np.allclose(evolve_masked(two_qubit_instance, everything), bath_only)


def test_evolution_is_unitary(two_qubit_instance, rng):
    instances = [two_qubit_instance] + [random_instance(rng) for _ in range(5)]
    for instance in instances:
        for masked in ([], instance.locations()[:1], instance.locations()):
            u = evolve_masked(instance, masked)
            identity = np.eye(u.shape[0])
            assert spectral_norm(u.conj().T @ u - identity) <= UNITARITY_TOLERANCE


def split_steps(instance, parts):
    """Each step cut into equal substeps, gates kept on the first one"""
    steps = []
    for step in instance.steps:
        piece = replace(step, duration=step.duration / parts, gates=())
        steps.append(replace(piece, gates=step.gates))
        steps.extend([piece] * (parts - 1))
    return replace(instance, steps=tuple(steps))


@pytest.mark.parametrize("parts", [2, 3, 5])
def test_substeps_are_exact(two_qubit_instance, parts):
    split = split_steps(two_qubit_instance, parts)
    for s, i in [(0, 0), (1, 1), (2, 0)]:
        masked = [(s * parts + j, i) for j in range(parts)]
        whole = evolve_masked(two_qubit_instance, [(s, i)])
        pieces = evolve_masked(split, masked)
        assert spectral_norm(whole - pieces) <= 1e-12
    assert spectral_norm(
        evolve_masked(two_qubit_instance) - evolve_masked(split)
    ) <= 1e-12


def test_empty_query_is_full_evolution(two_qubit_instance):
    full = evolve_masked(two_qubit_instance)
    assert np.allclose(fault_operator(two_qubit_instance, FaultQuery.of()), full)


def test_inclusion_exclusion_single(two_qubit_instance):
    evolver = MaskedEvolver(two_qubit_instance)
    expected = evolver.evolve([]) - evolver.evolve([(1, 0)])
    assert np.allclose(
        fault_operator(two_qubit_instance, FaultQuery.of((1, 0)), evolver), expected
    )
    assert evolver.hits > 0


def test_zero_coupling_has_no_faults(two_qubit_instance):
    silent = two_qubit_instance.scaled(0.0)
    results = verify_instance(silent, max_r=3)
    assert len(results) == 5 + 10 + 10
    assert all(r.norm == pytest.approx(0.0, abs=1e-12) for r in results)
    assert not any(r.violation for r in results)


def test_permutation_consistency(two_qubit_instance):
    swapped = two_qubit_instance.relabeled([1, 0])
    for r in (1, 2, 3):
        for marked in itertools.combinations(two_qubit_instance.locations(), r):
            query = FaultQuery(frozenset(marked))
            a = spectral_norm(fault_operator(two_qubit_instance, query))
            b = spectral_norm(fault_operator(swapped, query))
            assert a == pytest.approx(b, abs=1e-12)


def test_main_bound_on_random_corpus(rng):
    epsilons = []
    for _ in range(50):
        scale = float(10 ** rng.uniform(-5.0, np.log10(5e-4)))
        instance = random_instance(rng, scale=scale)
        assert instance.dimension <= 256
        bound = instance_bound(instance)
        assert bound.epsilon is not None and bound.epsilon < 1.0
        epsilons.append(bound.epsilon)
        results = verify_instance(instance, max_r=3, bound=bound)
        assert results
        violations = [r for r in results if r.violation]
        assert violations == []
        for result in results:
            assert result.norm <= bound.epsilon**result.query.r
    assert max(epsilons) <= 0.5


def test_first_order_scaling(rng):
    scales = np.geomspace(1e-4, 1e-2, 5)
    for _ in range(5):
        instance = random_instance(rng, scale=1.0)
        for location in instance.locations():
            norms = [
                spectral_norm(
                    fault_operator(instance.scaled(s), FaultQuery.of(location))
                )
                for s in scales
            ]
            slope = np.polyfit(np.log(scales), np.log(norms), 1)[0]
            assert slope == pytest.approx(1.0, abs=0.05)


def test_first_order_term(two_qubit_instance):
    weak = two_qubit_instance.scaled(1e-2)
    for location in weak.locations():
        exact = fault_operator(weak, FaultQuery.of(location))
        linear = first_order_fault_operator(weak, location)
        assert spectral_norm(exact - linear) <= 1e-2 * spectral_norm(linear)


def test_second_order_remainder(rng):
    scales = np.geomspace(1e-4, 1e-2, 5)
    for _ in range(3):
        instance = random_instance(rng, scale=1.0)
        for location in instance.locations():
            remainders = []
            for s in scales:
                weak = instance.scaled(s)
                exact = fault_operator(weak, FaultQuery.of(location))
                linear = first_order_fault_operator(weak, location)
                remainders.append(spectral_norm(exact - linear))
            slope = np.polyfit(np.log(scales), np.log(remainders), 1)[0]
            assert slope == pytest.approx(2.0, abs=0.1)


def test_spectral_norm(rng):
    for n in (1, 3, 8):
        m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        assert spectral_norm(m) == pytest.approx(np.linalg.norm(m, 2), rel=1e-10)
    assert spectral_norm(np.zeros((4, 4))) == 0.0
    with pytest.raises(InputError):
        spectral_norm(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_hermitian_expm(rng):
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = a + a.conj().T
    assert np.allclose(hermitian_expm(h, 0.3), scipy.linalg.expm(-0.3j * h))


def test_instance_noise_model():
    instance = SimInstance(
        n_sys=2,
        n_bath=1,
        bath_h=(),
        sb_terms=(
            CouplingTerm(0.01, (0,), "X", "X"),
            CouplingTerm(0.02, (0,), "Z", "Z"),
            CouplingTerm(-0.003, (0, 1), "XY", "I"),
        ),
        steps=(Step(((0,), (1,)), 2.0),),
    )
    model = instance_noise_model(instance)
    # X(x)X and Z(x)Z commute, so the norm of their sum is 0.01 + 0.02
    assert model.coupling.table[(0,)] == pytest.approx(0.03)
    assert model.coupling.table[(0, 1)] == pytest.approx(0.003)
    assert model.t0 == 2.0
    profile = eta_profile(model)
    assert profile.tilde(1) == pytest.approx(0.06)


def test_coupling_term_sorted():
    term = CouplingTerm(0.1, (2, 0), "XZ", "I")
    assert term.qubits == (0, 2)
    assert term.system == "ZX"
    with pytest.raises(InputError):
        CouplingTerm(0.1, (0, 0), "XX", "I")
    with pytest.raises(InputError):
        CouplingTerm(0.1, (0, 1), "X", "I")


def test_instance_validation():
    with pytest.raises(ResourceError):
        SimInstance(7, 1, (), (), ()).validate()
    with pytest.raises(ResourceError):
        SimInstance(3, 5, (), (), ()).validate()
    overlapping = SimInstance(2, 1, (), (), (Step(((0, 1), (1,))),))
    with pytest.raises(InputError):
        overlapping.validate()
    bad_bath = SimInstance(1, 1, (BathTerm(1.0, "XX"),), (), (Step(((0,),)),))
    with pytest.raises(InputError):
        bad_bath.validate()
    bad_gate = SimInstance(2, 0, (), (), (Step(((0,),), 1.0, (Gate("CNOT", (0,)),)),))
    with pytest.raises(InputError):
        bad_gate.validate()


def test_query_cap():
    instance = single_term_instance(0.01)
    with pytest.raises(ResourceError):
        verify_instance(instance, max_r=13)
    with pytest.raises(ResourceError):
        fault_operator(instance, FaultQuery.of(*[(0, i) for i in range(13)]), r_cap=12)


def test_inconclusive_when_epsilon_large():
    results = verify_instance(single_term_instance(0.3), max_r=1)
    assert len(results) == 1
    assert not results[0].conclusive
    assert not results[0].violation


def test_verify_bound_verdict():
    bound = instance_bound(single_term_instance(1e-4))
    assert bound.verdict == Verdict.NOT_SCALABLE
    expected = 2e-4 * np.exp((np.e - 1.0) / 2.0 / (1.0 - 2e-4))
    assert bound.epsilon == pytest.approx(expected, rel=1e-12)
    assert instance_bound(single_term_instance(1e-6)).verdict == Verdict.SCALABLE
