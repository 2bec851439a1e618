"""Dense operators from Pauli strings and named gates

Qubit 0 is the most significant tensor factor throughout.
"""

from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from ftnoise.errors import InputError

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_SQRT_HALF = 1.0 / np.sqrt(2.0)

GATES = {
    "I": PAULI["I"],
    "X": PAULI["X"],
    "Y": PAULI["Y"],
    "Z": PAULI["Z"],
    "H": _SQRT_HALF * np.array([[1, 1], [1, -1]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


def check_pauli_string(paulis: str, length: int) -> str:
    """Normalises a Pauli string to upper case and checks its length

    Raises:
      InputError for characters outside IXYZ or a length mismatch
    """
    paulis = str(paulis).upper()
    bad = [c for c in paulis if c not in PAULI]
    if bad:
        raise InputError(f"'{paulis}' is not a Pauli string (bad character '{bad[0]}')")
    if len(paulis) != length:
        raise InputError(f"Pauli string '{paulis}' should have length {length}")
    return paulis


def pauli_operator(n_qubits: int, placements: Mapping[int, str]) -> np.ndarray:
    """The tensor product with placements[q] on qubit q and I elsewhere"""
    factors = [PAULI[placements.get(q, "I")] for q in range(n_qubits)]
    return reduce(np.kron, factors, np.eye(1, dtype=complex))


def embed(n_qubits: int, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Lifts a gate on len(qubits) qubits to the full register; the gate's
    first tensor factor acts on qubits[0]"""
    k = len(qubits)
    if matrix.shape != (2**k, 2**k):
        raise InputError(f"A {matrix.shape} matrix can't act on {k} qubits")
    dim = 2**n_qubits
    identity = np.eye(dim, dtype=complex).reshape([2] * n_qubits + [dim])
    gate = matrix.reshape([2] * (2 * k))
    out = np.tensordot(gate, identity, axes=(list(range(k, 2 * k)), list(qubits)))
    out = np.moveaxis(out, list(range(k)), list(qubits))
    return out.reshape(dim, dim)


def gate_operator(n_qubits: int, name: str, qubits: Sequence[int]) -> np.ndarray:
    name = str(name).upper()
    if name not in GATES:
        raise InputError(f"Unknown gate '{name}', expected one of {sorted(GATES)}")
    return embed(n_qubits, GATES[name], qubits)
