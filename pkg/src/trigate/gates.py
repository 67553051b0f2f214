"""Gate constructors, pair embeddings and qubit permutations on three qubits.

Index convention: qubit A is the most significant factor, so the basis state
|abc> sits at index 4a + 2b + c.  Gates are built exactly from entries
0, ±1, 1/sqrt(2) and e^{i theta} rather than via matrix exponentials.
"""

from __future__ import annotations

import itertools
import warnings
from enum import Enum

import numpy as np

from .linalg import require_unitary

QUBIT_NAMES = "ABC"


class Pair(Enum):
    """The qubit pair a two-qubit gate acts on, ordered AB < BC < AC."""

    AB = "AB"
    BC = "BC"
    AC = "AC"

    def __str__(self) -> str:
        return self.value


PAIR_ORDER = {Pair.AB: 0, Pair.BC: 1, Pair.AC: 2}
PAIR_QUBITS = {Pair.AB: (0, 1), Pair.BC: (1, 2), Pair.AC: (0, 2)}
_PAIR_BY_QUBITS = {frozenset(q): p for p, q in PAIR_QUBITS.items()}


def pair_index_map(pair: Pair) -> np.ndarray:
    """Map (pair subindex x, spectator bit y) -> full 8-dim basis index.

    x = 2*(first pair qubit) + (second pair qubit) keeps the pair's own
    most-significant-first ordering; for AC this interleaves around B.
    """
    q0, q1 = PAIR_QUBITS[pair]
    spect = 3 - q0 - q1
    idx = np.empty((4, 2), dtype=np.intp)
    for x in range(4):
        for y in range(2):
            bits = [0, 0, 0]
            bits[q0], bits[q1], bits[spect] = x >> 1, x & 1, y
            idx[x, y] = 4 * bits[0] + 2 * bits[1] + bits[2]
    return idx


_EYE2 = np.eye(2, dtype=complex)
_INDEX_MAPS = {p: pair_index_map(p) for p in Pair}


def identity(dim: int = 8) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def toffoli() -> np.ndarray:
    """Permutation matrix fixing |000>..|101> and swapping |110> <-> |111>."""
    m = np.eye(8, dtype=complex)
    m[6, 6] = m[7, 7] = 0.0
    m[6, 7] = m[7, 6] = 1.0
    return m


def v_abc() -> np.ndarray:
    """diag(1, 1, 1, 1, 1, 1, 1, -1): flips the sign of |111> only."""
    m = np.eye(8, dtype=complex)
    m[7, 7] = -1.0
    return m


def deutsch(theta: float) -> np.ndarray:
    """Diagonal three-qubit controlled phase: |111> picks up e^{i theta}."""
    if abs(np.exp(1j * theta) - 1.0) < 1e-12:
        warnings.warn("deutsch(theta) with theta = 0 mod 2*pi is the identity",
                      stacklevel=2)
    m = np.eye(8, dtype=complex)
    m[7, 7] = np.exp(1j * theta)
    return m


def hadamard() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def pauli_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=complex)


def pauli_y() -> np.ndarray:
    return np.array([[0, -1j], [1j, 0]], dtype=complex)


def pauli_z() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=complex)


def one_qubit(name: str) -> np.ndarray:
    """Look up H, X or Z by letter."""
    try:
        return {"h": hadamard, "x": pauli_x, "z": pauli_z}[name.lower()]()
    except KeyError:
        raise ValueError(f"unknown one-qubit gate {name!r}; expected H, X or Z") from None


def cnot() -> np.ndarray:
    """CNOT with control on the first (most significant) qubit."""
    m = np.eye(4, dtype=complex)
    m[2, 2] = m[3, 3] = 0.0
    m[2, 3] = m[3, 2] = 1.0
    return m


def swap_gate() -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = m[1, 2] = m[2, 1] = 1.0
    return m


def controlled(v) -> np.ndarray:
    """|0><0| ⊗ I + |1><1| ⊗ v with control on the first qubit."""
    v = require_unitary(v, name="controlled block")
    if v.shape != (2, 2):
        raise ValueError("controlled() takes a 2x2 block")
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = v
    return out


def _embed_with_map(g: np.ndarray, idx: np.ndarray) -> np.ndarray:
    out = np.zeros((8, 8), dtype=complex)
    out[idx[:, None, :, None], idx[None, :, None, :]] = g[:, :, None, None] * _EYE2
    return out


def embed_pair(pair: Pair, g) -> np.ndarray:
    """Embed a 4x4 unitary as an 8x8 gate acting on the named pair.

    Implemented by index arithmetic rather than swap conjugation, so the AC
    embedding interleaves bits directly.
    """
    g = require_unitary(g, name="pair gate")
    if g.shape != (4, 4):
        raise ValueError(f"pair gate must be 4x4, got {g.shape}")
    return _embed_with_map(g, _INDEX_MAPS[Pair(pair)])


# --- qubit permutations -----------------------------------------------------

PERMUTATIONS: tuple[tuple[int, int, int], ...] = tuple(itertools.permutations(range(3)))
IDENTITY_PERM = (0, 1, 2)


def compose_perm(p, q) -> tuple[int, ...]:
    """Composition p∘q: apply q first, then p."""
    return tuple(p[q[i]] for i in range(len(q)))


def invert_perm(p) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def permutation_matrix(p) -> np.ndarray:
    """Basis permutation P with P|x_A x_B x_C> = |y>, where y[p[q]] = x[q]."""
    p = tuple(int(i) for i in p)
    if sorted(p) != [0, 1, 2]:
        raise ValueError(f"{p} is not a permutation of three qubits")
    mat = np.zeros((8, 8), dtype=complex)
    for i in range(8):
        bits = (i >> 2 & 1, i >> 1 & 1, i & 1)
        out = [0, 0, 0]
        for q in range(3):
            out[p[q]] = bits[q]
        mat[4 * out[0] + 2 * out[1] + out[2], i] = 1.0
    return mat


def permute_qubits(u, p) -> np.ndarray:
    """Conjugate an 8x8 operator by the basis permutation induced by p."""
    a = np.asarray(u, dtype=complex)
    if a.shape != (8, 8):
        raise ValueError(f"permute_qubits needs an 8x8 matrix, got {a.shape}")
    mat = permutation_matrix(p)
    return mat @ a @ mat.T


def pair_image(p, pair: Pair) -> Pair:
    """Image of a pair label under a qubit permutation."""
    q0, q1 = PAIR_QUBITS[Pair(pair)]
    return _PAIR_BY_QUBITS[frozenset((p[q0], p[q1]))]


# --- named-gate registry ----------------------------------------------------

_FIXED_GATES = {
    "toffoli": toffoli,
    "v_abc": v_abc,
    "h": hadamard,
    "x": pauli_x,
    "z": pauli_z,
    "cnot": cnot,
    "swap": swap_gate,
}


def named_gate(name: str) -> np.ndarray:
    """Resolve a gate name like "toffoli", "deutsch:1.5708" or "cnot-on-AB"."""
    key = name.strip().lower()
    if key in _FIXED_GATES:
        return _FIXED_GATES[key]()
    if key.startswith("deutsch:"):
        return deutsch(float(key.split(":", 1)[1]))
    if key.startswith("identity:"):
        dim = int(key.split(":", 1)[1])
        if dim not in (2, 4, 8):
            raise ValueError(f"identity dimension must be 2, 4 or 8, got {dim}")
        return identity(dim)
    if "-on-" in key:
        base, _, pair_name = key.partition("-on-")
        if base in ("cnot", "swap"):
            try:
                pair = Pair(pair_name.upper())
            except ValueError:
                raise ValueError(f"unknown pair {pair_name!r} in gate name {name!r}") from None
            return embed_pair(pair, _FIXED_GATES[base]())
    raise ValueError(f"unknown gate name {name!r}")
