"""Dense complex linear algebra kernels for two- and three-qubit operators.

Everything works on plain numpy arrays at dimensions 2, 4 and 8.  All routines
are pure functions of their inputs and never mutate them, so they are safe to
call from concurrent tasks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

# Default tolerances: unitarity and reconstruction checks get the tight one,
# rank and eigenvalue-multiset decisions the looser one.  Both are overridable
# per call.
UNITARY_ATOL = 1e-10
DECISION_ATOL = 1e-8


def as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be a square 2-d array, got shape {a.shape}")
    return a


def unitarity_defect(u) -> float:
    """Frobenius norm of U†U - I."""
    a = as_square_matrix(u)
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))


def is_unitary(u, tol: float = UNITARY_ATOL) -> bool:
    return unitarity_defect(u) <= tol


def require_unitary(u, tol: float = UNITARY_ATOL, name: str = "matrix") -> np.ndarray:
    a = as_square_matrix(u, name)
    defect = float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))
    if defect > tol:
        raise ValueError(f"{name} is not unitary: ||U†U - I|| = {defect:.3e} > {tol:.1e}")
    return a


def tensor(a, b) -> np.ndarray:
    """Kronecker product with the left factor as the most significant index block."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _check_dims(total: int, dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims) or math.prod(dims) != total:
        raise ValueError(f"factor dimensions {dims} do not multiply to {total}")
    return dims


def partial_trace(m, keep, dims) -> np.ndarray:
    """Reduce an operator on a tensor product to the kept factors.

    `keep` is a factor index or an increasing sequence of factor indices;
    `dims` lists the dimension of every factor, most significant first.
    """
    a = as_square_matrix(m)
    dims = _check_dims(a.shape[0], dims)
    n = len(dims)
    if isinstance(keep, (int, np.integer)):
        keep = (int(keep),)
    keep = tuple(int(k) for k in keep)
    if not keep or any(k < 0 or k >= n for k in keep) or list(keep) != sorted(set(keep)):
        raise ValueError(f"keep={keep} is not an increasing subset of range({n})")

    t = a.reshape(dims + dims)
    row = [chr(ord("a") + i) for i in range(n)]
    col = [row[i].upper() if i in keep else row[i] for i in range(n)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    reduced = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    d_keep = math.prod(dims[i] for i in keep)
    return reduced.reshape(d_keep, d_keep)


def permute_factors(u, perm, dims) -> np.ndarray:
    """Relabel tensor factors so that output factor j is input factor perm[j]."""
    a = as_square_matrix(u)
    dims = _check_dims(a.shape[0], dims)
    n = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm={perm} is not a permutation of range({n})")
    axes = list(perm) + [n + p for p in perm]
    return a.reshape(dims + dims).transpose(axes).reshape(a.shape)


def eigenvalues_unitary(u, tol: float = UNITARY_ATOL) -> np.ndarray:
    """Eigenvalues of a unitary, with multiplicity, sorted by phase angle."""
    a = require_unitary(u, tol)
    vals = np.linalg.eigvals(a)
    off_circle = float(np.max(np.abs(np.abs(vals) - 1.0)))
    if off_circle > DECISION_ATOL:
        raise ValueError(f"eigenvalues stray {off_circle:.3e} from the unit circle")
    order = np.lexsort((vals.imag, vals.real, np.angle(vals)))
    return vals[order]


def multiset_match_distance(a, b) -> tuple[float, tuple[int, ...]]:
    """Best pairing of two equal-size complex multisets.

    Uses an optimal (sum-minimizing) assignment on pairwise chordal distances
    and returns the largest matched distance together with the pairing, where
    pairing[i] is the index in `b` matched to a[i].
    """
    av = np.asarray(a, dtype=complex).ravel()
    bv = np.asarray(b, dtype=complex).ravel()
    if av.shape != bv.shape:
        raise ValueError(f"multiset sizes differ: {av.size} vs {bv.size}")
    dist = np.abs(av[:, None] - bv[None, :])
    rows, cols = linear_sum_assignment(dist)
    pairing = tuple(int(c) for c in cols[np.argsort(rows)])
    return float(dist[rows, cols].max()), pairing


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Bipartite decomposition v = sum_i c_i |l_i> ⊗ |r_i| with descending c_i."""

    coefficients: np.ndarray
    left: np.ndarray   # column i is the i-th left vector
    right: np.ndarray  # column i is the i-th right vector

    def __post_init__(self):
        for arr in (self.coefficients, self.left, self.right):
            arr.setflags(write=False)

    def rank(self, tol: float = DECISION_ATOL) -> int:
        return int(np.sum(self.coefficients > tol))

    def reconstruct(self) -> np.ndarray:
        terms = [
            c * np.kron(self.left[:, i], self.right[:, i])
            for i, c in enumerate(self.coefficients)
        ]
        return np.sum(terms, axis=0)


def schmidt_vector(v, dims) -> SchmidtDecomposition:
    """Schmidt decomposition of a normalized bipartite state vector."""
    vec = np.asarray(v, dtype=complex).ravel()
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > UNITARY_ATOL:
        raise ValueError(f"state is not normalized: ||v|| = {norm}")
    dims = _check_dims(vec.size, dims)
    if len(dims) != 2:
        raise ValueError("schmidt_vector needs exactly two factor dimensions")
    m = vec.reshape(dims)
    left, coeffs, right_h = np.linalg.svd(m, full_matrices=False)
    return SchmidtDecomposition(coefficients=coeffs, left=left, right=right_h.T)


def operator_schmidt_values(u, dims) -> np.ndarray:
    """Descending singular values of the operator reshuffled across a bipartition."""
    a = as_square_matrix(u)
    dims = _check_dims(a.shape[0], dims)
    if len(dims) != 2:
        raise ValueError("operator Schmidt values need exactly two factor dimensions")
    d0, d1 = dims
    reshuffled = a.reshape(d0, d1, d0, d1).transpose(0, 2, 1, 3).reshape(d0 * d0, d1 * d1)
    return np.linalg.svd(reshuffled, compute_uv=False)


def operator_schmidt_rank(u, dims, tol: float = DECISION_ATOL) -> int:
    """Number of product terms across the bipartition; 1 iff u = A ⊗ B."""
    s = operator_schmidt_values(u, dims)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def distance_up_to_phase(u, w) -> float:
    """Phase-invariant gate distance C(u, w) = 1 - |tr(u†w)| / d, in [0, 1]."""
    a = require_unitary(u, name="u")
    b = require_unitary(w, name="w")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a.shape[0]
    return float(max(0.0, 1.0 - abs(np.trace(a.conj().T @ b)) / d))


def determinant(m) -> complex:
    return complex(np.linalg.det(as_square_matrix(m)))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))[None, :]


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state vector."""
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)
