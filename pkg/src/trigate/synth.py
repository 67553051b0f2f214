"""Parameterized two-qubit-gate circuits and optimization over them.

Each template slot carries a full 16-real-parameter Hermitian generator in
the two-qubit Pauli-product basis (global phase included; it is harmless
under the phase-invariant cost).  Gate counting is by slots only: one-qubit
factors fold into a neighboring slot's generator, so they are free.  The
optimizer is deterministic multi-start finite-difference gradient descent,
making experiment outputs reproducible bit for bit from the seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .descent import DescentResult, descend
from .gates import (
    PAIR_QUBITS,
    Pair,
    cnot,
    controlled,
    embed_pair,
    hadamard,
    identity,
    pair_image,
    pair_index_map,
    toffoli,
    v_abc,
)
from .linalg import distance_up_to_phase, require_unitary
from .templates import CircuitTemplate, TemplateClass, class_of, enumerate_templates

_P1 = [np.eye(2, dtype=complex),
       np.array([[0, 1], [1, 0]], dtype=complex),
       np.array([[0, -1j], [1j, 0]], dtype=complex),
       np.array([[1, 0], [0, -1]], dtype=complex)]
# index 4j + k is sigma_j ⊗ sigma_k over (I, X, Y, Z)
PAULI_PRODUCTS = np.stack([np.kron(a, b) for a in _P1 for b in _P1])
PARAMS_PER_SLOT = 16

_EYE2 = np.eye(2, dtype=complex)
_INDEX_MAPS = {p: pair_index_map(p) for p in Pair}


def generator_matrix(coeffs) -> np.ndarray:
    """Hermitian generator from 16 Pauli-product coefficients."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (PARAMS_PER_SLOT,):
        raise ValueError(f"expected {PARAMS_PER_SLOT} coefficients, got shape {c.shape}")
    return np.einsum("k,kij->ij", c, PAULI_PRODUCTS)


def gate_from_generator(coeffs) -> np.ndarray:
    """exp(i H) for the Hermitian generator H, via eigendecomposition."""
    evals, evecs = np.linalg.eigh(generator_matrix(coeffs))
    return (evecs * np.exp(1j * evals)[None, :]) @ evecs.conj().T


def generator_from_gate(g) -> np.ndarray:
    """Pauli-product coefficients of -i log(g) for a 4x4 unitary."""
    g = require_unitary(g, name="gate")
    if g.shape != (4, 4):
        raise ValueError("generator_from_gate takes a 4x4 unitary")
    h = scipy.linalg.logm(g) / 1j
    h = (h + h.conj().T) / 2.0
    return np.real(np.einsum("kij,ji->k", PAULI_PRODUCTS, h)) / 4.0


def _batched_gates(coeff_rows: np.ndarray) -> np.ndarray:
    """exp(i H) for a stack of coefficient rows, shape (m, 16) -> (m, 4, 4)."""
    h = np.einsum("sk,kij->sij", coeff_rows, PAULI_PRODUCTS)
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(1j * evals)[:, None, :]) @ np.conj(np.swapaxes(evecs, -1, -2))


def _embed(g: np.ndarray, idx: np.ndarray) -> np.ndarray:
    out = np.zeros((8, 8), dtype=complex)
    out[idx[:, None, :, None], idx[None, :, None, :]] = g[:, :, None, None] * _EYE2
    return out


class ParamCircuit:
    """A template with one 16-parameter generator per slot."""

    def __init__(self, template: CircuitTemplate, params):
        p = np.asarray(params, dtype=float).reshape(len(template), PARAMS_PER_SLOT).copy()
        p.setflags(write=False)
        self.template = template
        self.params = p
        self._built: Optional[np.ndarray] = None

    @classmethod
    def zero(cls, template: CircuitTemplate) -> "ParamCircuit":
        return cls(template, np.zeros((len(template), PARAMS_PER_SLOT)))

    @property
    def built_unitary(self) -> np.ndarray:
        if self._built is None:
            gates = _batched_gates(self.params)
            u = np.eye(8, dtype=complex)
            for slot, gate in zip(self.template, gates):
                u = _embed(gate, _INDEX_MAPS[slot]) @ u
            u.setflags(write=False)
            self._built = u
        return self._built


def build_unitary(pc: ParamCircuit) -> np.ndarray:
    """The circuit's 8x8 unitary; slot 0 is applied first."""
    return pc.built_unitary


def cost(pc: ParamCircuit, target) -> float:
    """Phase-invariant distance of the built circuit to the target gate."""
    return distance_up_to_phase(pc.built_unitary, target)


def relabel(pc: ParamCircuit, perm) -> ParamCircuit:
    """Apply a qubit permutation to slots and generators alike.

    The built unitary of the result is P U P†: when a pair's ordered qubits
    flip orientation under the permutation, the generator coefficients are
    transposed in their (4, 4) Pauli grid.
    """
    new_slots = []
    new_params = []
    for slot, coeffs in zip(pc.template, pc.params):
        image = pair_image(perm, slot)
        q0, q1 = PAIR_QUBITS[slot]
        oriented = (perm[q0], perm[q1]) == PAIR_QUBITS[image]
        c = coeffs if oriented else coeffs.reshape(4, 4).T.ravel()
        new_slots.append(image)
        new_params.append(c)
    return ParamCircuit(CircuitTemplate(tuple(new_slots)), np.array(new_params))


def adjoint(pc: ParamCircuit) -> ParamCircuit:
    """Reversed slot order with negated generators; builds the inverse unitary."""
    return ParamCircuit(CircuitTemplate(pc.template.slots[::-1]), -pc.params[::-1])


@dataclass(frozen=True)
class SynthesisConfig:
    restarts: int = 20
    seed: int = 0
    max_iters: int = 2000
    step_size: float = 1.0
    grad_epsilon: float = 1e-6
    success_tol: float = 1e-6
    target: Optional[str] = None  # name or file, echoed into manifests

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")
        if self.success_tol <= 0:
            raise ValueError("success_tol must be positive")
        if not 0 < self.grad_epsilon <= 1e-3:
            raise ValueError("grad_epsilon must be in (0, 1e-3]")
        if self.max_iters < 1 or self.step_size <= 0:
            raise ValueError("max_iters and step_size must be positive")


@dataclass(frozen=True)
class RestartRecord:
    seed: tuple[int, int]
    final_cost: float
    iterations: int


@dataclass(frozen=True)
class SynthesisResult:
    template_class: TemplateClass
    best_cost: float
    best_params: np.ndarray
    per_restart: tuple[RestartRecord, ...]
    converged: bool
    traces: tuple[np.ndarray, ...]

    def summary(self) -> dict:
        """JSON-ready summary; deterministic for a fixed config."""
        return {
            "template": str(self.template_class.canonical),
            "orbitSize": self.template_class.orbit_size,
            "bestCost": self.best_cost,
            "converged": self.converged,
            "bestParams": [float(x) for x in self.best_params.ravel()],
            "perRestart": [
                {"seed": list(r.seed), "finalCost": r.final_cost, "iterations": r.iterations}
                for r in self.per_restart
            ],
        }


def _cost_closures(template: CircuitTemplate, target: np.ndarray, grad_eps: float):
    """Cost and central-difference gradient over the flat parameter vector.

    The gradient exploits that parameter j only perturbs its own slot: with
    prefix/suffix products cached, tr(T†U) restricted to slot s reduces to
    tr(g N_s) where N_s traces the spectator qubit out of B_s T† A_s, so each
    slot needs one batched 32-way eigendecomposition per gradient.
    """
    slots = list(template)
    n = len(slots)
    maps = [_INDEX_MAPS[s] for s in slots]
    tdag = target.conj().T
    dim = target.shape[0]

    def slot_gates(x: np.ndarray) -> np.ndarray:
        return _batched_gates(x.reshape(n, PARAMS_PER_SLOT))

    def build(x: np.ndarray) -> np.ndarray:
        u = np.eye(8, dtype=complex)
        for gate, idx in zip(slot_gates(x), maps):
            u = _embed(gate, idx) @ u
        return u

    def f(x: np.ndarray) -> float:
        return max(0.0, 1.0 - abs(np.trace(tdag @ build(x))) / dim)

    def grad(x: np.ndarray) -> np.ndarray:
        rows = x.reshape(n, PARAMS_PER_SLOT)
        embedded = [_embed(g, idx) for g, idx in zip(slot_gates(x), maps)]
        suffix = [np.eye(8, dtype=complex)]  # B_s = E_{s-1} ... E_0
        for e in embedded[:-1]:
            suffix.append(e @ suffix[-1])
        prefix = [np.eye(8, dtype=complex)] * n  # A_s = E_{n-1} ... E_{s+1}
        for s in range(n - 2, -1, -1):
            prefix[s] = prefix[s + 1] @ embedded[s + 1]

        out = np.empty(n * PARAMS_PER_SLOT)
        for s in range(n):
            m = suffix[s] @ tdag @ prefix[s]
            idx = maps[s]
            nmat = (m[np.ix_(idx[:, 0], idx[:, 0])]
                    + m[np.ix_(idx[:, 1], idx[:, 1])])
            h = np.einsum("k,kij->ij", rows[s], PAULI_PRODUCTS)
            perturbed = np.concatenate([h[None] + grad_eps * PAULI_PRODUCTS,
                                        h[None] - grad_eps * PAULI_PRODUCTS])
            evals, evecs = np.linalg.eigh(perturbed)
            gates = (evecs * np.exp(1j * evals)[:, None, :]) @ np.conj(np.swapaxes(evecs, -1, -2))
            traces = np.einsum("kxz,zx->k", gates, nmat)
            costs = 1.0 - np.abs(traces) / dim
            out[s * PARAMS_PER_SLOT:(s + 1) * PARAMS_PER_SLOT] = \
                (costs[:PARAMS_PER_SLOT] - costs[PARAMS_PER_SLOT:]) / (2.0 * grad_eps)
        return out

    return f, grad


def optimize(template: CircuitTemplate, target, cfg: SynthesisConfig) -> SynthesisResult:
    """Multi-start minimization of the circuit-to-target distance.

    Restart r draws its starting parameters uniformly from [-pi, pi] out of a
    stream seeded by (cfg.seed, r).  Each restart runs gradient descent with
    central finite differences and Armijo backtracking until max_iters, cost
    <= success_tol / 10, or a vanishing gradient.  Results are aggregated in
    restart order, so the output is deterministic for a fixed config.
    """
    target = require_unitary(target, name="target")
    if target.shape != (8, 8):
        raise ValueError("synthesis targets are 8x8 three-qubit gates")
    n_params = len(template) * PARAMS_PER_SLOT
    f, grad = _cost_closures(template, target, cfg.grad_epsilon)

    records: list[RestartRecord] = []
    traces: list[np.ndarray] = []
    best: tuple[float, int, np.ndarray] | None = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        x0 = rng.uniform(-np.pi, np.pi, n_params)
        res: DescentResult = descend(
            f, x0, step0=cfg.step_size, grad_eps=cfg.grad_epsilon,
            max_iters=cfg.max_iters, target_value=cfg.success_tol / 10.0,
            gradient=grad)
        records.append(RestartRecord(seed=(cfg.seed, r), final_cost=res.value,
                                     iterations=res.iterations))
        traces.append(res.trace)
        if best is None or res.value < best[0]:
            best = (res.value, r, res.x)

    assert best is not None
    best_cost, _, best_x = best
    return SynthesisResult(
        template_class=class_of(template),
        best_cost=best_cost,
        best_params=best_x.reshape(len(template), PARAMS_PER_SLOT),
        per_restart=tuple(records),
        converged=best_cost <= cfg.success_tol,
        traces=tuple(traces),
    )


@dataclass(frozen=True)
class SearchRow:
    length: int
    template_class: TemplateClass
    best_cost: float
    converged: bool


@dataclass(frozen=True)
class MinGateSearch:
    rows: tuple[SearchRow, ...]
    best_length: Optional[int]  # smallest length whose best class converged


def min_gate_search(target, max_length: int, cfg: SynthesisConfig) -> MinGateSearch:
    """Optimize every canonical class at every length up to max_length."""
    if not 1 <= max_length <= 6:
        raise ValueError("max_length must be in 1..6")
    rows: list[SearchRow] = []
    best_length: Optional[int] = None
    for length in range(1, max_length + 1):
        for cls in enumerate_templates(length):
            result = optimize(cls.canonical, target, cfg)
            rows.append(SearchRow(length=length, template_class=cls,
                                  best_cost=result.best_cost,
                                  converged=result.converged))
            if result.converged and best_length is None:
                best_length = length
    return MinGateSearch(rows=tuple(rows), best_length=best_length)


# --- known decompositions used as verification oracles -----------------------


def _sqrt_x() -> np.ndarray:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    return (np.eye(2) + x) / 2.0 + 1j * (np.eye(2) - x) / 2.0


def five_gate_toffoli_layers() -> list[tuple[str, Pair, np.ndarray]]:
    """The controlled-sqrt(X) construction, in temporal order."""
    v = _sqrt_x()
    vdg = v.conj().T
    return [
        ("controlled-sqrtX", Pair.BC, controlled(v)),
        ("cnot", Pair.AB, cnot()),
        ("controlled-sqrtX-dagger", Pair.BC, controlled(vdg)),
        ("cnot", Pair.AB, cnot()),
        ("controlled-sqrtX", Pair.AC, controlled(v)),
    ]


def six_cnot_toffoli_layers() -> list[tuple[str, np.ndarray]]:
    """A standard six-CNOT Toffoli circuit with free one-qubit gates."""
    h = hadamard()
    t = np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(complex)
    tdg = t.conj().T
    eye2 = np.eye(2, dtype=complex)

    def on_a(g):
        return np.kron(g, np.eye(4, dtype=complex))

    def on_b(g):
        return np.kron(eye2, np.kron(g, eye2))

    def on_c(g):
        return np.kron(np.eye(4, dtype=complex), g)

    return [
        ("H on C", on_c(h)),
        ("cnot B->C", embed_pair(Pair.BC, cnot())),
        ("T† on C", on_c(tdg)),
        ("cnot A->C", embed_pair(Pair.AC, cnot())),
        ("T on C", on_c(t)),
        ("cnot B->C", embed_pair(Pair.BC, cnot())),
        ("T† on C", on_c(tdg)),
        ("cnot A->C", embed_pair(Pair.AC, cnot())),
        ("T on B", on_b(t)),
        ("T on C", on_c(t)),
        ("H on C", on_c(h)),
        ("cnot A->B", embed_pair(Pair.AB, cnot())),
        ("T on A", on_a(t)),
        ("T† on B", on_b(tdg)),
        ("cnot A->B", embed_pair(Pair.AB, cnot())),
    ]


def product_of_layers(layers_8x8: list[np.ndarray]) -> np.ndarray:
    """Multiply temporally ordered 8x8 layers (first layer applied first)."""
    u = np.eye(8, dtype=complex)
    for layer in layers_8x8:
        u = layer @ u
    return u


def five_gate_witness_circuit() -> ParamCircuit:
    """The five-gate construction as a parameterized circuit that builds toffoli."""
    layers = five_gate_toffoli_layers()
    template = CircuitTemplate(tuple(pair for _, pair, _ in layers))
    params = np.array([generator_from_gate(g) for _, _, g in layers])
    return ParamCircuit(template, params)


@dataclass(frozen=True)
class CheckResult:
    name: str
    residual: float
    tolerance: float
    passed: bool
    gates: tuple[str, ...] = ()


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_known_decompositions(tol: float = 1e-10) -> VerificationReport:
    """Multiply out the known Toffoli circuits and check them against toffoli().

    Covers the five-two-qubit-gate construction, a six-CNOT construction, and
    a deliberately corrupted five-gate circuit as a negative control.
    """
    target = toffoli()
    checks = []

    five = five_gate_toffoli_layers()
    u5 = product_of_layers([embed_pair(p, g) for _, p, g in five])
    r5 = distance_up_to_phase(u5, target)
    checks.append(CheckResult(
        name="five-two-qubit-gate construction", residual=r5, tolerance=tol,
        passed=r5 <= tol, gates=tuple(f"{name} on {pair}" for name, pair, _ in five)))

    six = six_cnot_toffoli_layers()
    u6 = product_of_layers([m for _, m in six])
    r6 = distance_up_to_phase(u6, target)
    checks.append(CheckResult(
        name="six-CNOT construction", residual=r6, tolerance=tol,
        passed=r6 <= tol, gates=tuple(name for name, _ in six)))

    h_conj = np.kron(identity(4), hadamard())
    rh = distance_up_to_phase(h_conj @ target @ h_conj, v_abc())
    checks.append(CheckResult(
        name="Hadamard conjugation maps toffoli to v_abc", residual=rh,
        tolerance=tol, passed=rh <= tol))

    # negative control: wrong final gate must stay far from the target
    broken = list(five)
    broken[-1] = ("controlled-sqrtX-dagger", Pair.AC, controlled(_sqrt_x().conj().T))
    ub = product_of_layers([embed_pair(p, g) for _, p, g in broken])
    rb = distance_up_to_phase(ub, target)
    checks.append(CheckResult(
        name="negative control: inverted final gate stays distant", residual=rb,
        tolerance=0.1, passed=rb > 0.1,
        gates=tuple(f"{name} on {pair}" for name, pair, _ in broken)))

    return VerificationReport(checks=tuple(checks))
