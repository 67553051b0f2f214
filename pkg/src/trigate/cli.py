"""Command line interface: analyze, verify, templates, synthesize, search.

Exit codes: 0 success, 1 verification failure, 2 invalid gate input,
3 malformed argument or file, 4 I/O failure.  All configuration comes from
the command line (no environment variables) so manifests are complete.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import formats, structure, synth
from .gates import QUBIT_NAMES, named_gate, toffoli
from .linalg import (
    distance_up_to_phase,
    eigenvalues_unitary,
    operator_schmidt_rank,
    permute_factors,
    unitarity_defect,
)
from .templates import MAX_TEMPLATE_LENGTH, canonicalize, enumerate_templates, parse_template

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_GATE = 2
EXIT_BAD_ARG = 3
EXIT_IO = 4


class _Parser(argparse.ArgumentParser):
    """argparse with the malformed-argument exit code of this tool."""

    def error(self, message):
        self.exit(EXIT_BAD_ARG, f"{self.prog}: error: {message}\n")


def _fail(code: int, message: str) -> int:
    print(message, file=sys.stderr)
    return code


def _resolve_gate(spec: str):
    """Resolve a registry name first, then fall back to a matrix file.

    Returns (matrix, input-hash) or raises FormatError / ValueError.
    """
    try:
        gate = named_gate(spec)
        return gate, formats.sha256_text(spec)
    except ValueError:
        pass
    if not os.path.exists(spec):
        raise formats.FormatError(f"{spec!r} is neither a known gate name nor a file")
    return formats.read_matrix(spec), formats.sha256_file(spec)


def _emit(text: str, out_path) -> int:
    if out_path is None:
        print(text)
        return EXIT_OK
    try:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {out_path}: {exc}")
    return EXIT_OK


# --- analyze -----------------------------------------------------------------

def _bipartitions(n_qubits: int):
    """(label, qubit-to-front permutation) for each 1-vs-rest bipartition."""
    if n_qubits == 2:
        return [("q0|q1", (0, 1))]
    out = []
    for q in range(3):
        rest = [r for r in range(3) if r != q]
        label = f"{QUBIT_NAMES[q]}|{''.join(QUBIT_NAMES[r] for r in rest)}"
        out.append((label, (q, *rest)))
    return out


def cmd_analyze(args) -> int:
    try:
        gate, input_hash = _resolve_gate(args.gate)
    except formats.FormatError as exc:
        return _fail(EXIT_BAD_ARG, str(exc))

    if gate.ndim != 2 or gate.shape[0] != gate.shape[1] or gate.shape[0] not in (4, 8):
        return _fail(EXIT_BAD_GATE, f"analyze needs a 4x4 or 8x8 gate, got shape {gate.shape}")
    defect = unitarity_defect(gate)
    if defect > args.unitary_tol:
        return _fail(EXIT_BAD_GATE,
                     f"input is not unitary: ||U†U - I|| = {defect:.3e} > {args.unitary_tol:.1e}")

    n_qubits = 2 if gate.shape[0] == 4 else 3
    controlled = []
    for q in range(n_qubits):
        label = QUBIT_NAMES[q]
        exact = structure.is_controlled_computational(gate, q, tol=args.tol)
        entry = {"qubit": label, "basis": "computational",
                 "detected": exact is not None,
                 "residual": exact.residual if exact else
                 float(np.hypot(*structure.offdiagonal_block_norms(gate, q)))}
        controlled.append(entry)
        searched = structure.search_control_basis(
            gate, q, tol=args.tol, restarts=args.restarts, seed=args.seed)
        controlled.append({"qubit": label, "basis": "searched",
                           "detected": searched.decomposition is not None,
                           "residual": searched.residual})

    ranks = {}
    for label, perm in _bipartitions(n_qubits):
        moved = permute_factors(gate, perm, (2,) * n_qubits)
        ranks[label] = operator_schmidt_rank(moved, (2, gate.shape[0] // 2), tol=args.rank_tol)

    eigs = eigenvalues_unitary(gate, tol=max(args.unitary_tol, defect * 1.01))
    report = {
        "gate": args.gate,
        "dim": int(gate.shape[0]),
        "unitarityDefect": defect,
        "controlled": controlled,
        "operatorSchmidtRank": ranks,
        "eigenvalues": [[float(v.real), float(v.imag)] for v in eigs],
    }
    if n_qubits == 2:
        pair = structure.eigen_pair_product_exists(eigs, tol=args.tol)
        report["pairProduct"] = {
            "holds": pair.holds,
            "pairing": [list(p) for p in pair.pairing] if pair.pairing else None,
            "gap": pair.gap,
        }
        report["obstructions"] = [
            {"kind": rep.kind, "witness": rep.witness}
            for rep in (structure.locality_obstruction(gate, tol=args.rank_tol),
                        structure.pair_product_obstruction(eigs, tol=args.tol))
        ]
    if args.dump_matrix is not None:
        try:
            formats.write_matrix(args.dump_matrix, gate)
        except OSError as exc:
            return _fail(EXIT_IO, f"cannot write {args.dump_matrix}: {exc}")
    return _emit(json.dumps(report, indent=2), args.out)


# --- verify ------------------------------------------------------------------

def cmd_verify(args) -> int:
    report = synth.verify_known_decompositions(tol=args.tolerance)
    checks = [
        {"name": c.name, "residual": c.residual, "tolerance": c.tolerance,
         "passed": c.passed, "gates": list(c.gates)}
        for c in report.checks
    ]
    ok = report.passed

    if args.circuit is not None:
        try:
            pc = formats.read_circuit(args.circuit)
        except formats.FormatError as exc:
            return _fail(EXIT_BAD_ARG, str(exc))
        residual = distance_up_to_phase(synth.build_unitary(pc), toffoli())
        passed = residual <= args.tolerance
        checks.append({"name": f"circuit file {args.circuit} builds toffoli",
                       "residual": residual, "tolerance": args.tolerance,
                       "passed": passed, "gates": [str(pc.template)]})
        ok = ok and passed

    code = _emit(json.dumps({"passed": ok, "checks": checks}, indent=2), args.out)
    if code != EXIT_OK:
        return code
    if not ok:
        failing = ", ".join(c["name"] + f" (residual {c['residual']:.3e})"
                            for c in checks if not c["passed"])
        return _fail(EXIT_VERIFY_FAILED, f"verification failed: {failing}")
    return EXIT_OK


# --- templates ---------------------------------------------------------------

def cmd_templates(args) -> int:
    if not 1 <= args.length <= MAX_TEMPLATE_LENGTH:
        return _fail(EXIT_BAD_ARG, f"--length must be in 1..{MAX_TEMPLATE_LENGTH}")
    classes = enumerate_templates(args.length)
    total = 0
    for cls in classes:
        total += cls.orbit_size
        print(f"{cls.canonical}  orbit={cls.orbit_size}  [{cls.symmetries}]")
    expected = 3 * 2 ** (args.length - 1)
    print(f"{len(classes)} classes; orbit sizes sum to {total} "
          f"(expected {expected}: {'ok' if total == expected else 'MISMATCH'})")
    return EXIT_OK if total == expected else EXIT_VERIFY_FAILED


# --- synthesize / search -----------------------------------------------------

def _config_from_args(args, target_spec: str) -> synth.SynthesisConfig:
    return synth.SynthesisConfig(
        restarts=args.restarts, seed=args.seed, max_iters=args.max_iters,
        step_size=args.step, grad_epsilon=args.grad_eps,
        success_tol=args.tol, target=target_spec)


def _prepare_out_dir(out_dir) -> str | None:
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write-probe")
        with open(probe, "w", encoding="utf-8") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        print(f"output directory {out_dir} is not writable: {exc}", file=sys.stderr)
        return None
    return out_dir


def cmd_synthesize(args) -> int:
    try:
        target, input_hash = _resolve_gate(args.target)
    except formats.FormatError as exc:
        return _fail(EXIT_BAD_ARG, str(exc))
    if target.shape != (8, 8) or unitarity_defect(target) > 1e-8:
        return _fail(EXIT_BAD_GATE, "synthesis target must be an 8x8 unitary")

    if not 1 <= args.length <= MAX_TEMPLATE_LENGTH:
        return _fail(EXIT_BAD_ARG, f"--length must be in 1..{MAX_TEMPLATE_LENGTH}")
    classes = enumerate_templates(args.length)
    if args.template_class is not None:
        try:
            wanted = canonicalize(parse_template(args.template_class))
        except ValueError as exc:
            return _fail(EXIT_BAD_ARG, str(exc))
        classes = [c for c in classes if c.canonical == wanted]
        if not classes:
            return _fail(EXIT_BAD_ARG,
                         f"no length-{args.length} class matches {args.template_class!r}")

    out_dir = _prepare_out_dir(args.out)
    if out_dir is None:
        return EXIT_IO
    cfg = _config_from_args(args, args.target)

    results = []
    for cls in classes:
        result = synth.optimize(cls.canonical, target, cfg)
        results.append(result)
        print(f"{cls.canonical}  bestCost={result.best_cost:.6e}  "
              f"converged={result.converged}")

    results_path = os.path.join(out_dir, "results.jsonl")
    traces_path = os.path.join(out_dir, "traces.csv")
    manifest_path = os.path.join(out_dir, "manifest.json")
    try:
        formats.write_results_jsonl(results_path, results, cfg)
        formats.write_traces_csv(traces_path, results)
        formats.write_manifest(
            manifest_path,
            command="synthesize",
            config={**formats.config_echo(cfg), "length": args.length,
                    "templateClass": args.template_class},
            input_hashes={args.target: input_hash},
            outputs=[results_path, traces_path])
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write results: {exc}")
    return EXIT_OK


def cmd_search(args) -> int:
    try:
        target, input_hash = _resolve_gate(args.target)
    except formats.FormatError as exc:
        return _fail(EXIT_BAD_ARG, str(exc))
    if target.shape != (8, 8) or unitarity_defect(target) > 1e-8:
        return _fail(EXIT_BAD_GATE, "search target must be an 8x8 unitary")
    if not 1 <= args.max_length <= 6:
        return _fail(EXIT_BAD_ARG, "--max-length must be in 1..6")

    out_dir = _prepare_out_dir(args.out)
    if out_dir is None:
        return EXIT_IO
    cfg = _config_from_args(args, args.target)

    table = synth.min_gate_search(target, args.max_length, cfg)
    for row in table.rows:
        print(f"length={row.length}  {row.template_class.canonical}  "
              f"bestCost={row.best_cost:.6e}  converged={row.converged}")
    verdict = table.best_length if table.best_length is not None \
        else f"none <= {args.max_length}"
    print(f"smallest converged length: {verdict}")

    rows_path = os.path.join(out_dir, "search.jsonl")
    manifest_path = os.path.join(out_dir, "manifest.json")
    try:
        with open(rows_path, "w", encoding="utf-8") as fh:
            for row in table.rows:
                fh.write(json.dumps({
                    "length": row.length,
                    "template": str(row.template_class.canonical),
                    "bestCost": row.best_cost,
                    "converged": row.converged,
                }) + "\n")
        formats.write_manifest(
            manifest_path,
            command="search",
            config={**formats.config_echo(cfg), "maxLength": args.max_length},
            input_hashes={args.target: input_hash},
            outputs=[rows_path])
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write results: {exc}")
    return EXIT_OK


# --- wiring ------------------------------------------------------------------

def _add_synth_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="runs", help="output directory (default: runs)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=20)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="success tolerance in cost units")
    p.add_argument("--grad-eps", type=float, default=1e-6,
                   help="central finite-difference step")
    p.add_argument("--step", type=float, default=1.0,
                   help="initial line-search step size")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trigate",
                     description="Three-qubit gate structure analysis and synthesis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="structure report for a gate")
    p.add_argument("gate", help="gate name or matrix file")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="controlled-detection tolerance")
    p.add_argument("--rank-tol", type=float, default=1e-8)
    p.add_argument("--unitary-tol", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=8,
                   help="restarts for the rotated-basis search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dump-matrix", default=None,
                   help="also write the resolved gate in the matrix file format")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="check the known Toffoli decompositions")
    p.add_argument("--tolerance", type=float, default=1e-10)
    p.add_argument("--circuit", default=None,
                   help="also verify a circuit descriptor file against toffoli")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("templates", help="canonical template classes of a length")
    p.add_argument("--length", type=int, required=True)
    p.set_defaults(func=cmd_templates)

    p = sub.add_parser("synthesize", help="optimize template classes against a target")
    p.add_argument("--target", required=True, help="gate name or matrix file")
    p.add_argument("--length", type=int, required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--class", dest="template_class", default=None,
                       help="one template class, e.g. AB,BC,AB,BC,AC")
    group.add_argument("--all", action="store_true",
                       help="run every class of the given length")
    _add_synth_flags(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("search", help="smallest gate count reaching the target")
    p.add_argument("--target", required=True)
    p.add_argument("--max-length", type=int, required=True)
    _add_synth_flags(p)
    p.set_defaults(func=cmd_search)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse --help (0) or usage error (3)
        return int(exc.code or 0)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
