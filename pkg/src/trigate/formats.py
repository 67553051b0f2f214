"""File formats: matrix exchange, circuit descriptors and experiment outputs.

Matrices travel as {"dim": n, "re": [[...]], "im": [[...]]} with every float
printed at 17 significant digits, which round-trips float64 exactly.  Result
payloads are JSON lines plus a CSV of convergence traces; each experiment run
also writes one manifest (the only place a timestamp appears).
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from typing import Iterable

import numpy as np

from .synth import ParamCircuit, SynthesisConfig, SynthesisResult
from .templates import parse_template

TOOL_VERSION = "0.1.0"


class FormatError(ValueError):
    """Malformed matrix or circuit file."""


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def matrix_to_json_text(m) -> str:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise FormatError(f"only square matrices are serialized, got shape {a.shape}")

    def rows(part: np.ndarray) -> str:
        return "[" + ", ".join(
            "[" + ", ".join(format_float(x) for x in row) + "]" for row in part
        ) + "]"

    return ('{"dim": %d, "re": %s, "im": %s}\n'
            % (a.shape[0], rows(a.real), rows(a.imag)))


def write_matrix(path, m) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(matrix_to_json_text(m))


def read_matrix(path) -> np.ndarray:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read matrix file {path}: {exc}") from exc
    try:
        dim = int(payload["dim"])
        re = np.asarray(payload["re"], dtype=float)
        im = np.asarray(payload["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"matrix file {path} is missing dim/re/im fields") from exc
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise FormatError(
            f"matrix file {path} declares dim={dim} but carries shapes "
            f"{re.shape} and {im.shape}")
    return re + 1j * im


def circuit_to_json_text(pc: ParamCircuit) -> str:
    slots = ", ".join(
        '{"pair": "%s", "generator": [%s]}'
        % (pair.value, ", ".join(format_float(x) for x in coeffs))
        for pair, coeffs in zip(pc.template, pc.params)
    )
    return '{"slots": [%s]}\n' % slots


def write_circuit(path, pc: ParamCircuit) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(circuit_to_json_text(pc))


def read_circuit(path) -> ParamCircuit:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read circuit file {path}: {exc}") from exc
    try:
        slots = payload["slots"]
        pairs = ",".join(str(slot["pair"]) for slot in slots)
        params = [[float(x) for x in slot["generator"]] for slot in slots]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"circuit file {path} has malformed slots") from exc
    if any(len(row) != 16 for row in params):
        raise FormatError(f"circuit file {path}: every generator needs 16 reals")
    try:
        template = parse_template(pairs)
    except ValueError as exc:
        raise FormatError(f"circuit file {path}: {exc}") from exc
    return ParamCircuit(template, np.asarray(params))


def config_echo(cfg: SynthesisConfig) -> dict:
    return {
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "maxIters": cfg.max_iters,
        "stepSize": cfg.step_size,
        "gradEpsilon": cfg.grad_epsilon,
        "successTol": cfg.success_tol,
        "target": cfg.target,
    }


def result_line(result: SynthesisResult, cfg: SynthesisConfig) -> str:
    record = result.summary()
    record["config"] = config_echo(cfg)
    return json.dumps(record)


def write_results_jsonl(path, results: Iterable[SynthesisResult], cfg: SynthesisConfig) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for result in results:
            fh.write(result_line(result, cfg) + "\n")


def write_traces_csv(path, results: Iterable[SynthesisResult]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("template,restart,iteration,cost\n")
        for result in results:
            name = str(result.template_class.canonical)
            for restart, trace in enumerate(result.traces):
                for iteration, value in enumerate(trace):
                    fh.write(f"{name},{restart},{iteration},{float(value)!r}\n")


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, *, command: str, config: dict, input_hashes: dict,
                   outputs: list[str]) -> None:
    manifest = {
        "toolVersion": TOOL_VERSION,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "command": command,
        "config": config,
        "inputHashes": input_hashes,
        "outputs": [os.fspath(p) for p in outputs],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
