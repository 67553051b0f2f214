"""Deterministic gradient descent with finite differences and backtracking.

The one optimizer used for synthesis experiments: no stochastic elements
beyond caller-seeded starting points, so repeated runs are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

ARMIJO_C = 1e-4
MAX_BACKTRACKS = 40
GRAD_NORM_TOL = 1e-12
MAX_STEP = 1e3


def central_difference_gradient(f, x: np.ndarray, eps: float) -> np.ndarray:
    grad = np.empty_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = eps
        grad[i] = (f(x + step) - f(x - step)) / (2.0 * eps)
    return grad


@dataclass
class DescentResult:
    x: np.ndarray
    value: float
    iterations: int
    trace: np.ndarray  # cost after 0, 1, ... iterations
    stop: str          # "target" | "gradient" | "stalled" | "max-iters"


def descend(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    *,
    step0: float,
    grad_eps: float,
    max_iters: int,
    target_value: float = -np.inf,
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    grad_norm_tol: float = GRAD_NORM_TOL,
) -> DescentResult:
    """Minimize f from x0 with Armijo backtracking line search.

    The gradient defaults to central finite differences at `grad_eps`; a
    caller-supplied `gradient` must compute the same quantity (callers use
    this to batch the differences).  The first line search starts at `step0`;
    later ones start from the Barzilai-Borwein quotient (s·s)/(s·y), clamped,
    which converges far faster than a fixed trial step on the ill-conditioned
    tails of these landscapes.  Descent stops once f <= target_value, the
    gradient norm drops below `grad_norm_tol`, or no decrease is found at any
    backtracked step.
    """
    x = np.array(x0, dtype=float)
    fx = float(f(x))
    trace = [fx]
    fallback = float(step0)
    prev_x: Optional[np.ndarray] = None
    prev_g: Optional[np.ndarray] = None
    stop = "max-iters"

    for _ in range(max_iters):
        if fx <= target_value:
            stop = "target"
            break
        g = gradient(x) if gradient is not None else central_difference_gradient(f, x, grad_eps)
        gnorm = float(np.linalg.norm(g))
        if gnorm <= grad_norm_tol:
            stop = "gradient"
            break

        if prev_x is None:
            t = fallback
        else:
            s = x - prev_x
            y = g - prev_g
            sy = float(s @ y)
            t = float(s @ s) / sy if sy > 0.0 else 2.0 * fallback
        t = min(max(t, 1e-10), MAX_STEP)

        accepted = False
        for _ in range(MAX_BACKTRACKS):
            xt = x - t * g
            ft = float(f(xt))
            if ft <= fx - ARMIJO_C * t * gnorm * gnorm:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            stop = "stalled"
            break
        prev_x, prev_g = x, g
        x, fx = xt, ft
        trace.append(fx)
        fallback = min(2.0 * t, MAX_STEP)
    else:
        if fx <= target_value:
            stop = "target"

    return DescentResult(x=x, value=fx, iterations=len(trace) - 1,
                         trace=np.asarray(trace), stop=stop)
