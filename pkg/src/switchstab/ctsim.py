"""Continuous-time sample-and-hold closed loops.

The system is the convex hull of a finite generator set.  A feedback reads
the state at the sampling instants ``delta * k`` and holds its choice of
generator (or convex combination of generators) until the next instant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .linalg import MatrixSet, as_matrix

STATE_OVERFLOW = 1e100

# Diagonal Pade(6, 6) numerator coefficients for exp; the denominator flips odd signs.
_PADE6 = np.array([1.0, 1 / 2, 5 / 44, 1 / 66, 1 / 792, 1 / 15840, 1 / 665280])
_SCALE_TARGET = 0.5


def matrix_exponential(a, t: float = 1.0) -> np.ndarray:
    """``exp(t a)`` by scaling and squaring with a Pade(6, 6) approximant.

    The argument is halved until its 1-norm is at most 0.5; the truncation
    error of the approximant is then below 1e-16 relative.
    """
    x = as_matrix(a) * float(t)
    if not np.all(np.isfinite(x)):
        raise ValueError("t * a must be finite")
    d = x.shape[0]
    norm = np.linalg.norm(x, 1)
    s = max(0, math.ceil(math.log2(norm / _SCALE_TARGET))) if norm > _SCALE_TARGET else 0
    x = x / 2.0**s
    ident = np.eye(d)
    power = ident
    even = np.zeros_like(x)
    odd = np.zeros_like(x)
    for k, c in enumerate(_PADE6):
        if k:
            power = power @ x
        if k % 2:
            odd += c * power
        else:
            even += c * power
    out = np.linalg.solve(even - odd, even + odd)
    for _ in range(s):
        out = out @ out
    return out


@dataclass(frozen=True, eq=False)
class CtSystem:
    generators: MatrixSet

    @property
    def dim(self) -> int:
        return self.generators.dim

    def __len__(self) -> int:
        return len(self.generators)

    def matrix(self, choice) -> np.ndarray:
        """The generator for an index, or the convex combination for a weight vector."""
        if np.ndim(choice) == 0:
            return self.generators[int(choice)]
        w = _check_weights(choice, len(self))
        return np.tensordot(w, self.generators.matrices, axes=1)

    def shifted(self, gamma: float) -> "CtSystem":
        ident = np.eye(self.dim)
        return CtSystem(MatrixSet(self.generators.matrices + gamma * ident, self.generators.labels))


def _check_weights(w, m: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (m,) or np.any(w < 0) or not math.isclose(w.sum(), 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError("convex weights must be nonnegative, one per generator, summing to 1")
    return w


Choice = Union[int, Sequence[float], np.ndarray]


@dataclass(frozen=True)
class Schedule:
    """Piecewise-constant switching law: ``(generator index or weights, duration)`` pairs."""

    segments: tuple[tuple[Choice, float], ...]

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a schedule needs at least one segment")
        for _, dur in self.segments:
            if not (dur > 0 and math.isfinite(dur)):
                raise ValueError("segment durations must be positive and finite")

    @property
    def total(self) -> float:
        return float(sum(dur for _, dur in self.segments))


def average_matrix(sys: CtSystem, sched: Schedule) -> np.ndarray:
    """Time average of the scheduled matrices over the schedule's duration."""
    acc = np.zeros((sys.dim, sys.dim))
    for choice, dur in sched.segments:
        acc += dur * sys.matrix(choice)
    return acc / sched.total


@dataclass
class CtTrajectory:
    sample_times: np.ndarray
    states: np.ndarray
    delta: float
    choices: list
    diverged: bool = False

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states, axis=1)

    def to_csv(self) -> str:
        d = self.states.shape[1]
        lines = ["time," + ",".join(f"x{i + 1}" for i in range(d))]
        for t, x in zip(self.sample_times, self.states):
            lines.append(f"{t:.17g}," + ",".join(f"{v:.17g}" for v in x))
        return "\n".join(lines) + "\n"


Feedback = Callable[[np.ndarray], Choice]


def sample_hold_simulate(sys: CtSystem, feedback: Feedback, delta: float, x0, T: float) -> CtTrajectory:
    """Sample the feedback on unit directions every ``delta`` and hold it.

    If ``T`` is not a multiple of ``delta`` the last interval is shortened
    so the trajectory ends exactly at ``T``.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if T < delta:
        raise ValueError("T must be at least delta")
    x = np.asarray(x0, dtype=float).copy()
    n_full = int(math.floor(T / delta + 1e-9))
    steps = [delta] * n_full
    rest = T - n_full * delta
    if rest > 1e-12 * T:
        steps.append(rest)

    cache: dict = {}
    times, states, choices = [0.0], [x.copy()], []
    t = 0.0
    diverged = False
    for h in steps:
        nrm = np.linalg.norm(x)
        choice = feedback(x / nrm) if nrm > 0 else 0
        key = (h, tuple(np.atleast_1d(choice).tolist()))
        if key not in cache:
            cache[key] = matrix_exponential(sys.matrix(choice), h)
        x = cache[key] @ x
        t += h
        times.append(t)
        states.append(x.copy())
        choices.append(choice)
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > STATE_OVERFLOW:
            diverged = True
            break
    return CtTrajectory(np.array(times), np.array(states), delta, choices, diverged)


class GreedyFeedback:
    """``x -> argmin_A |exp(delta A) x|`` over the generators (ties: smallest index)."""

    def __init__(self, sys: CtSystem, delta: float):
        if delta <= 0:
            raise ValueError("delta must be positive")
        self.delta = delta
        self.flows = np.stack([matrix_exponential(a, delta) for a in sys.generators])

    def __call__(self, x) -> int:
        x = np.asarray(x, dtype=float)
        nrm = np.linalg.norm(x)
        z = x / nrm if nrm > 0 else x
        return int(np.argmin(np.linalg.norm(self.flows @ z, axis=1)))


def greedy_feedback(sys: CtSystem, delta: float) -> GreedyFeedback:
    return GreedyFeedback(sys, delta)


def simulate_schedule(sys: CtSystem, sched: Schedule, x0, substeps: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Open-loop trajectory under a schedule, sampled ``substeps`` times per segment."""
    x = np.asarray(x0, dtype=float).copy()
    times, states = [0.0], [x.copy()]
    t = 0.0
    for choice, dur in sched.segments:
        step = matrix_exponential(sys.matrix(choice), dur / substeps)
        for _ in range(substeps):
            x = step @ x
            t += dur / substeps
            times.append(t)
            states.append(x.copy())
    return np.array(times), np.array(states)


@dataclass
class ShiftReport:
    gamma: float
    times: np.ndarray
    max_rel_error: float
    passed: bool


def shift_scaling_check(
    sys: CtSystem, gamma: float, sched: Schedule, x0, substeps: int = 4, rtol: float = 1e-9
) -> ShiftReport:
    """Compare the schedule's trajectory under ``A + gamma Id`` with ``e^(gamma t)`` times the original."""
    times, base = simulate_schedule(sys, sched, x0, substeps)
    _, shifted = simulate_schedule(sys.shifted(gamma), sched, x0, substeps)
    expected = np.exp(gamma * times)[:, None] * base
    scale = np.maximum(np.linalg.norm(expected, axis=1), np.finfo(float).tiny)
    err = float(np.max(np.linalg.norm(shifted - expected, axis=1) / scale))
    return ShiftReport(gamma, times, err, err <= rtol)
