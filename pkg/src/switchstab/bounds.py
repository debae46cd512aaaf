"""Certified lower and upper bounds on the feedback stabilization radius.

Lower bounds come from smallest singular values of products and from an
invariant orthant cone (LP bisection).  Upper bounds come from a uniform
angular grid padded by a Lipschitz term: for a unit vector ``x`` within
chord distance ``h`` of a grid direction ``z``, ``|A x| <= |A z| + ||A|| h``.
Only directions in ``[0, pi)`` are evaluated since ``|A(-x)| = |A x|``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog

from .errors import ConeInapplicable, MethodInapplicable
from .linalg import (
    DEFAULT_DEDUP_TOL,
    DEFAULT_PRODUCT_CAP,
    MatrixSet,
    Word,
    check_cap,
    product_stack,
    smallest_singular_value,
    spectral_norm,
    word_matrix,
)

SAMPLE_SEED = 20240601
CONE_WIDTH = 1e-9
CONE_RESIDUAL_TOL = 1e-9


class NoContractionWarning(UserWarning):
    """The certified best-response rate is not below one; the bound is vacuous."""


@dataclass
class LowerBoundReport:
    method: str
    per_horizon: list[tuple[int, float]]
    best: float

    @classmethod
    def from_values(cls, method: str, per_horizon: list[tuple[int, float]]) -> "LowerBoundReport":
        return cls(method, per_horizon, max(v for _, v in per_horizon))


@dataclass
class UpperBoundReport:
    """One upper bound.  ``empirical`` and ``certified`` are per-step rates.

    For grid-cover reports ``raw_empirical``/``raw_certified`` hold the
    un-normalised ``gamma_t`` (products of length ``t``).
    """

    method: str
    horizon: int
    empirical: float
    certified: float
    grid_size: int
    lipschitz_pad: float
    raw_empirical: float | None = None
    raw_certified: float | None = None
    is_certified: bool = True


@dataclass
class ConeCertificate:
    lam: float
    v: np.ndarray
    horizon: int

    def residual(self, matrix_set: MatrixSet) -> float:
        """Most negative entry of ``A v - lam v`` over the products of length ``horizon``."""
        _, mats = product_stack(matrix_set, self.horizon)
        return float(np.min(mats @ self.v - self.lam * self.v))


@dataclass
class Arc:
    start: float
    end: float
    word: Word
    rate: float

    @property
    def length(self) -> int:
        return len(self.word)


@dataclass
class BestResponseMap:
    arcs: list[Arc]
    h: float = field(repr=False, default=0.0)

    def lookup(self, angle: float) -> Arc:
        a = float(angle) % math.pi
        starts = [arc.start for arc in self.arcs]
        k = int(np.searchsorted(starts, a, side="right")) - 1
        return self.arcs[max(k, 0)]


class NormBound(NamedTuple):
    value: float
    word: Word
    horizon: int


def _unit_directions(n_half: int) -> tuple[np.ndarray, np.ndarray]:
    theta = math.pi * np.arange(n_half) / n_half
    return theta, np.vstack([np.cos(theta), np.sin(theta)])


def grid_chord(grid_n: int) -> float:
    """Largest chord distance from a unit vector to a uniform ``grid_n`` grid on the circle."""
    return 2.0 * math.sin(math.pi / (2.0 * grid_n))


def _check_grid(grid_n: int) -> None:
    if grid_n < 8 or grid_n % 2:
        raise ValueError("grid_n must be an even integer >= 8")


# ---------------------------------------------------------------------------
# lower bounds


def sv_lower_bound(matrix_set: MatrixSet, t_max: int, cap: int = DEFAULT_PRODUCT_CAP) -> LowerBoundReport:
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    check_cap(matrix_set, t_max, cap)
    per = []
    for t in range(1, t_max + 1):
        _, mats = product_stack(matrix_set, t, DEFAULT_DEDUP_TOL, cap)
        smin = float(np.min(smallest_singular_value(mats)))
        per.append((t, max(smin, 0.0) ** (1.0 / t)))
    return LowerBoundReport.from_values("singular-value", per)


def _perron_root(a: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(a))))


_HIGHS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def _max_slack(mats: np.ndarray, lam: float) -> tuple[float, np.ndarray]:
    """max s  s.t.  (A - lam I) v >= s,  v >= 0,  sum v = 1."""
    n, d, _ = mats.shape
    shifted = mats - lam * np.eye(d)
    # variables (v_1..v_d, s); rows: -(A - lam I) v + s <= 0
    a_ub = np.hstack([-shifted.reshape(n * d, d), np.ones((n * d, 1))])
    res = linprog(
        c=np.r_[np.zeros(d), -1.0],
        A_ub=a_ub,
        b_ub=np.zeros(n * d),
        A_eq=np.r_[np.ones(d), 0.0][None],
        b_eq=[1.0],
        bounds=[(0, None)] * d + [(None, None)],
        method="highs",
        options=_HIGHS,
    )
    if res.status != 0:
        return -math.inf, np.full(d, 1.0 / d)
    return -res.fun, res.x[:d]


def _central_witness(mats: np.ndarray, lam: float) -> np.ndarray | None:
    """Most interior v on the simplex with (A - lam I) v >= 0: maximise min_i v_i."""
    n, d, _ = mats.shape
    shifted = mats - lam * np.eye(d)
    a_ub = np.vstack([
        np.hstack([-shifted.reshape(n * d, d), np.zeros((n * d, 1))]),
        np.hstack([-np.eye(d), np.ones((d, 1))]),
    ])
    res = linprog(
        c=np.r_[np.zeros(d), -1.0],
        A_ub=a_ub,
        b_ub=np.zeros(n * d + d),
        A_eq=np.r_[np.ones(d), 0.0][None],
        b_eq=[1.0],
        bounds=[(0, None)] * (d + 1),
        method="highs",
        options=_HIGHS,
    )
    return res.x[:d] if res.status == 0 else None


def _certified_ratio(mats: np.ndarray, v: np.ndarray) -> float:
    """Largest lam with A v >= lam v for all A, given the nonnegative witness v."""
    av = mats @ v
    pos = v > 0
    return float(np.min(av[:, pos] / v[pos]))


def cone_lower_bound(
    matrix_set: MatrixSet, horizon: int, cap: int = DEFAULT_PRODUCT_CAP
) -> tuple[LowerBoundReport, ConeCertificate]:
    """Orthant-cone lower bound at one horizon, by bisection on LP feasibility."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    _, mats = product_stack(matrix_set, horizon, DEFAULT_DEDUP_TOL, cap)
    if np.any(mats < 0):
        raise ConeInapplicable("cone inapplicable: a product has a negative entry")

    lo = 0.0
    hi = min(_perron_root(a) for a in mats) * (1 + 1e-12) + 1e-300
    while hi - lo > CONE_WIDTH:
        mid = 0.5 * (lo + hi)
        slack, _ = _max_slack(mats, mid)
        if slack >= 0:
            lo = mid
        else:
            hi = mid

    v = _central_witness(mats, lo)
    if v is None:
        v = _max_slack(mats, lo)[1]
    v = np.clip(v, 0.0, None)
    v = v / v.sum()
    lam = _certified_ratio(mats, v)
    if lam < lo - 1e-6:
        # LP tolerance left a poor witness; fall back to the bisection value if it verifies
        if np.min(mats @ v - lo * v) >= -CONE_RESIDUAL_TOL:
            lam = lo
    cert = ConeCertificate(lam, v, horizon)
    report = LowerBoundReport.from_values("cone", [(horizon, max(lam, 0.0) ** (1.0 / horizon))])
    return report, cert


# ---------------------------------------------------------------------------
# upper bounds


def _sample_sphere(d: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(SAMPLE_SEED)
    x = rng.normal(size=(d, n))
    return x / np.linalg.norm(x, axis=0)


def algorithm1_upper(
    matrix_set: MatrixSet,
    t_max: int,
    grid_n: int,
    cap: int = DEFAULT_PRODUCT_CAP,
) -> list[UpperBoundReport]:
    """Per-horizon bounds ``r_t = (gamma_t + L h)^(1/t)`` from products of length ``t``.

    ``gamma_t`` is the grid maximum of ``min_A |A z|`` over ``A`` of length
    ``t`` and ``L`` the largest product norm.  For ``d > 2`` the directions
    are sampled instead and the report is marked uncertified.
    """
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    check_cap(matrix_set, t_max, cap)
    d = matrix_set.dim
    if d == 2:
        _check_grid(grid_n)
        _, dirs = _unit_directions(grid_n // 2)
        h = grid_chord(grid_n)
    elif d == 1:
        dirs, h = np.ones((1, 1)), 0.0
    else:
        dirs, h = _sample_sphere(d, grid_n), math.inf

    reports = []
    for t in range(1, t_max + 1):
        _, mats = product_stack(matrix_set, t, DEFAULT_DEDUP_TOL, cap)
        gamma = float(np.max(np.min(np.linalg.norm(mats @ dirs, axis=1), axis=0)))
        if d <= 2:
            lip = float(np.max(spectral_norm(mats)))
            pad = lip * h
            raw_cert = gamma + pad
            cert = raw_cert ** (1.0 / t)
        else:
            pad, raw_cert, cert = math.inf, math.inf, math.inf
        reports.append(
            UpperBoundReport(
                method="algorithm1",
                horizon=t,
                empirical=gamma ** (1.0 / t),
                certified=cert,
                grid_size=grid_n,
                lipschitz_pad=pad,
                raw_empirical=gamma,
                raw_certified=raw_cert,
                is_certified=d <= 2,
            )
        )
    return reports


def candidate_words(
    matrix_set: MatrixSet, t_bar: int, cap: int = DEFAULT_PRODUCT_CAP
) -> tuple[list[Word], np.ndarray]:
    """All words of length 1..t_bar (deduplicated per length), shortest first."""
    check_cap(matrix_set, t_bar, cap)
    words: list[Word] = []
    mats = []
    for t in range(1, t_bar + 1):
        w, m = product_stack(matrix_set, t, DEFAULT_DEDUP_TOL, cap)
        words.extend(tuple(int(i) for i in row) for row in w)
        mats.append(m)
    return words, np.concatenate(mats)


def best_response_upper(
    matrix_set: MatrixSet,
    t_bar: int,
    grid_n: int,
    words: Sequence[Word] | None = None,
    cap: int = DEFAULT_PRODUCT_CAP,
) -> tuple[UpperBoundReport, BestResponseMap]:
    """Variable-horizon bound: each direction picks the product with the best per-step rate.

    Every grid cell (an arc of half-width ``pi / grid_n`` around a grid
    direction ``z``) is assigned the word minimising the padded rate
    ``(|A_w z| + ||A_w|| h)^(1/|w|)``, which bounds ``|A_w x|^(1/|w|)``
    for every ``x`` in the cell.  Ties go to the shorter, then
    lexicographically smaller word.
    """
    if matrix_set.dim != 2:
        raise MethodInapplicable("best-response bound needs a 2-dimensional system")
    _check_grid(grid_n)
    if words is None:
        if t_bar < 1:
            raise ValueError("t_bar must be >= 1")
        cand, mats = candidate_words(matrix_set, t_bar, cap)
    else:
        if not words:
            raise ValueError("empty candidate word list")
        cand = sorted({tuple(int(i) for i in w) for w in words}, key=lambda w: (len(w), w))
        if any(len(w) == 0 for w in cand):
            raise ValueError("candidate words must be nonempty")
        mats = np.stack([word_matrix(matrix_set, w) for w in cand])
        t_bar = max(len(w) for w in cand)

    n_half = grid_n // 2
    theta, dirs = _unit_directions(n_half)
    h = grid_chord(grid_n)
    lengths = np.array([len(w) for w in cand], dtype=float)[:, None]
    norms_z = np.linalg.norm(mats @ dirs, axis=1)
    lips = spectral_norm(mats)[:, None]
    rates = norms_z ** (1.0 / lengths)
    padded = (norms_z + lips * h) ** (1.0 / lengths)

    empirical = float(np.max(np.min(rates, axis=0)))
    choice = np.argmin(padded, axis=0)
    cell_rate = padded[choice, np.arange(n_half)]
    certified = float(np.max(cell_rate))

    arcs = _merge_cells(theta, math.pi / grid_n, choice, cell_rate, cand)
    report = UpperBoundReport(
        method="best-response",
        horizon=t_bar,
        empirical=empirical,
        certified=certified,
        grid_size=grid_n,
        lipschitz_pad=float(np.max(lips) * h),
    )
    if certified >= 1.0:
        warnings.warn(
            f"no contraction achieved: certified rate {certified:.6g} >= 1", NoContractionWarning, stacklevel=2
        )
    return report, BestResponseMap(arcs, h)


def _merge_cells(theta, half_width, choice, cell_rate, cand) -> list[Arc]:
    """Merge consecutive grid cells with the same word into arcs covering [0, pi]."""
    n = len(theta)
    # cell 0 straddles angle 0; its lower half becomes the tail piece [pi - half_width, pi]
    pieces = [(0.0, half_width, int(choice[0]), float(cell_rate[0]))]
    for k in range(1, n):
        pieces.append((theta[k] - half_width, theta[k] + half_width, int(choice[k]), float(cell_rate[k])))
    pieces.append((math.pi - half_width, math.pi, int(choice[0]), float(cell_rate[0])))

    arcs: list[Arc] = []
    cur_start, cur_end, cur_word, cur_rate = pieces[0]
    for start, end, word, rate in pieces[1:]:
        if word == cur_word:
            cur_end, cur_rate = end, max(cur_rate, rate)
        else:
            arcs.append(Arc(cur_start, cur_end, cand[cur_word], cur_rate))
            cur_start, cur_end, cur_word, cur_rate = start, end, word, rate
    arcs.append(Arc(cur_start, cur_end, cand[cur_word], cur_rate))
    return arcs


def subradius_norm_upper(matrix_set: MatrixSet, t_max: int, cap: int = DEFAULT_PRODUCT_CAP) -> NormBound:
    """``min ||A||^(1/t)`` over products of length ``t <= t_max``; bounds the subradius from above."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    check_cap(matrix_set, t_max, cap)
    best = NormBound(math.inf, (), 0)
    for t in range(1, t_max + 1):
        words, mats = product_stack(matrix_set, t, DEFAULT_DEDUP_TOL, cap)
        vals = spectral_norm(mats) ** (1.0 / t)
        k = int(np.argmin(vals))
        if vals[k] < best.value:
            best = NormBound(float(vals[k]), tuple(int(i) for i in words[k]), t)
    return best


def rate_profile(matrix_set: MatrixSet, words: Sequence[Word], angles) -> np.ndarray:
    """``F(alpha) = min_w |A_w z_alpha|^(1/|w|)`` at the given angles (planar sets)."""
    if matrix_set.dim != 2:
        raise MethodInapplicable("rate profiles are defined for 2-dimensional systems")
    if not words or any(len(w) == 0 for w in words):
        raise ValueError("need a nonempty list of nonempty words")
    angles = np.asarray(angles, dtype=float)
    mats = np.stack([word_matrix(matrix_set, w) for w in words])
    lengths = np.array([len(w) for w in words], dtype=float)[:, None]
    z = np.vstack([np.cos(angles), np.sin(angles)])
    return np.min(np.linalg.norm(mats @ z, axis=1) ** (1.0 / lengths), axis=0)
