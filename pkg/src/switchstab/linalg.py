"""Small dense matrices, singular values and product enumeration.

A *word* is a tuple of mode indices (0-based).  Words act right-to-left:
the word ``(i1, ..., it)`` stands for the product ``A[i1] @ ... @ A[it]``,
so the last index is applied to the state first.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import HorizonTooLarge

Word = tuple[int, ...]

DEFAULT_PRODUCT_CAP = 2**24
DEFAULT_DEDUP_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Validate ``a`` as a finite square matrix and return a float64 copy."""
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


@dataclass(frozen=True, eq=False)
class MatrixSet:
    """A finite, labelled set of square matrices sharing one dimension."""

    matrices: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        mats = np.array(self.matrices, dtype=float)
        if mats.ndim != 3 or mats.shape[0] == 0:
            raise ValueError("a matrix set needs at least one square matrix")
        for a in mats:
            as_matrix(a)
        labels = tuple(str(x) for x in self.labels)
        if len(labels) != mats.shape[0]:
            raise ValueError("one label per matrix is required")
        if len(set(labels)) != len(labels):
            raise ValueError(f"labels must be unique: {labels}")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_matrices(cls, matrices: Sequence, labels: Sequence[str] | None = None) -> "MatrixSet":
        mats = [as_matrix(a) for a in matrices]
        if not mats:
            raise ValueError("a matrix set needs at least one matrix")
        dims = {a.shape[0] for a in mats}
        if len(dims) != 1:
            raise ValueError(f"all matrices must share one dimension, got {sorted(dims)}")
        if labels is None:
            labels = [f"A{i + 1}" for i in range(len(mats))]
        return cls(np.stack(mats), tuple(labels))

    @property
    def dim(self) -> int:
        return self.matrices.shape[1]

    def __len__(self) -> int:
        return self.matrices.shape[0]

    def __getitem__(self, i: int) -> np.ndarray:
        return self.matrices[i]

    def __iter__(self):
        return iter(self.matrices)

    def scaled(self, gamma: float) -> "MatrixSet":
        return MatrixSet(gamma * self.matrices, self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def word_label(self, word: Word) -> str:
        return "".join(self.labels[i] for i in word) if word else "Id"


@dataclass(frozen=True, eq=False)
class ProductEntry:
    word: Word
    matrix: np.ndarray

    @property
    def length(self) -> int:
        return len(self.word)


def multiply(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b


# ---------------------------------------------------------------------------
# singular values


def _sv_2x2(stack: np.ndarray) -> np.ndarray:
    a, b = stack[..., 0, 0], stack[..., 0, 1]
    c, d = stack[..., 1, 0], stack[..., 1, 1]
    # largest eigenvalue of the Gram matrix, written via hypot to avoid cancellation
    smax = 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, c + b))
    det = np.abs(a * d - b * c)
    with np.errstate(invalid="ignore", divide="ignore"):
        smin = np.where(smax > 0, det / np.where(smax > 0, smax, 1.0), 0.0)
    return np.stack([smax, np.minimum(smin, smax)], axis=-1)


def _sv_jacobi(stack: np.ndarray, max_sweeps: int = 60) -> np.ndarray:
    """One-sided (Hestenes) Jacobi, i.e. implicit Jacobi sweeps on a.T @ a."""
    u = np.array(stack, dtype=float, copy=True)
    d = u.shape[-1]
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        rotated = False
        for p in range(d - 1):
            for q in range(p + 1, d):
                up, uq = u[..., :, p], u[..., :, q]
                alpha = np.einsum("...i,...i->...", up, up)
                beta = np.einsum("...i,...i->...", uq, uq)
                gamma = np.einsum("...i,...i->...", up, uq)
                active = np.abs(gamma) > eps * np.sqrt(alpha * beta)
                if not np.any(active):
                    continue
                rotated = True
                g = np.where(active, gamma, 1.0)
                # an infinite zeta means a negligible rotation, t = 0
                with np.errstate(over="ignore"):
                    zeta = (beta - alpha) / (2.0 * g)
                    t = np.sign(zeta) / (np.abs(zeta) + np.hypot(1.0, zeta))
                t = np.where(zeta == 0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                new_p = c[..., None] * up - s[..., None] * uq
                new_q = s[..., None] * up + c[..., None] * uq
                u[..., :, p] = new_p
                u[..., :, q] = new_q
        if not rotated:
            break
    sv = np.linalg.norm(u, axis=-2)
    return -np.sort(-sv, axis=-1)


def singular_values(a) -> np.ndarray:
    """Singular values in descending order; accepts a matrix or a stack ``(..., d, d)``."""
    a = np.asarray(a, dtype=float)
    d = a.shape[-1]
    if d == 1:
        return np.abs(a[..., 0, :])
    if d == 2:
        return _sv_2x2(a)
    return _sv_jacobi(a)


def smallest_singular_value(a):
    """``min |a x|`` over unit vectors ``x`` (vectorised over stacks)."""
    sv = singular_values(a)[..., -1]
    return float(sv) if np.ndim(sv) == 0 else sv


def spectral_norm(a):
    """Operator 2-norm (largest singular value)."""
    sv = singular_values(a)[..., 0]
    return float(sv) if np.ndim(sv) == 0 else sv


# ---------------------------------------------------------------------------
# products


def word_matrix(matrix_set: MatrixSet, word: Sequence[int]) -> np.ndarray:
    d = matrix_set.dim
    out = np.eye(d)
    for i in word:
        if not 0 <= i < len(matrix_set):
            raise IndexError(f"mode index {i} out of range for {len(matrix_set)} modes")
        out = out @ matrix_set[i]
    return out


def _dedup_indices(mats: np.ndarray, tol: float) -> np.ndarray:
    """Greedy representatives in input order; entries within ``tol`` (max-norm) merge."""
    n = mats.shape[0]
    if n <= 1 or tol <= 0:
        return np.arange(n)
    flat = mats.reshape(n, -1)
    pairs = cKDTree(flat).query_pairs(r=tol, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n)
    nbrs: dict[int, list[int]] = {}
    for i, j in pairs:
        nbrs.setdefault(int(i), []).append(int(j))
        nbrs.setdefault(int(j), []).append(int(i))
    absorbed = np.zeros(n, dtype=bool)
    for i in sorted(nbrs):
        if absorbed[i]:
            continue
        for j in nbrs[i]:
            if j > i:
                absorbed[j] = True
    return np.flatnonzero(~absorbed)


def check_cap(matrix_set: MatrixSet, t: int, cap: int = DEFAULT_PRODUCT_CAP) -> None:
    """Refuse horizons whose undeduplicated product count ``m**t`` exceeds ``cap``."""
    m = len(matrix_set)
    if m**t > cap:
        raise HorizonTooLarge(f"horizon too large: {m}^{t} products exceed the cap {cap}")


def product_stack(
    matrix_set: MatrixSet,
    t: int,
    dedup_tol: float = 0.0,
    cap: int = DEFAULT_PRODUCT_CAP,
) -> tuple[np.ndarray, np.ndarray]:
    """All length-``t`` products as arrays ``(words, matrices)`` in lexicographic word order.

    ``words`` has shape ``(N, t)``.  With ``dedup_tol > 0`` near-identical
    products are merged level by level, keeping the lexicographically
    smallest word of each class.
    """
    if t < 0:
        raise ValueError("horizon must be nonnegative")
    check_cap(matrix_set, t, cap)
    m, d = len(matrix_set), matrix_set.dim
    words = np.zeros((1, 0), dtype=np.int64)
    mats = np.eye(d)[None]
    base = matrix_set.matrices
    for _ in range(t):
        mats = np.einsum("nij,mjk->nmik", mats, base).reshape(-1, d, d)
        words = np.concatenate(
            [np.repeat(words, m, axis=0), np.tile(np.arange(m), words.shape[0])[:, None]],
            axis=1,
        )
        if dedup_tol > 0:
            keep = _dedup_indices(mats, dedup_tol)
            mats, words = mats[keep], words[keep]
    return words, mats


def enumerate_products(
    matrix_set: MatrixSet,
    t: int,
    dedup_tol: float = 0.0,
    cap: int = DEFAULT_PRODUCT_CAP,
) -> list[ProductEntry]:
    words, mats = product_stack(matrix_set, t, dedup_tol, cap)
    return [ProductEntry(tuple(int(i) for i in w), a) for w, a in zip(words, mats)]


def all_words(n_modes: int, t: int):
    """Every word of length ``t`` in lexicographic order."""
    return itertools.product(range(n_modes), repeat=t)
