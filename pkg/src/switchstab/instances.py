"""Built-in systems and reduction-based instance generators.

Each :class:`NamedInstance` lists its known facts as ``(description,
check_id)`` pairs; :func:`check_fact` runs the check behind an id.  The
test suite executes every listed fact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .linalg import MatrixSet, Word, product_stack, smallest_singular_value, spectral_norm, word_matrix

IDENTITY_TOL = 1e-12

# Words of the 13 products used for the best-response cover of the two-mode
# planar system, written with 1-based mode names (leftmost acts last).
STANFORD_URBANO_13 = (
    "2", "21", "211", "2111", "21211", "21212", "212121", "212111",
    "2111211", "2121211", "21112111", "21212111", "212121211",
)


@dataclass(frozen=True, eq=False)
class NamedInstance:
    name: str
    matrix_set: MatrixSet
    facts: tuple[tuple[str, str], ...] = ()
    test_vector: np.ndarray | None = None
    mortal_word: Word | None = None


def stanford_urbano_words() -> list[Word]:
    """The 13 candidate products as 0-based words."""
    return [tuple(int(c) - 1 for c in w) for w in STANFORD_URBANO_13]


def stanford_urbano() -> NamedInstance:
    s = np.sqrt(2.0) / 2.0
    a1 = np.array([[s, s], [-s, s]])
    a2 = np.array([[0.5, 0.0], [0.0, 2.0]])
    return NamedInstance(
        "stanford-urbano",
        MatrixSet.from_matrices([a1, a2], ["A1", "A2"]),
        facts=(
            ("det A1 = det A2 = 1", "su.unit_det"),
            ("||A1|| = 1", "su.a1_isometry"),
            ("sigma_min(A2) = 1/2", "su.a2_smin"),
            ("A1^4 = -Id", "su.a1_pow4"),
            ("A2 A1^2 A2 = A1^2", "su.a2a1sq_a2"),
        ),
    )


def stanford_urbano_bar() -> NamedInstance:
    a1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    a2 = np.array([[0.5, 0.0], [0.0, 2.0]])
    return NamedInstance(
        "stanford-urbano-bar",
        MatrixSet.from_matrices([a1, a2], ["B1", "B2"]),
        facts=(
            ("Abar1^4 = Id", "bar.a1_pow4"),
            ("Abar2 Abar1 Abar2 = Abar1", "bar.braid"),
            ("|Abar2^t e1| = 2^-t", "bar.axis_decay"),
        ),
    )


def prop_different_3d() -> NamedInstance:
    a = np.diag([2.0, 1.0, 1.0])
    b = np.array([[0.0, 1.0, 1.0]] * 3)
    return NamedInstance(
        "prop-different-3d",
        MatrixSet.from_matrices([a, b], ["A", "B"]),
        facts=(
            ("B e = 2 e", "pd.be"),
            ("B A^t = B for t <= 50", "pd.ba_t"),
            ("second component nondecreasing along trajectories from e", "pd.second_component"),
        ),
        test_vector=np.ones(3),
    )


def _integer_matrices(base: MatrixSet, nonnegative: bool) -> None:
    mats = base.matrices
    if not np.all(mats == np.round(mats)):
        raise ValueError("base matrices must have integer entries")
    if nonnegative and np.any(mats < 0):
        raise ValueError("base matrices must have nonnegative entries")


def mortality_reduction(base: MatrixSet, mortal_word: Word | None = None) -> NamedInstance:
    """Doubled set ``{2A}``: radius 0 if ``base`` is mortal, at least 2 otherwise."""
    _integer_matrices(base, nonnegative=True)
    facts = [("|A' e| >= 2^t on every product unless a zero product exists", "mort.growth")]
    if mortal_word is not None:
        facts.append(("the supplied word gives the zero product", "mort.zero_word"))
    return NamedInstance(
        "mortality-reduction",
        base.scaled(2.0),
        facts=tuple(facts),
        test_vector=np.ones(base.dim),
        mortal_word=None if mortal_word is None else tuple(mortal_word),
    )


def blockdiag_reduction(base: MatrixSet, mortal_word: Word | None = None) -> NamedInstance:
    """``diag(2A, ..., 2A)`` with ``n`` blocks and test vector ``(e1, ..., en)``."""
    _integer_matrices(base, nonnegative=False)
    n = base.dim
    mats = [np.kron(np.eye(n), 2.0 * a) for a in base]
    v = np.eye(n).reshape(-1)
    facts = [("|A' v| >= 2^t on every product unless a zero product exists", "mort.growth")]
    if mortal_word is not None:
        facts.append(("the supplied word gives the zero product", "mort.zero_word"))
    return NamedInstance(
        "blockdiag-reduction",
        MatrixSet.from_matrices(mats, [f"D{lab}" for lab in base.labels]),
        facts=tuple(facts),
        test_vector=v,
        mortal_word=None if mortal_word is None else tuple(mortal_word),
    )


# ---------------------------------------------------------------------------
# fact checks


def _close(a, b, tol=IDENTITY_TOL) -> bool:
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol)


def _growth_check(inst: NamedInstance, t_max: int = 8) -> bool:
    """Every product either vanishes on a known mortal word or satisfies |A'v| >= 2^t."""
    v = inst.test_vector
    for t in range(1, t_max + 1):
        _, mats = product_stack(inst.matrix_set, t)
        norms = np.linalg.norm(mats @ v, axis=1)
        zero = np.all(mats == 0, axis=(1, 2))
        if not np.all((norms >= 2.0**t * (1 - 1e-12)) | zero):
            return False
    return True


def _su(inst):
    return inst.matrix_set[0], inst.matrix_set[1]


_CHECKS: dict[str, Callable[[NamedInstance], bool]] = {
    "su.unit_det": lambda i: all(abs(np.linalg.det(a) - 1) <= IDENTITY_TOL for a in i.matrix_set),
    "su.a1_isometry": lambda i: abs(spectral_norm(_su(i)[0]) - 1) <= IDENTITY_TOL,
    "su.a2_smin": lambda i: abs(smallest_singular_value(_su(i)[1]) - 0.5) <= IDENTITY_TOL,
    "su.a1_pow4": lambda i: _close(np.linalg.matrix_power(_su(i)[0], 4), -np.eye(2)),
    "su.a2a1sq_a2": lambda i: _close(word_matrix(i.matrix_set, (1, 0, 0, 1)), _su(i)[0] @ _su(i)[0]),
    "bar.a1_pow4": lambda i: np.array_equal(np.linalg.matrix_power(_su(i)[0], 4), np.eye(2)),
    "bar.braid": lambda i: np.array_equal(word_matrix(i.matrix_set, (1, 0, 1)), _su(i)[0]),
    "bar.axis_decay": lambda i: all(
        np.linalg.norm(np.linalg.matrix_power(_su(i)[1], t) @ [1.0, 0.0]) == 2.0**-t for t in range(40)
    ),
    "pd.be": lambda i: np.array_equal(i.matrix_set[1] @ np.ones(3), 2 * np.ones(3)),
    "pd.ba_t": lambda i: all(
        np.array_equal(i.matrix_set[1] @ np.linalg.matrix_power(i.matrix_set[0], t), i.matrix_set[1])
        for t in range(1, 51)
    ),
    "pd.second_component": lambda i: _second_component_nondecreasing(i, 10),
    "mort.growth": _growth_check,
    "mort.zero_word": lambda i: np.all(word_matrix(i.matrix_set, i.mortal_word) == 0),
}


def _second_component_nondecreasing(inst: NamedInstance, t_max: int) -> bool:
    states = np.ones((1, 3))
    for _ in range(t_max):
        nxt = np.einsum("mij,nj->nmi", inst.matrix_set.matrices, states).reshape(-1, 3)
        if np.any(nxt[:, 1] < np.repeat(states[:, 1], len(inst.matrix_set))):
            return False
        states = nxt
    return True


def check_fact(inst: NamedInstance, fact_id: str) -> bool:
    return bool(_CHECKS[fact_id](inst))


_REGISTRY: dict[str, Callable[[], NamedInstance]] = {
    "stanford-urbano": stanford_urbano,
    "stanford-urbano-bar": stanford_urbano_bar,
    "prop-different-3d": prop_different_3d,
}


def instance_names() -> list[str]:
    return list(_REGISTRY)


def get_instance(name: str) -> NamedInstance:
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; known: {', '.join(_REGISTRY)}") from None


def words_from_labels(matrix_set: MatrixSet, names: Sequence[str]) -> list[Word]:
    """Parse words written as digit strings of 1-based mode numbers, e.g. ``"2111"``."""
    out = []
    for name in names:
        w = tuple(int(c) - 1 for c in name)
        if any(not 0 <= i < len(matrix_set) for i in w):
            raise ValueError(f"word {name!r} uses an unknown mode")
        out.append(w)
    return out
