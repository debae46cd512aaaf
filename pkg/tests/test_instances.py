import numpy as np
import pytest
from fractions import Fraction

from switchstab.instances import (
    STANFORD_URBANO_13,
    blockdiag_reduction,
    check_fact,
    get_instance,
    instance_names,
    mortality_reduction,
    stanford_urbano_words,
    words_from_labels,
)
from switchstab.io import parse_matrix_set, serialize_matrix_set
from switchstab.linalg import MatrixSet

MORTAL = MatrixSet.from_matrices([[[0, 1], [0, 0]], [[0, 0], [1, 0]]])
UNIPOTENT = MatrixSet.from_matrices([[[1, 1], [0, 1]], [[1, 0], [1, 1]]])


def _all_instances():
    out = [get_instance(n) for n in instance_names()]
    out.append(mortality_reduction(MORTAL, mortal_word=(0, 0)))
    out.append(mortality_reduction(UNIPOTENT))
    out.append(blockdiag_reduction(MORTAL, mortal_word=(0, 0)))
    out.append(blockdiag_reduction(UNIPOTENT))
    return out


@pytest.mark.parametrize("inst", _all_instances(), ids=lambda i: i.name)
def test_every_listed_fact_holds(inst):
    assert inst.facts
    for description, fact_id in inst.facts:
        assert check_fact(inst, fact_id), description


def test_registry():
    assert instance_names() == ["stanford-urbano", "stanford-urbano-bar", "prop-different-3d"]
    with pytest.raises(KeyError):
        get_instance("nope")


@pytest.mark.parametrize("name", ["stanford-urbano", "stanford-urbano-bar", "prop-different-3d"])
def test_file_round_trip_bit_exact(name):
    ms = get_instance(name).matrix_set
    text = serialize_matrix_set(ms)
    back = parse_matrix_set(text)
    assert back.matrices.tobytes() == ms.matrices.tobytes()
    assert tuple(back.labels) == tuple(ms.labels)
    assert serialize_matrix_set(back) == text


def test_sqrt_half_serialized_from_double():
    text = serialize_matrix_set(get_instance("stanford-urbano").matrix_set)
    assert format(np.sqrt(2.0) / 2.0, ".17g") in text


def test_thirteen_words():
    words = stanford_urbano_words()
    assert len(words) == 13 == len(set(words))
    assert words[0] == (1,) and words[1] == (1, 0)
    assert words == words_from_labels(get_instance("stanford-urbano").matrix_set, STANFORD_URBANO_13)


def test_bar_algebra_exact_in_fractions():
    a1 = [[Fraction(0), Fraction(1)], [Fraction(-1), Fraction(0)]]
    a2 = [[Fraction(1, 2), Fraction(0)], [Fraction(0), Fraction(2)]]

    def mul(x, y):
        return [[sum(x[i][k] * y[k][j] for k in range(2)) for j in range(2)] for i in range(2)]

    ident = [[1, 0], [0, 1]]
    p = ident
    for _ in range(4):
        p = mul(p, a1)
    assert p == ident
    assert mul(mul(a2, a1), a2) == a1
    bar = get_instance("stanford-urbano-bar").matrix_set
    assert np.array_equal(bar.matrices, np.array([[[float(v) for v in r] for r in m] for m in (a1, a2)]))


def test_mortality_reduction_scales_by_two():
    inst = mortality_reduction(UNIPOTENT)
    assert np.array_equal(inst.matrix_set.matrices, 2 * UNIPOTENT.matrices)


def test_mortality_reduction_rejects_bad_bases():
    with pytest.raises(ValueError):
        mortality_reduction(MatrixSet.from_matrices([[[0.5, 0], [0, 1]]]))
    with pytest.raises(ValueError):
        mortality_reduction(MatrixSet.from_matrices([[[-1, 0], [0, 1]]]))


def test_blockdiag_structure():
    inst = blockdiag_reduction(UNIPOTENT)
    a = inst.matrix_set[0]
    assert a.shape == (4, 4)
    assert np.array_equal(a[:2, :2], 2 * UNIPOTENT[0]) and np.array_equal(a[2:, 2:], 2 * UNIPOTENT[0])
    assert np.array_equal(inst.test_vector, [1, 0, 0, 1])


def test_mortal_base_has_zero_product_at_length_two():
    from switchstab.linalg import product_stack

    for inst in (mortality_reduction(MORTAL), blockdiag_reduction(MORTAL)):
        words, mats = product_stack(inst.matrix_set, 2)
        zero = [tuple(w) for w, a in zip(words, mats) if not a.any()]
        assert (0, 0) in zero and (1, 1) in zero


def test_identity_base_growth_is_exact():
    from switchstab.linalg import product_stack

    inst = mortality_reduction(MatrixSet.from_matrices([np.eye(2)]))
    for t in range(1, 6):
        _, mats = product_stack(inst.matrix_set, t)
        assert np.allclose(np.linalg.norm(mats @ inst.test_vector, axis=1), 2.0**t * np.sqrt(2))
    block = blockdiag_reduction(MatrixSet.from_matrices([np.eye(2)]))
    assert np.array_equal(block.matrix_set[0], 2 * np.eye(4))
    _, mats = product_stack(block.matrix_set, 3)
    assert np.allclose(np.linalg.norm(mats @ block.test_vector, axis=1), 8 * np.sqrt(2))


def test_blockdiag_non_mortal_growth_to_six():
    from switchstab.instances import _growth_check

    assert _growth_check(blockdiag_reduction(UNIPOTENT), t_max=6)


def test_prop_different_facts_exact(pd3):
    a, b = pd3.matrices
    e = np.ones(3)
    assert np.array_equal(b @ e, 2 * e)
    p = np.eye(3)
    for _ in range(50):
        p = p @ a
        assert np.array_equal(b @ p, b)
