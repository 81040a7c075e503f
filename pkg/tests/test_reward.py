import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from utscale.reward import VerdictMatrix, select_best, subselect, vote_counts


def _matrix(bits, pid="p1"):
    bits = np.array(bits, dtype=np.uint8)
    return VerdictMatrix(
        problem_id=pid,
        solution_ids=tuple(f"s{i}" for i in range(bits.shape[0])),
        test_ids=tuple(f"t{j}" for j in range(bits.shape[1])),
        bits=bits,
    )


bit_matrices = st.integers(1, 5).flatmap(
    lambda n: st.integers(0, 5).flatmap(
        lambda m: st.lists(
            st.lists(st.integers(0, 1), min_size=m, max_size=m),
            min_size=n, max_size=n,
        )
    )
)


def test_vote_counts_row_sums():
    assert vote_counts(_matrix([[1, 0, 1], [0, 0, 0]])) == [2, 0]


def test_vote_counts_all_ones():
    assert vote_counts(_matrix(np.ones((3, 4)))) == [4, 4, 4]


def test_vote_counts_zero_tests():
    assert vote_counts(_matrix(np.zeros((3, 0)))) == [0, 0, 0]


def test_vote_counts_empty_matrix_rejected():
    with pytest.raises(ValueError):
        vote_counts(_matrix(np.zeros((0, 3))))


def test_select_best_unique_max():
    result = select_best(_matrix([[1, 0, 0], [1, 1, 1], [1, 0, 1]]))
    assert result.chosen_index == 1
    assert result.tie_set == (1,)
    assert not result.tie_broken


def test_select_best_tie_lowest_index():
    result = select_best(_matrix([[1, 1, 1], [1, 1, 1]]))
    assert result.chosen_index == 0
    assert result.tie_broken
    assert result.tie_set == (0, 1)


def test_select_best_zero_tests_degenerates_to_first():
    result = select_best(_matrix(np.zeros((4, 0))))
    assert result.chosen_index == 0
    assert result.tie_set == (0, 1, 2, 3)


def test_select_best_random_tie_is_seeded():
    matrix = _matrix([[1], [1], [1]])
    picks = {select_best(matrix, tie_rule="random", seed=s).chosen_index for s in range(20)}
    assert picks == {0, 1, 2}
    a = select_best(matrix, tie_rule="random", seed=5)
    b = select_best(matrix, tie_rule="random", seed=5)
    assert a.chosen_index == b.chosen_index


def test_select_best_random_requires_seed():
    with pytest.raises(ValueError, match="seed"):
        select_best(_matrix([[1]]), tie_rule="random")


def test_subselect_identity():
    matrix = _matrix([[1, 0, 1], [0, 1, 1]])
    same = subselect(matrix, [0, 1], [0, 1, 2])
    assert (same.bits == matrix.bits).all()
    assert same.solution_ids == matrix.solution_ids


def test_subselect_repeats_rows():
    matrix = _matrix([[1, 0], [0, 1]])
    doubled = subselect(matrix, [0, 0], [0, 1])
    assert doubled.bits.tolist() == [[1, 0], [1, 0]]


def test_subselect_hand_indexed():
    # rows [1], cols [2, 0] of [[1,0,1],[0,1,1]] -> [[1, 0]]
    matrix = _matrix([[1, 0, 1], [0, 1, 1]])
    sub = subselect(matrix, [1], [2, 0])
    assert sub.bits.tolist() == [[1, 0]]
    assert sub.solution_ids == ("s1",)
    assert sub.test_ids == ("t2", "t0")


def test_subselect_out_of_range():
    with pytest.raises(IndexError):
        subselect(_matrix([[1]]), [1], [0])


def test_matrix_serialization_roundtrip():
    matrix = _matrix([[1, 0], [0, 1], [1, 1]])
    again = VerdictMatrix.from_json(matrix.to_json())
    assert again == matrix


def _from_lists(bits):
    n = len(bits)
    m = len(bits[0]) if bits else 0
    return _matrix(np.array(bits, dtype=np.uint8).reshape(n, m))


@settings(max_examples=60, deadline=None)
@given(bit_matrices, st.randoms(use_true_random=False))
def test_column_permutation_preserves_counts(bits, rnd):
    matrix = _from_lists(bits)
    cols = list(range(matrix.n_tests))
    rnd.shuffle(cols)
    permuted = subselect(matrix, list(range(matrix.n_solutions)), cols)
    assert vote_counts(permuted) == vote_counts(matrix)


@settings(max_examples=60, deadline=None)
@given(bit_matrices)
def test_adding_column_changes_counts_by_at_most_one(bits):
    matrix = _from_lists(bits)
    extended = VerdictMatrix(
        problem_id="p1",
        solution_ids=matrix.solution_ids,
        test_ids=matrix.test_ids + ("extra",),
        bits=np.hstack([matrix.bits, np.ones((matrix.n_solutions, 1), dtype=np.uint8)]),
    )
    before, after = vote_counts(matrix), vote_counts(extended)
    assert all(0 <= b - a <= 1 for a, b in zip(before, after))


@settings(max_examples=60, deadline=None)
@given(bit_matrices, st.randoms(use_true_random=False))
def test_row_permutation_permutes_counts(bits, rnd):
    matrix = _from_lists(bits)
    rows = list(range(matrix.n_solutions))
    rnd.shuffle(rows)
    permuted = subselect(matrix, rows, list(range(matrix.n_tests)))
    original = vote_counts(matrix)
    assert vote_counts(permuted) == [original[i] for i in rows]
