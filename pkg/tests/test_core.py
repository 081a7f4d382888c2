import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qso import errors
from qso.core import (
    ChainSchedule,
    CubicHeredityMatrix,
    SimplexPoint,
    StochasticMatrix,
    random_cubic,
    random_simplex,
    random_stochastic,
    slice_block,
    validate_cubic,
    validate_simplex,
    validate_stochastic,
)


# --- validate_simplex -----------------------------------------------------

def test_vertex_is_valid():
    x = validate_simplex((1.0, 0.0, 0.0))
    assert x.coords.tolist() == [1.0, 0.0, 0.0]
    assert x.m == 3


def test_barycenter_is_valid():
    x = validate_simplex((1 / 3, 1 / 3, 1 / 3))
    assert abs(x.coords.sum() - 1) <= 1e-12


def test_unnormalized_rejected():
    with pytest.raises(errors.NotNormalized):
        validate_simplex((0.5, 0.5, 0.1))


def test_empty_rejected():
    with pytest.raises(errors.EmptyVector):
        validate_simplex([])


def test_negative_rejected_with_one_based_index():
    with pytest.raises(errors.NegativeCoordinate, match="x_2"):
        validate_simplex((1.1, -0.1, 0.0))


def test_tiny_negative_clamped():
    x = validate_simplex((0.5, 0.5 + 5e-16, -5e-16))
    assert x.coords[2] == 0.0
    assert (x.coords >= 0).all()


def test_input_not_mutated():
    raw = np.array([0.5, 0.5 + 5e-16, -5e-16])
    before = raw.copy()
    validate_simplex(raw)
    np.testing.assert_array_equal(raw, before)


def test_simplex_is_read_only():
    x = validate_simplex((0.5, 0.5))
    with pytest.raises(ValueError):
        x.coords[0] = 1.0


@pytest.mark.parametrize("raw", [[np.nan, 1.0], [np.inf, 0.0], [[0.5, 0.5]], "ab", [[1], [1, 2]], None])
def test_bad_simplex_inputs_raise_named_errors(raw):
    with pytest.raises(errors.QSOError):
        validate_simplex(raw)


# --- validate_stochastic --------------------------------------------------

def test_stochastic_rejects_bad_row():
    with pytest.raises(errors.RowNotNormalized, match="row 2"):
        validate_stochastic([[1.0, 0.0], [0.6, 0.6]])


def test_stochastic_rejects_negative():
    with pytest.raises(errors.NegativeEntry):
        validate_stochastic([[1.5, -0.5], [0.5, 0.5]])


def test_stochastic_rejects_non_square():
    with pytest.raises(errors.DimensionMismatch):
        validate_stochastic([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])


# --- validate_cubic -------------------------------------------------------

def test_zakharevich_tensor_valid(zak):
    assert validate_cubic(zak.entries) == zak


def test_uniform_tensor_valid():
    validate_cubic(np.full((4, 4, 4), 0.25))


def test_symmetry_violation():
    p = np.zeros((2, 2, 2))
    p[:, :, 0] = 1.0
    p[0, 1] = (1.0, 0.0)   # p_{12,1} = 1
    p[1, 0] = (0.0, 1.0)   # p_{21,1} = 0
    with pytest.raises(errors.SymmetryViolation, match=r"p_\(12,1\)"):
        validate_cubic(p)


def test_symmetry_is_exact():
    p = np.full((2, 2, 2), 0.5)
    p[0, 1] = (np.nextafter(0.5, 1), 0.5)
    with pytest.raises(errors.SymmetryViolation):
        validate_cubic(p)


def test_cubic_row_not_normalized():
    p = np.full((2, 2, 2), 0.5)
    p[1, 1] = (0.5, 0.6)
    with pytest.raises(errors.RowNotNormalized, match=r"\(2,2\)"):
        validate_cubic(p)


@pytest.mark.parametrize("shape", [(2, 2), (2, 2, 3), (0, 0, 0), (2, 2, 2, 2)])
def test_cubic_dimension_mismatch(shape):
    with pytest.raises(errors.DimensionMismatch):
        validate_cubic(np.ones(shape))


def test_cubic_negative_entry():
    p = np.full((2, 2, 2), 0.5)
    p[0, 0] = (1.5, -0.5)
    with pytest.raises(errors.NegativeEntry):
        validate_cubic(p)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3)),
              elements=st.floats(allow_nan=True, allow_infinity=True, width=64)))
def test_cubic_validation_is_total(raw):
    try:
        validate_cubic(raw)
    except errors.QSOError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.lists(st.one_of(st.floats(), st.integers(-3, 3)), max_size=6))
def test_simplex_validation_is_total(raw):
    try:
        validate_simplex(raw)
    except errors.QSOError:
        pass


# --- slicing --------------------------------------------------------------

def test_slice_zakharevich_blocks(zak):
    assert slice_block(zak, 1).entries.tolist() == [[1, 0, 0], [1, 0, 0], [0, 0, 1]]
    assert slice_block(zak, 2).entries.tolist() == [[1, 0, 0], [0, 1, 0], [0, 1, 0]]
    assert slice_block(zak, 3).entries.tolist() == [[0, 0, 1], [0, 1, 0], [0, 0, 1]]


def test_slice_uniform():
    P = CubicHeredityMatrix.uniform(3)
    for i in (1, 2, 3):
        np.testing.assert_array_equal(slice_block(P, i).entries, np.full((3, 3), 1 / 3))


@pytest.mark.parametrize("i", [0, 4, -1, 1.0, True])
def test_slice_out_of_range(zak, i):
    with pytest.raises(errors.IndexOutOfRange):
        slice_block(zak, i)


def test_slice_round_trip_and_validity():
    for seed in range(1000):
        m = 2 + seed % 5
        P = random_cubic(m, seed)
        for i in range(1, m + 1):
            block = slice_block(P, i)   # validates as StochasticMatrix
            for j in range(m):
                for k in range(m):
                    assert block.entries[j, k] == P.entries[i - 1, j, k]


# --- generators -----------------------------------------------------------

def test_random_simplex_normalized():
    for s in range(1000):
        assert abs(random_simplex(3, s).coords.sum() - 1) <= 1e-12


def test_random_cubic_exactly_symmetric():
    for s in range(50):
        p = random_cubic(4, s).entries
        assert (p == p.transpose(1, 0, 2)).all()


def test_random_stochastic_deterministic():
    assert random_stochastic(3, 7) == random_stochastic(3, 7)
    assert random_stochastic(3, 7) != random_stochastic(3, 8)


def test_random_stochastic_min_entry():
    q = random_stochastic(3, 1, min_entry=0.1).entries
    assert q.min() >= 0.1 - 1e-15


@pytest.mark.parametrize("gen", [random_simplex, random_stochastic, random_cubic])
def test_generators_reject_zero_dimension(gen):
    with pytest.raises(errors.InvalidDimension):
        gen(0, 1)


# --- schedules ------------------------------------------------------------

def test_constant_schedule_shares_objects(zak):
    s = ChainSchedule.constant(zak, StochasticMatrix.uniform(3))
    assert s.length is None
    assert s[0][0] is s[10**9][0]


def test_finite_schedule_exhausts(zak):
    s = ChainSchedule.finite([(zak, None), (zak, None)])
    assert s.length == 2
    with pytest.raises(errors.ScheduleExhausted):
        s[2]


def test_periodic_schedule_cycles(zak):
    U = CubicHeredityMatrix.uniform(3)
    s = ChainSchedule.periodic([(zak, None), (U, None)])
    assert s[4][0] is zak and s[5][0] is U


def test_schedule_rejects_mixed_dimensions(zak):
    with pytest.raises(errors.DimensionMismatch):
        ChainSchedule.finite([(zak, None), (CubicHeredityMatrix.uniform(2), None)])


def test_simplex_point_eq_and_array():
    x = SimplexPoint([0.25, 0.75])
    assert x == SimplexPoint(np.array([0.25, 0.75]))
    assert np.asarray(x).tolist() == [0.25, 0.75]
    assert list(x) == [0.25, 0.75]
