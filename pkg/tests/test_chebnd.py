"""Unit tests for tensor-product interpolation and batched evaluation."""

import numpy as np
import pytest

from chebnash.cheb1d import coeffs_from_samples, make_basis, to_reference
from chebnash.chebnd import (
    CoefTensor,
    TensorStack,
    basis_matrix,
    eval_axis,
    eval_diagonal_batch,
    eval_full,
    make_gather_index,
    stack_coeffs,
    tensor_coeffs,
)


def grid_samples(fn, bases):
    """Sample fn (vectorised over the last axis) on the node product grid."""
    grids = np.meshgrid(*(b.nodes for b in bases), indexing="ij")
    return fn(*grids)


def trig_eval_nd(coefs, point):
    """Direct multi-sum through the trigonometric definition of T_l."""
    vecs = [np.cos(np.arange(n) * np.arccos(x)) for n, x in zip(coefs.shape, point)]
    out = coefs
    for v in vecs:
        out = np.tensordot(v, out, axes=([0], [0]))
    return float(out)


def random_stack(rng, ndim, max_degree, count):
    bases = tuple(
        make_basis(int(rng.integers(1, max_degree + 1)), -1.0, 1.0) for _ in range(ndim)
    )
    shape = tuple(b.size for b in bases) + (count,)
    return TensorStack(bases, rng.standard_normal(shape))


# ---------------------------------------------------------------------------
# tensor_coeffs
# ---------------------------------------------------------------------------

def test_constant_surface_single_coefficient():
    bases = (make_basis(3, -1.0, 1.0), make_basis(2, -1.0, 1.0))
    t = tensor_coeffs(np.ones((4, 3)), bases)
    expect = np.zeros((4, 3))
    expect[0, 0] = 1.0
    np.testing.assert_allclose(t.coefficients, expect, atol=1e-15)


def test_bilinear_surface_is_t1_t1():
    bases = (make_basis(2, -1.0, 1.0), make_basis(2, -1.0, 1.0))
    t = tensor_coeffs(grid_samples(lambda x, y: x * y, bases), bases)
    expect = np.zeros((3, 3))
    expect[1, 1] = 1.0
    np.testing.assert_allclose(t.coefficients, expect, atol=1e-15)


def test_separable_function_gives_outer_product():
    rng = np.random.default_rng(31)
    bx = make_basis(5, -1.0, 1.0)
    by = make_basis(7, -1.0, 1.0)
    fx = rng.standard_normal(bx.size)
    gy = rng.standard_normal(by.size)
    t = tensor_coeffs(np.outer(fx, gy), (bx, by))
    cx = coeffs_from_samples(fx, bx).coefficients
    cy = coeffs_from_samples(gy, by).coefficients
    np.testing.assert_allclose(t.coefficients, np.outer(cx, cy), atol=1e-12)


def test_tensor_coeffs_shape_mismatch():
    bases = (make_basis(2, -1.0, 1.0), make_basis(2, -1.0, 1.0))
    with pytest.raises(ValueError):
        tensor_coeffs(np.ones((3, 4)), bases)


def test_tensor_coeffs_rejects_nan():
    bases = (make_basis(1, -1.0, 1.0),)
    with pytest.raises(ValueError):
        tensor_coeffs(np.array([1.0, np.nan]), bases)


def test_stack_coeffs_members_match_single_transforms():
    rng = np.random.default_rng(30)
    bases = (make_basis(3, -1.0, 1.0), make_basis(4, -1.0, 1.0))
    samples = rng.standard_normal((4, 5, 6))
    st = stack_coeffs(samples, bases)
    assert st.count == 6
    for j in range(6):
        single = tensor_coeffs(samples[:, :, j], bases)
        np.testing.assert_allclose(st.coefficients[:, :, j], single.coefficients,
                                   atol=1e-13)


def test_interpolation_invariant_at_node_tuples():
    rng = np.random.default_rng(32)
    bases = tuple(make_basis(n, 0.0, 2.0) for n in (4, 3, 2))
    samples = rng.standard_normal(tuple(b.size for b in bases))
    t = tensor_coeffs(samples, bases)
    refs = [to_reference(b, b.nodes) for b in bases]
    for idx in np.ndindex(samples.shape):
        point = [refs[d][idx[d]] for d in range(3)]
        assert eval_full(t, point) == pytest.approx(samples[idx], rel=1e-10, abs=1e-12)


# ---------------------------------------------------------------------------
# eval_axis
# ---------------------------------------------------------------------------

def test_eval_axis_at_own_nodes_reproduces_samples():
    rng = np.random.default_rng(33)
    bases = (make_basis(4, -1.0, 1.0), make_basis(3, -1.0, 1.0))
    samples = rng.standard_normal((5, 4))
    t = tensor_coeffs(samples, bases)
    rows = eval_axis(t, to_reference(bases[0], bases[0].nodes))   # (4, 5): dim2 coeffs x points
    for k in range(5):
        line = coeffs_from_samples(samples[k], bases[1]).coefficients
        np.testing.assert_allclose(rows[:, k], line, atol=1e-10)


def test_eval_axis_single_point_composes_to_eval_full():
    rng = np.random.default_rng(34)
    bases = (make_basis(3, -1.0, 1.0), make_basis(5, -1.0, 1.0))
    t = tensor_coeffs(rng.standard_normal((4, 6)), bases)
    x, y = 0.37, -0.21
    bound = eval_axis(t, [x])                     # (6, 1)
    inner = CoefTensor((bases[1],), np.ascontiguousarray(bound[:, 0]))
    assert eval_full(inner, [y]) == pytest.approx(eval_full(t, [x, y]), abs=1e-13)


def test_eval_axis_degree_zero_rows_equal_coefficient_slice():
    bases = (make_basis(0, -1.0, 1.0), make_basis(2, -1.0, 1.0))
    coefs = np.arange(3.0).reshape(1, 3)
    t = CoefTensor(bases, coefs)
    out = eval_axis(t, [-0.5, 0.0, 0.9])
    for j in range(3):
        np.testing.assert_allclose(out[:, j], coefs[0], atol=1e-15)


def test_eval_axis_stack_shape_and_values():
    rng = np.random.default_rng(35)
    st = random_stack(rng, 2, 4, 6)
    pts = rng.uniform(-1, 1, 5)
    out = eval_axis(st, pts)
    assert out.shape == (st.bases[1].size, 5, 6)
    for j in range(6):
        single = eval_axis(st.member(j), pts)
        np.testing.assert_allclose(out[:, :, j], single, atol=1e-12)


def test_eval_axis_rejects_empty_and_out_of_range():
    t = CoefTensor((make_basis(2, -1, 1),), np.ones(3))
    with pytest.raises(ValueError):
        eval_axis(t, [])
    with pytest.raises(ValueError):
        eval_axis(t, [1.5])


def test_basis_matrix_matches_trig():
    pts = np.linspace(-1, 1, 9)
    B = basis_matrix(pts, 6)
    expect = np.cos(np.arange(7)[None, :] * np.arccos(pts)[:, None])
    np.testing.assert_allclose(B, expect, atol=1e-13)


# ---------------------------------------------------------------------------
# gather index
# ---------------------------------------------------------------------------

def test_gather_identity_for_single_member():
    g = make_gather_index((3, 2), 1)
    np.testing.assert_array_equal(g.flat, np.arange(2))


def test_gather_two_members_hand_enumeration():
    g = make_gather_index((2,), 2)
    np.testing.assert_array_equal(g.flat, [0, 3])


def test_gather_take_equals_member_loop():
    rng = np.random.default_rng(36)
    st = random_stack(rng, 3, 3, 7)
    pts = rng.uniform(-1, 1, 7)
    cross = eval_axis(st, pts)                       # (rest..., 7, 7)
    g = make_gather_index(st.coefficients.shape[:-1], 7)
    picked = g.take(cross)
    for j in range(7):
        single = eval_axis(st.member(j), [pts[j]])[..., 0]
        np.testing.assert_allclose(picked[..., j], single, atol=1e-12)


def test_gather_determinism():
    a = make_gather_index((4, 3, 2), 5)
    b = make_gather_index((4, 3, 2), 5)
    np.testing.assert_array_equal(a.flat, b.flat)
    assert a.member_shape == b.member_shape and a.count == b.count


def test_gather_index_length_range_injectivity():
    rng = np.random.default_rng(47)
    for _ in range(10):
        ndim = int(rng.integers(1, 4))
        shape = tuple(int(rng.integers(1, 6)) for _ in range(ndim))
        count = int(rng.integers(1, 20))
        g = make_gather_index(shape, count)
        rest = int(np.prod(shape[1:])) if ndim > 1 else 1
        assert g.flat.size == rest * count
        assert g.flat.min() >= 0 and g.flat.max() < rest * count * count
        assert np.unique(g.flat).size == g.flat.size


def test_gather_rejects_bad_layout():
    with pytest.raises(ValueError):
        make_gather_index((0, 2), 3)
    with pytest.raises(ValueError):
        make_gather_index((2, 2), 0)


# ---------------------------------------------------------------------------
# eval_diagonal_batch
# ---------------------------------------------------------------------------

def test_diagonal_batch_consistent_with_shared_point():
    rng = np.random.default_rng(37)
    bases = (make_basis(3, -1, 1), make_basis(2, -1, 1))
    member = rng.standard_normal((4, 3))
    st = TensorStack(bases, np.repeat(member[:, :, None], 5, axis=2))
    g = make_gather_index((4, 3), 5)
    out = eval_diagonal_batch(st, np.full(5, 0.4), g)
    single = eval_axis(CoefTensor(bases, member), [0.4])[..., 0]
    for j in range(5):
        np.testing.assert_allclose(out.coefficients[..., j], single, atol=1e-13)


def test_diagonal_batch_matches_independent_eval_axis():
    rng = np.random.default_rng(38)
    st = random_stack(rng, 2, 5, 3)
    pts = rng.uniform(-1, 1, 3)
    g = make_gather_index(st.coefficients.shape[:-1], 3)
    out = eval_diagonal_batch(st, pts, g)
    for j in range(3):
        expect = eval_axis(st.member(j), [pts[j]])[..., 0]
        np.testing.assert_allclose(out.coefficients[..., j], expect, atol=1e-12)


def test_diagonal_batch_agrees_with_gather_route():
    rng = np.random.default_rng(39)
    st = random_stack(rng, 3, 4, 6)
    pts = rng.uniform(-1, 1, 6)
    g = make_gather_index(st.coefficients.shape[:-1], 6)
    direct = eval_diagonal_batch(st, pts, g).coefficients
    gathered = g.take(eval_axis(st, pts))
    np.testing.assert_allclose(direct, gathered, atol=1e-12)


def test_full_binding_gives_per_member_scalars():
    rng = np.random.default_rng(40)
    st = random_stack(rng, 3, 3, 4)
    pts = rng.uniform(-1, 1, (3, 4))
    cur = st
    for d in range(3):
        g = make_gather_index(cur.coefficients.shape[:-1], 4)
        cur = eval_diagonal_batch(cur, pts[d], g)
    for j in range(4):
        expect = eval_full(st.member(j), pts[:, j])
        assert cur.coefficients[j] == pytest.approx(expect, abs=1e-11)


def test_diagonal_batch_rejects_length_mismatch():
    rng = np.random.default_rng(41)
    st = random_stack(rng, 2, 3, 4)
    g = make_gather_index(st.coefficients.shape[:-1], 4)
    with pytest.raises(ValueError):
        eval_diagonal_batch(st, np.zeros(3), g)


def test_diagonal_batch_rejects_stale_gather():
    rng = np.random.default_rng(42)
    st = random_stack(rng, 2, 3, 4)
    stale = make_gather_index((99, 2), 4)
    with pytest.raises(ValueError):
        eval_diagonal_batch(st, np.zeros(4), stale)


# ---------------------------------------------------------------------------
# eval_full
# ---------------------------------------------------------------------------

def test_eval_full_constant():
    bases = (make_basis(2, -1, 1), make_basis(2, -1, 1))
    coefs = np.zeros((3, 3))
    coefs[0, 0] = 1.0
    t = CoefTensor(bases, coefs)
    for pt in ([0.0, 0.0], [0.9, -0.9], [1.0, 1.0]):
        assert eval_full(t, pt) == pytest.approx(1.0, abs=1e-14)


def test_eval_full_t1_t1():
    bases = (make_basis(1, -1, 1), make_basis(1, -1, 1))
    coefs = np.zeros((2, 2))
    coefs[1, 1] = 1.0
    t = CoefTensor(bases, coefs)
    assert eval_full(t, [0.2, -0.5]) == pytest.approx(-0.1, abs=1e-15)


def test_eval_full_matches_direct_summation():
    rng = np.random.default_rng(43)
    bases = tuple(make_basis(n, -1, 1) for n in (3, 4, 2))
    coefs = rng.standard_normal((4, 5, 3))
    t = CoefTensor(bases, coefs)
    pt = rng.uniform(-1, 1, 3)
    assert eval_full(t, pt) == pytest.approx(trig_eval_nd(coefs, pt), abs=1e-12)


def test_eval_full_dimension_mismatch():
    t = CoefTensor((make_basis(2, -1, 1),), np.ones(3))
    with pytest.raises(ValueError):
        eval_full(t, [0.1, 0.2])


# ---------------------------------------------------------------------------
# module invariants
# ---------------------------------------------------------------------------

def test_batched_naive_equivalence():
    rng = np.random.default_rng(44)
    for trial in range(20):
        ndim = int(rng.integers(1, 5))
        count = int(rng.integers(1, 33))
        st = random_stack(rng, ndim, 6, count)
        pts = rng.uniform(-1, 1, (ndim, count))
        cur = st
        for d in range(ndim):
            g = make_gather_index(cur.coefficients.shape[:-1], count)
            cur = eval_diagonal_batch(cur, pts[d], g)
        naive = np.array([eval_full(st.member(j), pts[:, j]) for j in range(count)])
        np.testing.assert_allclose(cur.coefficients, naive, atol=1e-11)


def test_axis_order_consistency():
    rng = np.random.default_rng(45)
    bases = tuple(make_basis(n, -1, 1) for n in (4, 3, 5))
    coefs = rng.standard_normal((5, 4, 6))
    t = CoefTensor(bases, coefs)
    pt = rng.uniform(-1, 1, 3)
    # bind in natural order via eval_full, and in reversed order manually
    rev = CoefTensor(bases[::-1], np.ascontiguousarray(coefs.transpose(2, 1, 0)))
    assert eval_full(rev, pt[::-1]) == pytest.approx(eval_full(t, pt), abs=1e-11)


def test_multidimensional_polynomial_exactness():
    rng = np.random.default_rng(46)
    degrees = (3, 2, 4)
    bases = tuple(make_basis(n, -1.0, 1.0) for n in degrees)
    mono = rng.standard_normal(tuple(d + 1 for d in degrees))

    def poly(x, y, z):
        return np.polynomial.polynomial.polyval3d(x, y, z, mono)

    samples = grid_samples(poly, bases)
    t = tensor_coeffs(samples, bases)
    pts = rng.uniform(-1, 1, (100, 3))
    got = np.array([eval_full(t, p) for p in pts])
    np.testing.assert_allclose(got, poly(*pts.T), atol=1e-10)
