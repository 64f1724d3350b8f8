"""Operator construction: frozen small cases plus structural invariants.

Expected coefficient vectors come from an independent exact-rational solve
of the polynomial-exactness conditions (Fractions oracle below), not from
the float path under test.
"""

import io
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimetic_detect.operators import (
    GridSizeError,
    apply_operator,
    build_grad_1d,
    build_grad_2d,
    build_weights_1d,
    build_weights_2d,
    dump_coo,
    extended_positions,
    face_positions,
    one_sided_stencil,
)

ORDERS = (2, 4, 6, 8)


def exact_stencil(nodes, target, degree):
    """Rational-arithmetic oracle for differentiation weights."""
    nodes = [Fraction(n).limit_denominator(10**9) for n in nodes]
    t = Fraction(target).limit_denominator(10**9)
    n = degree + 1
    rows = [[(x - t) ** p for x in nodes] for p in range(n)]
    rhs = [Fraction(1) if p == 1 else Fraction(0) for p in range(n)]
    # Gaussian elimination over Fractions
    M = [row[:] + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        M[col] = [v / M[col][col] for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [vr - f * vc for vr, vc in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


class TestOneSidedStencil:
    def test_central_difference(self):
        c = one_sided_stencil([-0.5, 0.5], 0.0, 1)
        assert np.allclose(c, [-1.0, 1.0], atol=1e-14)

    def test_boundary_row_k2(self):
        c = one_sided_stencil([0.0, 0.5, 1.5], 0.0, 2)
        expected = exact_stencil([0, Fraction(1, 2), Fraction(3, 2)], 0, 2)
        assert expected == [Fraction(-8, 3), Fraction(3), Fraction(-1, 3)]
        assert np.allclose(c, [float(e) for e in expected], atol=1e-13)

    def test_interior_k4(self):
        c = one_sided_stencil([-1.5, -0.5, 0.5, 1.5], 0.0, 3)
        expected = exact_stencil(
            [Fraction(-3, 2), Fraction(-1, 2), Fraction(1, 2), Fraction(3, 2)], 0, 3
        )
        assert expected == [
            Fraction(1, 24), Fraction(-9, 8), Fraction(9, 8), Fraction(-1, 24)
        ]
        assert np.allclose(c, [float(e) for e in expected], atol=1e-13)

    def test_duplicate_nodes_rejected(self):
        with pytest.raises(ValueError):
            one_sided_stencil([0.0, 0.0, 1.0], 0.0, 2)

    def test_wrong_node_count_rejected(self):
        with pytest.raises(ValueError):
            one_sided_stencil([0.0, 1.0], 0.0, 2)

    @given(
        degree=st.integers(1, 6),
        shift=st.integers(-3, 3),
        d=st.integers(0, 6),
    )
    @settings(deadline=None, max_examples=60)
    def test_differentiates_monomials(self, degree, shift, d):
        if d > degree:
            return
        nodes = np.arange(degree + 1) * 0.5 + shift
        target = float(shift) + 0.25
        c = one_sided_stencil(nodes, target, degree)
        val = float(np.dot(c, nodes**d))
        expected = d * target ** (d - 1) if d > 0 else 0.0
        assert abs(val - expected) <= 1e-9 * max(1.0, abs(expected))


class TestGrad1D:
    def test_shape_and_frozen_rows_k2_m5(self):
        g = build_grad_1d(2, 5)
        assert g.shape == (6, 7)
        dense = g.matrix.toarray()
        assert np.allclose(dense[0], [-8 / 3, 3, -1 / 3, 0, 0, 0, 0], atol=1e-13)
        assert np.allclose(dense[2], [0, 0, -1, 1, 0, 0, 0], atol=1e-13)
        assert np.allclose(dense[5], [0, 0, 0, 0, 1 / 3, -3, 8 / 3], atol=1e-13)

    def test_too_small_grid(self):
        with pytest.raises(GridSizeError):
            build_grad_1d(4, 7)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            build_grad_1d(3, 20)

    @pytest.mark.parametrize("k", ORDERS)
    def test_row_sums_vanish(self, k):
        g = build_grad_1d(k, 4 * k)
        sums = np.asarray(np.abs(g.matrix.sum(axis=1)))
        assert sums.max() <= 1e-12

    @pytest.mark.parametrize("k", ORDERS)
    def test_interior_rows_are_shifted_copies(self, k):
        m = 4 * k
        dense = build_grad_1d(k, m).matrix.toarray()
        ref = dense[k // 2, 1 : 1 + k]
        for f in range(k // 2, m - k // 2 + 1):
            start = f - k // 2 + 1
            row = dense[f]
            assert np.array_equal(row[start : start + k], ref)
            assert np.count_nonzero(row) <= k

    @pytest.mark.parametrize("k", ORDERS)
    def test_polynomial_exactness(self, k):
        m = 4 * k
        g = build_grad_1d(k, m)
        ext = extended_positions(m)
        fac = face_positions(m)
        for d in range(k + 1):
            du = d * fac ** (d - 1) if d > 0 else np.zeros(m + 1)
            err = np.max(np.abs(g.matrix @ ext**d - du))
            assert err <= 1e-9 * max(1.0, np.max(np.abs(du)))

    @pytest.mark.parametrize("k", ORDERS)
    def test_mirror_symmetry(self, k):
        m = 3 * k + 1
        g = build_grad_1d(k, m)
        u = np.random.default_rng(k).normal(size=m + 2)
        lhs = g.matrix @ u[::-1]
        rhs = -(g.matrix @ u)[::-1]
        assert np.max(np.abs(lhs - rhs)) <= 1e-12

    @pytest.mark.parametrize("k", (2, 4))
    def test_convergence_order(self, k):
        errs = []
        sizes = (16, 32, 64, 128)
        for m in sizes:
            h = np.pi / m
            g = build_grad_1d(k, m)
            u = np.sin(extended_positions(m) * h)
            err = np.max(np.abs((g.matrix @ u) / h - np.cos(face_positions(m) * h)))
            errs.append(err)
        slope = -np.polyfit(np.log(sizes), np.log(errs), 1)[0]
        assert abs(slope - k) <= 0.4


class TestWeights1D:
    def test_frozen_k2_m5(self):
        w = build_weights_1d(2, 5).values
        assert np.allclose(w, [3 / 8, 9 / 8, 1, 1, 9 / 8, 3 / 8], atol=1e-15)

    def test_sum_k2_m100(self):
        w = build_weights_1d(2, 100).values
        assert w.size == 101
        assert abs(w.sum() - 100) <= 1e-12

    def test_k4_m20_structure(self):
        w = build_weights_1d(4, 20).values
        assert np.all(w[4:17] == 1.0)
        assert np.allclose(w[:4], w[20:16:-1], atol=1e-15)
        assert abs(w[:4].sum() - 3.5) <= 1e-13
        assert abs(w[17:].sum() - 3.5) <= 1e-13

    @pytest.mark.parametrize("k", ORDERS)
    @pytest.mark.parametrize("mker", ("4k", "4k+1", "100"))
    def test_partition_invariants(self, k, mker):
        m = {"4k": 4 * k, "4k+1": 4 * k + 1, "100": 100}[mker]
        w = build_weights_1d(k, m).values
        assert w.size == m + 1
        assert np.all(w > 0)
        assert np.allclose(w, w[::-1], atol=0)
        assert np.all(w[k : m + 1 - k] == 1.0)
        assert abs(w.sum() - m) <= 1e-12

    @pytest.mark.parametrize("k", ORDERS)
    def test_face_quadrature_order(self, k):
        # weighted face sums integrate monomials of degree < k over [0, m]
        m = 50
        w = build_weights_1d(k, m).values
        fac = face_positions(m)
        for d in range(k):
            q = float(w @ fac**d)
            exact = m ** (d + 1) / (d + 1)
            assert abs(q - exact) <= 1e-9 * max(1.0, exact)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            build_weights_1d(5, 40)


class TestGrad2D:
    def test_dimensions(self):
        g = build_grad_2d(2, 4, 4)
        assert g.shape == (40, 36)
        assert g.n_x_faces == 20
        assert g.n_y_faces == 20

    def test_annihilates_constants(self):
        g = build_grad_2d(2, 4, 4)
        out = g.matrix @ np.ones(36)
        assert np.max(np.abs(out)) <= 1e-12

    def test_exact_on_linear_field(self):
        m = n = 8
        g = build_grad_2d(2, m, n)
        X = np.tile(extended_positions(m), (n + 2, 1))
        xb, yb = g.split_faces(g.matrix @ X.ravel())
        assert np.max(np.abs(xb - 1.0)) <= 1e-12
        assert np.max(np.abs(yb)) <= 1e-12

    @pytest.mark.parametrize("k", (2, 4))
    def test_separability(self, k):
        # a field constant in y maps to stacked 1D results and a zero y-block
        m, n = 3 * k + 2, 2 * k + 1
        g2 = build_grad_2d(k, m, n)
        g1 = build_grad_1d(k, m)
        a = np.random.default_rng(5).normal(size=m + 2)
        field = np.tile(a, (n + 2, 1)).ravel()
        xb, yb = g2.split_faces(g2.matrix @ field)
        expected = g1.matrix @ a
        assert np.max(np.abs(xb - expected)) <= 1e-12
        assert np.max(np.abs(yb)) <= 1e-12

    def test_rectangular_dimensions(self):
        g = build_grad_2d(2, 5, 4)
        # x-block: 4 rows of 6 faces; y-block: 5 levels... 5 cols x 5 faces
        assert g.shape == (4 * 6 + 5 * 5, 7 * 6)


class TestWeights2D:
    def test_length_and_positivity(self):
        w = build_weights_2d(2, 4, 4).values
        assert w.size == 40
        assert np.all(w > 0)

    def test_x_block_sum(self):
        w = build_weights_2d(2, 4, 4)
        g = build_grad_2d(2, 4, 4)
        assert abs(w.values[: g.n_x_faces].sum() - 16.0) <= 1e-12

    def test_x_block_tiling_m5_n4(self):
        w = build_weights_2d(2, 5, 4).values
        row = np.array([3 / 8, 9 / 8, 1, 1, 9 / 8, 3 / 8])
        assert np.allclose(w[:24], np.tile(row, 4), atol=1e-15)

    def test_y_block_structure(self):
        m, n = 4, 5
        w = build_weights_2d(2, m, n)
        py = build_weights_1d(2, n).values
        y_block = w.values[w2_nx(m, n):]
        assert np.allclose(y_block, np.repeat(py, m), atol=1e-15)


def w2_nx(m, n):
    return n * (m + 1)


class TestApplyOperator:
    def test_constant_field(self):
        g = build_grad_1d(2, 5)
        assert np.allclose(apply_operator(g, np.ones(7)), np.zeros(6), atol=1e-14)

    def test_linear_field(self):
        g = build_grad_1d(2, 5)
        out = apply_operator(g, extended_positions(5))
        assert np.allclose(out, np.ones(6), atol=1e-13)

    def test_quadratic_field(self):
        g = build_grad_1d(2, 5)
        out = apply_operator(g, extended_positions(5) ** 2)
        assert np.allclose(out, [0, 2, 4, 6, 8, 10], atol=1e-12)

    def test_length_mismatch(self):
        g = build_grad_1d(2, 5)
        with pytest.raises(ValueError):
            apply_operator(g, np.ones(8))


def test_dump_coo_round_trip():
    g = build_grad_1d(2, 5)
    buf = io.StringIO()
    dump_coo(g, buf)
    rebuilt = np.zeros(g.shape)
    for line in buf.getvalue().splitlines():
        r, c, v = line.split()
        rebuilt[int(r), int(c)] = float(v)
    assert np.array_equal(rebuilt, g.matrix.toarray())
