"""Algebra layer: products, averaging, symmetry split, coefficient matrices."""

import random
from fractions import Fraction

import numpy as np
import pytest

from flagcert.graphs import (
    Graph,
    canonical_key,
    complement,
    enumerate_graphs,
    graph_index,
    pair_index,
)
from flagcert.flags import (
    TYPE_VERTEX,
    Flag,
    complement_type,
    enumerate_flags,
    enumerate_types,
    one_vertex_extension,
    subset_orbit,
    unit_flag,
)
from flagcert.densities import averaged_pair_counts, averaged_pair_denominator
from flagcert.algebra import (
    averaged_product_coeff,
    average,
    basis_matrix,
    flag_vector,
    invariant_split,
    product_expand,
    product_expand_vec,
    quadratic_coeff_matrices,
    raw_coefficient_tables,
)


def test_unit_product():
    sigma = enumerate_types(4)[3]
    unit = unit_flag(sigma)
    prod = product_expand(unit, unit, sigma.k)
    assert prod.coeffs == ((0, Fraction(1)),)


def test_edge_square_over_type0():
    from flagcert.flags import TYPE_EMPTY
    edge = Flag(TYPE_EMPTY, Graph(2, 1), ())
    prod = product_expand(edge, edge, 4)
    c4mask = sum(1 << pair_index(*e) for e in [(0, 1), (1, 2), (2, 3), (0, 3)])
    c4_idx = graph_index(Graph(4, c4mask))
    assert prod.as_dict()[c4_idx] == Fraction(2, 3)


def test_product_coefficients_sum_to_one():
    rng = random.Random(8)
    for _ in range(10):
        sigma = rng.choice(enumerate_types(4))
        f1 = rng.choice(enumerate_flags(sigma, 5))
        f2 = rng.choice(enumerate_flags(sigma, 5))
        prod = product_expand(f1, f2, 6)
        assert sum(c for _, c in prod.coeffs) == 1


def test_worked_example_edge_flag_square():
    """Square of the rooted edge = the two rooted graphs where both other
    vertices are neighbors of the root, each with coefficient one."""
    edge = enumerate_flags(TYPE_VERTEX, 2)[1]
    prod = product_expand(edge, edge, 3)
    flags3 = enumerate_flags(TYPE_VERTEX, 3)
    expected = {i: Fraction(1) for i, f in enumerate(flags3)
                if f.graph.has_edge(0, 1) and f.graph.has_edge(0, 2)}
    assert prod.as_dict() == expected
    assert len(expected) == 2  # with and without the far edge


def test_average_examples():
    edge = flag_vector(TYPE_VERTEX, 2, {1: Fraction(1)})
    out = average(edge)
    assert out == {canonical_key(Graph(2, 1)): Fraction(1)}
    # rooted path, root at center: q = 1/3
    flags3 = enumerate_flags(TYPE_VERTEX, 3)
    center_idx = next(
        i for i, f in enumerate(flags3)
        if f.graph.edge_count() == 2 and len(f.graph.neighbors(0)) == 2)
    v = flag_vector(TYPE_VERTEX, 3, {center_idx: Fraction(1)})
    path_key = canonical_key(Graph(3, (1 << pair_index(0, 1)) | (1 << pair_index(1, 2))))
    assert average(v) == {path_key: Fraction(1, 3)}


def test_average_respects_complement():
    sigma = enumerate_types(2)[1]
    flags = enumerate_flags(sigma, 4)
    rng = random.Random(3)
    for _ in range(10):
        i = rng.randrange(len(flags))
        v = flag_vector(sigma, 4, {i: Fraction(1)})
        avg = average(v)
        from flagcert.flags import complement_flag
        cf = complement_flag(flags[i])
        cv = flag_vector(cf.sigma, 4,
                         {_class_index(cf): Fraction(1)})
        cavg = average(cv)
        assert {canonical_key(complement(_graph_of(k))): val
                for k, val in avg.items()} == cavg


def _graph_of(key):
    for g in enumerate_graphs(key.order):
        if canonical_key(g) == key:
            return g
    raise AssertionError


def _class_index(f):
    from flagcert.flags import flag_canonical_key, flag_index_table
    return flag_index_table(f.sigma, f.order)[flag_canonical_key(f)]


def test_invariant_split_dimensions():
    for sigma in enumerate_types(4):
        plus, minus = invariant_split(sigma)
        assert len(plus) + len(minus) == 16
        # symmetric part has one vector per orbit
        orbits = {subset_orbit(sigma, s) for s in range(16)}
        assert len(plus) == len(orbits)
    k4 = [t for t in enumerate_types(4) if t.graph.edge_count() == 6][0]
    plus, minus = invariant_split(k4)
    assert len(plus) == 5 and len(minus) == 11
    # orbit sums have coefficient one per member
    for v in plus:
        assert all(c == 1 for _, c in v.coeffs)


def test_invariant_split_spans_kernel_of_averaging():
    """Group-averaging a minus vector gives zero; plus vectors are fixed."""
    from flagcert.flags import aut_group
    for sigma in enumerate_types(4)[:5]:
        auts = aut_group(sigma)
        plus, minus = invariant_split(sigma)
        for vec in minus:
            acc = [Fraction(0)] * 16
            dense = vec.dense()
            for p in auts:
                for s in range(16):
                    img = 0
                    for i in range(4):
                        if s >> p[i] & 1:
                            img |= 1 << i
                    acc[img] += dense[s]
            assert all(v == 0 for v in acc)
        for vec in plus:
            dense = vec.dense()
            for p in auts:
                moved = [Fraction(0)] * 16
                for s in range(16):
                    img = 0
                    for i in range(4):
                        if s >> p[i] & 1:
                            img |= 1 << i
                    moved[img] += dense[s]
                assert moved == dense


def test_quadratic_matrices_symmetry_and_zero_rows():
    k4 = [t for t in enumerate_types(4) if t.graph.edge_count() == 6][0]
    plus, _ = invariant_split(k4)
    mats = quadratic_coeff_matrices(k4, plus, 6)
    assert len(mats) == 156
    empty_idx = graph_index(Graph(6, 0))
    assert all(v == 0 for row in mats[empty_idx].entries for v in row)
    for cm in mats[:20]:
        m = cm.entries
        assert all(m[a][b] == m[b][a] for a in range(len(m)) for b in range(len(m)))
    with pytest.raises(ValueError):
        quadratic_coeff_matrices(k4, plus, 5)


def test_two_step_equals_direct_type1_order3_exhaustive():
    raw = raw_coefficient_tables(TYPE_VERTEX, 3)
    for gi, host in enumerate(enumerate_graphs(3)):
        for a in range(2):
            for b in range(2):
                va = flag_vector(TYPE_VERTEX, 2, {a: Fraction(1)})
                vb = flag_vector(TYPE_VERTEX, 2, {b: Fraction(1)})
                assert averaged_product_coeff(TYPE_VERTEX, va, vb, 3, host) \
                    == raw[gi][a][b]


def test_two_step_equals_direct_order4_sampled():
    rng = random.Random(17)
    graphs = enumerate_graphs(6)
    for sigma in rng.sample(enumerate_types(4), 2):
        raw = raw_coefficient_tables(sigma, 6)
        for _ in range(4):
            a, b, gi = rng.randrange(16), rng.randrange(16), rng.randrange(156)
            va = flag_vector(sigma, 5, {a: Fraction(1)})
            vb = flag_vector(sigma, 5, {b: Fraction(1)})
            assert averaged_product_coeff(sigma, va, vb, 6, graphs[gi]) \
                == raw[gi][a][b]


def test_plus_minus_orthogonality_all_types():
    """Cross quadratic forms of the two parity parts vanish on every host."""
    for sigma in enumerate_types(4):
        plus, minus = invariant_split(sigma)
        counts = np.array(averaged_pair_counts(sigma, 6), dtype=np.int64)
        bp = _int_basis(plus)
        bm = _int_basis(minus)
        cross = np.einsum("ia,gij,jb->gab", bp, counts, bm)
        assert not cross.any()


def _int_basis(vectors):
    rows = basis_matrix(vectors, 16)
    return np.array([[int(v) for v in row] for row in rows], dtype=np.int64)


def test_orthogonality_through_expand_and_average():
    """Same vanishing via the independent expand-then-average path."""
    sigma = enumerate_types(4)[4]
    plus, minus = invariant_split(sigma)
    prod = product_expand_vec(plus[1], minus[0], 6)
    assert average(prod) == {}


def test_complement_symmetry_of_raw_tables():
    sigma = enumerate_types(4)[1]
    csigma = complement_type(sigma)
    raw_s = averaged_pair_counts(sigma, 6)
    raw_c = averaged_pair_counts(csigma, 6)
    for gi, g in enumerate(enumerate_graphs(6)):
        cgi = graph_index(complement(g))
        for a in range(16):
            for b in range(16):
                assert raw_s[gi][a][b] == raw_c[cgi][15 ^ a][15 ^ b]


def test_psd_quadratic_form_exact_floor():
    """Finite-order positivity: the extension-count quadratic form is a sum
    of squares minus its diagonal, so for PSD A the value of <A, M_G> is
    bounded below by minus the averaged diagonal term.  (The unqualified
    per-graph inequality <A, M_G> >= 0 is false at finite order; the
    companion test exhibits the standard counterexample.)"""
    rng = random.Random(23)
    denom = averaged_pair_denominator(6, 4)
    for sigma in rng.sample(enumerate_types(4), 3):
        counts = averaged_pair_counts(sigma, 6)
        b = [[Fraction(rng.randint(-3, 3)) for _ in range(2)] for _ in range(16)]
        A = [[sum(b[i][r] * b[j][r] for r in range(2)) for j in range(16)]
             for i in range(16)]
        diag_bound = _diagonal_correction(sigma, A)
        for gi in range(0, 156, 7):
            val = sum(A[a][bb] * Fraction(counts[gi][a][bb], denom)
                      for a in range(16) for bb in range(16))
            assert val >= -diag_bound[gi]


def _diagonal_correction(sigma, A):
    """(1/(n)_k) * sum_theta sum_a A_aa N_theta[a] / (m(m-1)) per host."""
    from flagcert.densities import _injection_profiles
    out = []
    for profile in _injection_profiles(6, 4):
        total = Fraction(0)
        for exts in profile.get(sigma.graph.mask, ()):
            for sub in exts:
                total += A[sub][sub]
        out.append(total / averaged_pair_denominator(6, 4) * 1)
    return out


def test_per_graph_positivity_fails_without_correction():
    """K5 plus an isolated vertex: every K4-type placement has one extension
    vertex of full attachment and one isolated, so a PSD matrix with a
    negative cross entry makes the bare quadratic value negative."""
    k4 = [t for t in enumerate_types(4) if t.graph.edge_count() == 6][0]
    counts = averaged_pair_counts(k4, 6)
    k5_iso = Graph(6, (1 << 10) - 1)  # K5 on 0..4, vertex 5 isolated
    gi = graph_index(k5_iso)
    b = [[Fraction(0)] for _ in range(16)]
    b[15][0] = Fraction(1)
    b[0][0] = Fraction(-1)
    A = [[b[i][0] * b[j][0] for j in range(16)] for i in range(16)]
    denom = averaged_pair_denominator(6, 4)
    val = sum(A[a][bb] * Fraction(counts[gi][a][bb], denom)
              for a in range(16) for bb in range(16))
    assert val < 0
