"""Exact densities: frozen oracle values, partition/chain identities, cache."""

import random
from fractions import Fraction

import pytest

from flagcert.graphs import Graph, enumerate_graphs, pair_index, parse_edge_list
from flagcert.flags import (
    TYPE_EMPTY,
    TYPE_VERTEX,
    Flag,
    complement_flag,
    enumerate_flags,
    enumerate_types,
    unit_flag,
)
from flagcert.densities import (
    averaged_pair_counts,
    averaged_pair_denominator,
    averaging_coeff,
    build_density_table,
    density,
    label_injection_count,
    objective_column,
    pair_density,
)

G41_TEXT = "{1, 2}{1, 3}{2, 3}{1, 4}{2, 4}{3, 4}{5, 6}"


def graph_flag(g):
    return Flag(TYPE_EMPTY, g, ())


def density_matrix(sigma, lo, hi):
    """p(F_a; F_b) over class reps, rows = order lo, cols = order hi."""
    los = enumerate_flags(sigma, lo)
    his = enumerate_flags(sigma, hi)
    return [[density(a, b) for b in his] for a in los]


def test_density_frozen_values():
    k3 = graph_flag(Graph(3, 7))
    edge = graph_flag(Graph(2, 1))
    assert density(edge, k3) == 1
    assert density(k3, k3) == 1
    g41 = graph_flag(parse_edge_list(G41_TEXT, 6))
    k4 = graph_flag(Graph(4, (1 << 6) - 1))
    assert density(k4, g41) == Fraction(1, 15)
    with pytest.raises(ValueError):
        density(g41, k4)  # subflag larger than host
    with pytest.raises(ValueError):
        density(unit_flag(TYPE_VERTEX), k3)  # type mismatch


def test_pair_density_frozen_values():
    c4mask = sum(1 << pair_index(*e) for e in [(0, 1), (1, 2), (2, 3), (0, 3)])
    c4 = graph_flag(Graph(4, c4mask))
    edge = graph_flag(Graph(2, 1))
    assert pair_density(edge, edge, c4) == Fraction(2, 3)
    with pytest.raises(ValueError):
        pair_density(c4, c4, c4)  # order constraint violated


def test_pair_density_unit_absorption():
    sigma = enumerate_types(4)[5]
    host = enumerate_flags(sigma, 6)[11]
    unit = unit_flag(sigma)
    for f2 in enumerate_flags(sigma, 5):
        assert pair_density(unit, f2, host) == density(f2, host)
    assert pair_density(unit, unit, host) == 1


def test_pair_density_symmetric_and_bounded():
    rng = random.Random(99)
    types = enumerate_types(4)
    for _ in range(200):
        sigma = rng.choice(types)
        host = rng.choice(enumerate_flags(sigma, 6))
        f1 = rng.choice(enumerate_flags(sigma, 5))
        f2 = rng.choice(enumerate_flags(sigma, 5))
        p = pair_density(f1, f2, host)
        assert 0 <= p <= 1
        assert p == pair_density(f2, f1, host)


def test_partition_of_unity_exhaustive_small_types():
    for sigma in (TYPE_EMPTY, TYPE_VERTEX):
        k = sigma.k
        for order in range(k + 1, 6):
            hosts = enumerate_flags(sigma, order)
            for lo in range(k, order + 1):
                parts = enumerate_flags(sigma, lo)
                for host in hosts:
                    assert sum(density(f, host) for f in parts) == 1


def test_chain_rule_exhaustive_small_types():
    for sigma in (TYPE_EMPTY, TYPE_VERTEX):
        k = sigma.k
        top = 5
        mats = {}
        for lo in range(k, top + 1):
            for hi in range(lo, top + 1):
                mats[lo, hi] = density_matrix(sigma, lo, hi)
        for lo in range(k, top + 1):
            for mid in range(lo, top + 1):
                for hi in range(mid, top + 1):
                    direct = mats[lo, hi]
                    left, right = mats[lo, mid], mats[mid, hi]
                    for a in range(len(direct)):
                        for b in range(len(direct[0])):
                            chained = sum(left[a][m] * right[m][b]
                                          for m in range(len(right)))
                            assert direct[a][b] == chained


def test_chain_rule_spot_checks_order4():
    rng = random.Random(4)
    for sigma in rng.sample(enumerate_types(4), 3):
        mid = enumerate_flags(sigma, 5)
        for host in rng.sample(enumerate_flags(sigma, 6), 5):
            # unit lift: p(1; host) = 1 = sum over mid of p(mid; host)
            assert sum(density(f, host) for f in mid) == 1
            for f1 in rng.sample(mid, 3):
                chained = sum(density(f1, fm) * density(fm, host) for fm in mid)
                assert density(f1, host) == chained


def test_pair_partition():
    sigma = enumerate_types(4)[2]
    flags5 = enumerate_flags(sigma, 5)
    for host in enumerate_flags(sigma, 6)[:8]:
        total = sum(pair_density(a, b, host) for a in flags5 for b in flags5)
        assert total == 1


def test_complement_equivariance():
    rng = random.Random(12)
    for _ in range(60):
        k = rng.choice([0, 1, 2])
        sigma = rng.choice(enumerate_types(k))
        host = rng.choice(enumerate_flags(sigma, k + 3))
        f1 = rng.choice(enumerate_flags(sigma, k + 2))
        assert density(f1, host) == density(complement_flag(f1),
                                            complement_flag(host))


def test_averaging_coeff_values():
    edge_rooted = Flag(TYPE_VERTEX, Graph(2, 1), (0,))
    assert averaging_coeff(edge_rooted) == 1
    path_center = Flag(
        TYPE_VERTEX,
        Graph(3, (1 << pair_index(0, 1)) | (1 << pair_index(0, 2))), (0,))
    assert averaging_coeff(path_center) == Fraction(1, 3)
    path_end = Flag(
        TYPE_VERTEX,
        Graph(3, (1 << pair_index(0, 1)) | (1 << pair_index(1, 2))), (0,))
    assert averaging_coeff(path_end) == Fraction(2, 3)


def test_averaging_coeffs_partition_injections():
    for g in enumerate_graphs(4):
        seen = set()
        total = Fraction(0)
        for v in range(4):
            f = Flag(TYPE_VERTEX, g, (v,))
            from flagcert.flags import flag_canonical_key
            key = flag_canonical_key(f)
            if key not in seen:
                seen.add(key)
                total += averaging_coeff(f)
        assert total == Fraction(label_injection_count(TYPE_VERTEX, g), 4)


def test_objective_column():
    obj = objective_column(4, 6)
    graphs = enumerate_graphs(6)
    # empty graph: complement is K6
    empty_idx = next(i for i, g in enumerate(graphs) if g.mask == 0)
    assert obj[empty_idx] == 1
    from flagcert.graphs import graph_index
    g41 = parse_edge_list(G41_TEXT, 6)
    assert obj[graph_index(g41)] == Fraction(1, 15)
    scaled = 720 * (Fraction(1, 15) - Fraction(10000, 347858))
    assert abs(float(scaled) - 27.3019) < 5e-5
    with pytest.raises(ValueError):
        objective_column(4, 3)


def test_zero_objective_rows_match_reference_margins():
    from flagcert import refdata
    from flagcert.graphs import graph_index
    obj = objective_column(4, 6)
    margins = refdata.reference_margins()
    for g, margin in zip(refdata.reference_graphs(), margins):
        is_zero = obj[graph_index(g)] == 0
        assert is_zero == (margin == "-20.6981")


def test_averaged_pair_counts_structure():
    sigma = enumerate_types(4)[0]
    counts = averaged_pair_counts(sigma, 6)
    assert len(counts) == 156
    denom = averaged_pair_denominator(6, 4)
    assert denom == 720
    for table in counts:
        for a in range(16):
            for b in range(16):
                assert table[a][b] == table[b][a] >= 0
                assert table[a][b] <= denom


def test_density_table_cache_round_trip(tmp_path):
    sigma = enumerate_types(4)[1]
    fresh = build_density_table(sigma, 6, cache_dir=tmp_path, use_cache=True)
    reloaded = build_density_table(sigma, 6, cache_dir=tmp_path, use_cache=True)
    uncached = build_density_table(sigma, 6, cache_dir=tmp_path, use_cache=False)
    assert fresh.entries == reloaded.entries == uncached.entries
    assert all(0 <= v <= 1 for v in fresh.entries.values())
    assert len(fresh.entries) == 16 * 16 * 156
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    # corrupt cache falls back to recompute
    files[0].write_text("{not json")
    again = build_density_table(sigma, 6, cache_dir=tmp_path, use_cache=True)
    assert again.entries == fresh.entries
