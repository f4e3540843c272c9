"""Types, flags, extension families, automorphisms, complement pairing."""

import pytest

from flagcert.graphs import Graph, canonical_key, pair_index
from flagcert.flags import (
    TYPE_EMPTY,
    TYPE_VERTEX,
    Flag,
    TypeSigma,
    aut_group,
    complement_flag,
    complement_partner,
    complement_type,
    enumerate_flags,
    enumerate_types,
    extension_subset,
    flag_canonical_key,
    format_flag,
    is_self_complementary,
    one_vertex_extension,
    parse_flag,
    unit_flag,
)


def path4_type():
    mask = (1 << pair_index(0, 1)) | (1 << pair_index(1, 2)) | (1 << pair_index(2, 3))
    return TypeSigma(Graph(4, mask))


def k4_type():
    return TypeSigma(Graph(4, (1 << 6) - 1))


def test_type_counts():
    assert [len(enumerate_types(k)) for k in range(5)] == [1, 1, 2, 4, 11]
    with pytest.raises(ValueError):
        enumerate_types(5)
    with pytest.raises(ValueError):
        enumerate_types(-1)


def test_unit_flag_is_sole_order_k_class():
    for sigma in enumerate_types(3):
        flags = enumerate_flags(sigma, sigma.k)
        assert len(flags) == 1
        assert flag_canonical_key(flags[0]) == flag_canonical_key(unit_flag(sigma))


def test_extension_family_size_is_2_to_k():
    for k in range(5):
        for sigma in enumerate_types(k):
            flags = enumerate_flags(sigma, k + 1)
            assert len(flags) == 1 << k
            keys = {flag_canonical_key(f) for f in flags}
            assert len(keys) == 1 << k  # pairwise non-isomorphic


def test_type0_flags_are_plain_graphs():
    from flagcert.graphs import enumerate_graphs
    flags = enumerate_flags(TYPE_EMPTY, 6)
    graphs = enumerate_graphs(6)
    assert len(flags) == 156
    assert all(canonical_key(f.graph) == canonical_key(g)
               for f, g in zip(flags, graphs))


def test_enumerate_flags_errors():
    sigma = k4_type()
    with pytest.raises(ValueError):
        enumerate_flags(sigma, 3)
    with pytest.raises(ValueError):
        enumerate_flags(TYPE_EMPTY, 7)


def test_flag_invariant_enforced():
    # theta image must induce the type exactly
    k3 = TypeSigma(Graph(3, 7))
    host = Graph(4, 7)  # triangle on 0,1,2 plus isolated vertex 3
    Flag(k3, host, (0, 1, 2))  # valid
    with pytest.raises(ValueError):
        Flag(k3, host, (0, 1, 3))  # not a triangle
    with pytest.raises(ValueError):
        Flag(k3, host, (0, 1, 1))  # not injective


def test_every_enumerated_flag_induces_its_type():
    for sigma in enumerate_types(4)[:4]:
        for f in enumerate_flags(sigma, 6):
            # constructor re-checks, so rebuilding asserts the invariant
            Flag(f.sigma, f.graph, f.theta)


def test_one_vertex_extension_subsets():
    sigma = k4_type()
    assert extension_subset(one_vertex_extension(sigma, 0)) == 0
    full = one_vertex_extension(sigma, 0b1111)
    assert extension_subset(full) == 0b1111
    assert full.graph.edge_count() == 10  # K5
    with pytest.raises(ValueError):
        one_vertex_extension(sigma, 1 << 4)


def test_labeled_extensions_distinguish_labels():
    empty4 = TypeSigma(Graph(4, 0))
    f1 = one_vertex_extension(empty4, 0b0001)
    f2 = one_vertex_extension(empty4, 0b0010)
    assert flag_canonical_key(f1) != flag_canonical_key(f2)


def test_aut_groups():
    assert len(aut_group(k4_type())) == 24
    assert len(aut_group(TYPE_VERTEX)) == 1
    assert len(aut_group(path4_type())) == 2


def test_complement_type_and_flag():
    sigma = k4_type()
    assert complement_type(sigma).graph.mask == 0
    assert complement_type(complement_type(sigma)) == sigma
    for s in range(16):
        f = one_vertex_extension(sigma, s)
        cf = complement_flag(f)
        assert extension_subset(cf) == 0b1111 ^ s
        assert cf.sigma == complement_type(sigma)
        back = complement_flag(cf)
        assert flag_canonical_key(back) == flag_canonical_key(f)


def test_complement_pairing_of_order4_types():
    types = enumerate_types(4)
    selfc = [t for t in types if is_self_complementary(t)]
    assert len(selfc) == 1
    assert canonical_key(selfc[0].graph) == canonical_key(path4_type().graph)
    pairs = set()
    for t in types:
        partner = complement_partner(t)
        assert complement_partner(partner) == t
        pairs.add(frozenset({canonical_key(t.graph), canonical_key(partner.graph)}))
    assert len(pairs) == 6  # 5 proper pairs + 1 singleton


def test_flag_text_round_trip():
    for sigma in (k4_type(), path4_type(), TYPE_VERTEX):
        for s in range(1 << sigma.k):
            f = one_vertex_extension(sigma, s)
            g = parse_flag(format_flag(f))
            assert flag_canonical_key(g) == flag_canonical_key(f)
    with pytest.raises(Exception):
        parse_flag("not a flag")
