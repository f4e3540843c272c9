"""Types (labeled graphs), rooted flags, their isomorphism and symmetries.

A type of order k is a labeled graph on vertices 1..k (0-based internally).
A flag over a type is a pair (G, theta) where theta injects the k labels
into V(G) and the image induces the type's labeled graph exactly.  Flag
isomorphism fixes every labeled vertex pointwise, so a flag's canonical key
minimizes the adjacency string only over permutations of the unlabeled
tail.

Flags of order k+1 are in bijection with subsets V of the labels: the one
extra vertex is adjacent to exactly the labeled vertices in V.  This module
orders them by V read as a binary number, which is the ordering every
quadratic-form construction downstream relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations

from .graphs import (
    Graph,
    canonical_key,
    enumerate_graphs,
    pair_count,
    pair_index,
    relabel,
    _key_from_mask,
    _lexmin_search,
)

MAX_TYPE_ORDER = 4
MAX_FLAG_ORDER = 6


@dataclass(frozen=True)
class TypeSigma:
    """Labeled graph of order k; label i is vertex i-1 of `graph`."""

    graph: Graph

    @property
    def k(self) -> int:
        return self.graph.order


TYPE_EMPTY = TypeSigma(Graph(0, 0))   # the unique type of order 0
TYPE_VERTEX = TypeSigma(Graph(1, 0))  # the unique type of order 1


@dataclass(frozen=True)
class Flag:
    """(G, theta): theta maps label i to vertex theta[i-1], inducing sigma."""

    sigma: TypeSigma
    graph: Graph
    theta: tuple[int, ...]

    def __post_init__(self):
        k = self.sigma.k
        if len(self.theta) != k or len(set(self.theta)) != k:
            raise ValueError("theta is not an injection of the labels")
        if self.graph.order < k:
            raise ValueError("flag smaller than its type")
        if any(not 0 <= v < self.graph.order for v in self.theta):
            raise ValueError("theta maps outside the vertex set")
        induced = 0
        for b in range(k):
            for a in range(b):
                if self.graph.has_edge(self.theta[a], self.theta[b]):
                    induced |= 1 << pair_index(a, b)
        if induced != self.sigma.graph.mask:
            raise ValueError("theta image does not induce the type")

    @property
    def order(self) -> int:
        return self.graph.order


def normalize_flag(f: Flag) -> Flag:
    """Relabel so theta = (0, ..., k-1); tail keeps its relative order."""
    if f.theta == tuple(range(f.sigma.k)):
        return f
    perm = {}
    for pos, v in enumerate(f.theta):
        perm[v] = pos
    nxt = f.sigma.k
    for v in range(f.graph.order):
        if v not in perm:
            perm[v] = nxt
            nxt += 1
    return Flag(f.sigma, relabel(f.graph, perm), tuple(range(f.sigma.k)))


def flag_canonical_key(f: Flag) -> tuple[int, int, int]:
    """(k, order, lexmin key over tail permutations); equal iff flag-isomorphic."""
    g = normalize_flag(f)
    k = f.sigma.k
    if g.graph.order - k <= 1:
        return (k, g.graph.order, _key_from_mask(g.graph.order, g.graph.mask))
    key, _ = _lexmin_search(g.graph, fixed=tuple(range(k)))
    return (k, g.graph.order, key)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def enumerate_types(k: int) -> tuple[TypeSigma, ...]:
    """One type per isomorphism class of order-k graphs, identity labeling."""
    if not 0 <= k <= MAX_TYPE_ORDER:
        raise ValueError(f"type order {k} outside 0..{MAX_TYPE_ORDER}")
    if k == 0:
        return (TYPE_EMPTY,)
    return tuple(TypeSigma(g) for g in enumerate_graphs(k))


def unit_flag(sigma: TypeSigma) -> Flag:
    """1_sigma = (sigma, id), the only flag of order k."""
    return Flag(sigma, sigma.graph, tuple(range(sigma.k)))


def one_vertex_extension(sigma: TypeSigma, subset: int) -> Flag:
    """Order-(k+1) flag whose extra vertex is adjacent to labels in `subset`.

    `subset` is a bitmask over labels: bit i set means label i+1 adjacent.
    """
    k = sigma.k
    if subset >> k:
        raise ValueError(f"subset {subset:#x} has labels beyond order {k}")
    mask = sigma.graph.mask
    for i in range(k):
        if subset >> i & 1:
            mask |= 1 << pair_index(i, k)
    return Flag(sigma, Graph(k + 1, mask), tuple(range(k)))


@lru_cache(maxsize=None)
def enumerate_flags(sigma: TypeSigma, order: int) -> tuple[Flag, ...]:
    """One flag per flag-isomorphism class, deterministic order.

    At order k the list is [1_sigma]; at order k+1 it is the 2^k one-vertex
    extensions ordered by subset value; beyond that classes are built by
    attaching a vertex to every representative of the previous order and
    deduplicating by canonical key (ascending key order).
    """
    k = sigma.k
    if order < k:
        raise ValueError(f"flag order {order} below type order {k}")
    if order > MAX_FLAG_ORDER:
        raise ValueError(f"flag order {order} above {MAX_FLAG_ORDER}")
    if order == k:
        return (unit_flag(sigma),)
    if order == k + 1:
        return tuple(one_vertex_extension(sigma, s) for s in range(1 << k))
    found: dict[tuple[int, int, int], Flag] = {}
    base = pair_count(order - 1)
    for f in enumerate_flags(sigma, order - 1):
        for nbhd in range(1 << (order - 1)):
            mask = f.graph.mask
            for u in range(order - 1):
                if nbhd >> u & 1:
                    mask |= 1 << (base + u)
            cand = Flag(sigma, Graph(order, mask), f.theta)
            key = flag_canonical_key(cand)
            if key not in found:
                found[key] = cand
    return tuple(found[key] for key in sorted(found))


@lru_cache(maxsize=None)
def flag_index_table(sigma: TypeSigma, order: int) -> dict[tuple[int, int, int], int]:
    return {flag_canonical_key(f): i
            for i, f in enumerate(enumerate_flags(sigma, order))}


def extension_subset(f: Flag) -> int:
    """Inverse of one_vertex_extension for a normalized order-(k+1) flag."""
    g = normalize_flag(f)
    k = f.sigma.k
    if g.graph.order != k + 1:
        raise ValueError("not a one-vertex extension")
    subset = 0
    for i in range(k):
        if g.graph.has_edge(i, k):
            subset |= 1 << i
    return subset


# ---------------------------------------------------------------------------
# symmetries and complements
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def aut_group(sigma: TypeSigma) -> tuple[tuple[int, ...], ...]:
    """All label permutations preserving the type's adjacency."""
    k = sigma.k
    mask = sigma.graph.mask
    auts = []
    for p in permutations(range(k)):
        if relabel(sigma.graph, dict(enumerate(p))).mask == mask:
            auts.append(p)
    return tuple(auts)


def subset_orbit(sigma: TypeSigma, subset: int) -> tuple[int, ...]:
    """Orbit of a label subset under Aut(sigma), sorted ascending.

    An automorphism eta relabels, carrying the extension flag for V to the
    one for eta^{-1}(V); orbits are the same either way since groups are
    closed under inverse.
    """
    orbit = set()
    for p in aut_group(sigma):
        img = 0
        for i in range(sigma.k):
            if subset >> p[i] & 1:
                img |= 1 << i
        orbit.add(img)
    return tuple(sorted(orbit))


def complement_type(sigma: TypeSigma) -> TypeSigma:
    full = (1 << pair_count(sigma.k)) - 1
    return TypeSigma(Graph(sigma.k, sigma.graph.mask ^ full))


def complement_flag(f: Flag) -> Flag:
    full = (1 << pair_count(f.graph.order)) - 1
    return Flag(complement_type(f.sigma), Graph(f.graph.order, f.graph.mask ^ full), f.theta)


def complement_partner(sigma: TypeSigma) -> TypeSigma:
    """The enumerated representative isomorphic to sigma's complement."""
    comp = complement_type(sigma)
    key = canonical_key(comp.graph)
    for tau in enumerate_types(sigma.k):
        if canonical_key(tau.graph) == key:
            return tau
    raise AssertionError("complement class missing from enumeration")


def is_self_complementary(sigma: TypeSigma) -> bool:
    return canonical_key(sigma.graph) == canonical_key(complement_type(sigma).graph)


# ---------------------------------------------------------------------------
# text interchange: "k: <edges> | theta=(v1,...,vk) | n: <edges>"
# ---------------------------------------------------------------------------

def format_flag(f: Flag) -> str:
    from .graphs import format_graph_line
    theta = ",".join(str(v + 1) for v in f.theta)
    return (f"{format_graph_line(f.sigma.graph)} | theta=({theta}) | "
            f"{format_graph_line(f.graph)}")


def parse_flag(text: str) -> Flag:
    from .graphs import EdgeListError, parse_graph_line
    parts = [p.strip() for p in text.split("|")]
    if len(parts) != 3 or not parts[1].startswith("theta=(") or not parts[1].endswith(")"):
        raise EdgeListError(f"malformed flag text {text!r}")
    sigma_graph = parse_graph_line(parts[0])
    inner = parts[1][len("theta=("):-1].strip()
    theta = tuple(int(v) - 1 for v in inner.split(",") if v.strip()) if inner else ()
    host = parse_graph_line(parts[2])
    return Flag(TypeSigma(sigma_graph), host, theta)
