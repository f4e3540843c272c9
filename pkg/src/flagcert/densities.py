"""Exact rational subflag densities and averaging coefficients.

Everything here is computed by exhaustive enumeration over subsets or
sunflowers with `fractions.Fraction` arithmetic; there is no floating point
in this module.  A sunflower (V1, V2) with center im(theta) is an ordered
pair of vertex sets of the prescribed sizes whose pairwise intersection is
exactly the center; densities are probabilities over the uniform choice of
such a sunflower.

The pipeline's hot table maps (extension class a, extension class b, host
graph) to the label-averaged pair density; it is memoized in process and
can be persisted to a small JSON cache file keyed by a content hash of the
enumeration ordering it indexes into.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations
from math import comb
from pathlib import Path

from .graphs import (
    Graph,
    complement,
    count_cliques,
    enumerate_graphs,
    format_graph_line,
    graph_index,
    induced_subgraph,
    pair_index,
)
from .flags import (
    Flag,
    TypeSigma,
    enumerate_flags,
    flag_canonical_key,
    flag_index_table,
    normalize_flag,
)

CACHE_FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# single and pair densities
# ---------------------------------------------------------------------------

def _restrict(f: Flag, tail: tuple[int, ...]) -> Flag:
    """Subflag induced on im(theta) plus the given unlabeled vertices."""
    g = normalize_flag(f)
    k = f.sigma.k
    verts = list(range(k)) + list(tail)
    if not verts:
        return Flag(f.sigma, Graph(0, 0), ())  # order-0 restriction
    return Flag(f.sigma, induced_subgraph(g.graph, verts), tuple(range(k)))


def density(f1: Flag, f: Flag) -> Fraction:
    """Probability that a uniform size-|f1| restriction of f induces f1's class."""
    if f1.sigma != f.sigma:
        raise ValueError("flags have different types")
    k = f.sigma.k
    s = f1.order - k
    m = f.order - k
    if s > m:
        raise ValueError(f"subflag order {f1.order} exceeds flag order {f.order}")
    target = flag_canonical_key(f1)
    g = normalize_flag(f)
    hits = 0
    for tail in combinations(range(k, f.order), s):
        if flag_canonical_key(_restrict(g, tail)) == target:
            hits += 1
    return Fraction(hits, comb(m, s))


def pair_density(f1: Flag, f2: Flag, f: Flag) -> Fraction:
    """Probability that a random sunflower in f induces (f1, f2).

    Sunflowers are enumerated as unordered set pairs with the symmetry
    factor made explicit when the two sizes agree; the result equals the
    ordered-pair definition.
    """
    if not (f1.sigma == f2.sigma == f.sigma):
        raise ValueError("flags have different types")
    k = f.sigma.k
    s1, s2 = f1.order - k, f2.order - k
    m = f.order - k
    if s1 + s2 > m:
        raise ValueError(
            f"orders {f1.order}+{f2.order}-{k} exceed host order {f.order}")
    t1 = flag_canonical_key(f1)
    t2 = flag_canonical_key(f2)
    g = normalize_flag(f)
    verts = range(k, f.order)
    total = comb(m, s1) * comb(m - s1, s2)
    hits = 0
    if s1 != s2:
        for a in combinations(verts, s1):
            rest = [v for v in verts if v not in a]
            for b in combinations(rest, s2):
                if (flag_canonical_key(_restrict(g, a)) == t1
                        and flag_canonical_key(_restrict(g, b)) == t2):
                    hits += 1
    elif s1 == 0:
        hits = 1 if t1 == t2 == flag_canonical_key(_restrict(g, ())) else 0
    else:
        for a in combinations(verts, s1):
            # unordered {a, b} with min(a) < min(b); count both orders
            rest = [v for v in verts if v not in a and v > min(a)]
            for b in combinations(rest, s2):
                ca = flag_canonical_key(_restrict(g, a))
                cb = flag_canonical_key(_restrict(g, b))
                if ca == t1 and cb == t2:
                    hits += 1
                if cb == t1 and ca == t2:
                    hits += 1
    return Fraction(hits, total)


def averaging_coeff(f: Flag) -> Fraction:
    """q(f): probability a random label injection into f's graph yields f."""
    g = normalize_flag(f)
    k = f.sigma.k
    n = f.order
    target = flag_canonical_key(f)
    sigma_mask = f.sigma.graph.mask
    hits = 0
    total = 0
    for theta in permutations(range(n), k):
        total += 1
        induced = 0
        for b in range(k):
            for a in range(b):
                if g.graph.has_edge(theta[a], theta[b]):
                    induced |= 1 << pair_index(a, b)
        if induced != sigma_mask:
            continue
        if flag_canonical_key(Flag(f.sigma, g.graph, theta)) == target:
            hits += 1
    return Fraction(hits, total if total else 1)


def objective_column(t: int, order: int) -> list[Fraction]:
    """Per enumerated graph: clique-t density of the graph plus its complement."""
    if not t <= order <= 6:
        raise ValueError(f"need clique order {t} <= expansion order {order} <= 6")
    denom = comb(order, t)
    return [Fraction(count_cliques(g, t) + count_cliques(complement(g), t), denom)
            for g in enumerate_graphs(order)]


# ---------------------------------------------------------------------------
# sigma-inducing injections and the averaged pair-density table
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _injection_profiles(order: int, k: int):
    """Per graph of `order`: {type mask: [(ext subsets of the l-k others)]}.

    For each injection theta of k labels, records the induced labeled type
    mask together with the label-adjacency subset of every unlabeled
    vertex, in vertex order.  Shared by every type of order k.
    """
    graphs = enumerate_graphs(order)
    per_graph = []
    for g in graphs:
        nbr = [0] * order
        for i, j in g.edges():
            nbr[i] |= 1 << j
            nbr[j] |= 1 << i
        table: dict[int, list[tuple[int, ...]]] = {}
        for theta in permutations(range(order), k):
            induced = 0
            for b in range(k):
                for a in range(b):
                    if nbr[theta[a]] >> theta[b] & 1:
                        induced |= 1 << pair_index(a, b)
            in_theta = 0
            for v in theta:
                in_theta |= 1 << v
            exts = []
            for x in range(order):
                if in_theta >> x & 1:
                    continue
                sub = 0
                for i in range(k):
                    if nbr[x] >> theta[i] & 1:
                        sub |= 1 << i
                exts.append(sub)
            table.setdefault(induced, []).append(tuple(exts))
        per_graph.append(table)
    return per_graph


def label_injection_count(sigma: TypeSigma, g: Graph) -> int:
    """Number of injections of the labels into g inducing sigma."""
    table = _injection_profiles(g.order, sigma.k)[graph_index(g)]
    return len(table.get(sigma.graph.mask, ()))


def averaged_pair_counts(sigma: TypeSigma, order: int) -> list[list[list[int]]]:
    """Integer tables N[G][a][b]: ordered single-extension sunflower counts.

    N[G][a][b] counts pairs (theta, (x, y)) where theta induces sigma in the
    G-th enumerated graph and the distinct unlabeled vertices x, y attach to
    the labels by subsets a and b.  The label-averaged pair density is
    N / ((order)_k * (order-k) * (order-k-1)).
    """
    k = sigma.k
    if order < k + 2:
        raise ValueError("need at least two unlabeled vertices")
    dim = 1 << k
    tables = []
    for profile in _injection_profiles(order, k):
        counts = [[0] * dim for _ in range(dim)]
        for exts in profile.get(sigma.graph.mask, ()):
            for xi in range(len(exts)):
                for yi in range(len(exts)):
                    if xi != yi:
                        counts[exts[xi]][exts[yi]] += 1
        tables.append(counts)
    return tables


def averaged_pair_denominator(order: int, k: int) -> int:
    falling = 1
    for v in range(order, order - k, -1):
        falling *= v
    return falling * (order - k) * (order - k - 1)


@dataclass
class DensityTable:
    """Label-averaged pair densities of one-vertex extensions per host graph.

    entries[(a, b, gi)] = averaged probability over label placements theta
    in the gi-th enumerated host that a random ordered pair of extension
    vertices attaches by subsets of classes a and b.  Values lie in [0, 1]
    and the table is complete over (2^k) x (2^k) x |G_order|.
    """

    sigma: TypeSigma
    l1: int
    l2: int
    order: int
    entries: dict[tuple[int, int, int], Fraction]

    def matrix(self, gi: int) -> list[list[Fraction]]:
        dim = 1 << self.sigma.k
        return [[self.entries[a, b, gi] for b in range(dim)] for a in range(dim)]


def ordering_hash(sigma: TypeSigma, order: int) -> str:
    """Content hash of the index spaces a table refers to."""
    h = hashlib.sha256()
    h.update(format_graph_line(sigma.graph).encode())
    for g in enumerate_graphs(order):
        h.update(format_graph_line(g).encode())
    for f in enumerate_flags(sigma, sigma.k + 1):
        h.update(repr(flag_canonical_key(f)).encode())
    return h.hexdigest()[:16]


def build_density_table(sigma: TypeSigma, order: int,
                        cache_dir: Path | None = None,
                        use_cache: bool = True) -> DensityTable:
    """The (sigma, k+1, k+1, order) table, optionally persisted to disk."""
    k = sigma.k
    key = ordering_hash(sigma, order)
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"pairtable_{order}_{key}.json"
        if use_cache and path.exists():
            cached = _read_table_file(path, sigma, order, key)
            if cached is not None:
                return cached
    counts = averaged_pair_counts(sigma, order)
    denom = averaged_pair_denominator(order, k)
    entries = {}
    dim = 1 << k
    for gi, table in enumerate(counts):
        for a in range(dim):
            for b in range(dim):
                entries[a, b, gi] = Fraction(table[a][b], denom)
    result = DensityTable(sigma, k + 1, k + 1, order, entries)
    if path is not None and use_cache:
        _write_table_file(path, result, key)
    return result


def _write_table_file(path: Path, table: DensityTable, key: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": CACHE_FORMAT_VERSION,
        "sigma": format_graph_line(table.sigma.graph),
        "l1": table.l1,
        "l2": table.l2,
        "order": table.order,
        "ordering_hash": key,
        "entries": [[a, b, gi, str(v)]
                    for (a, b, gi), v in sorted(table.entries.items())],
    }
    path.write_text(json.dumps(payload))


def _read_table_file(path: Path, sigma: TypeSigma, order: int,
                     key: str) -> DensityTable | None:
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError):
        return None
    if (payload.get("version") != CACHE_FORMAT_VERSION
            or payload.get("ordering_hash") != key):
        return None
    entries = {}
    for a, b, gi, v in payload["entries"]:
        entries[a, b, gi] = Fraction(v)
    return DensityTable(sigma, payload["l1"], payload["l2"], order, entries)
