"""Unlabeled simple graphs up to order 8: enumeration, canonical labeling, queries.

Graphs are stored as an upper-triangle adjacency bitmask in *colex* pair
order: pair (i, j) with i < j gets bit index j*(j-1)//2 + i, so the pairs
are enumerated (0,1), (0,2), (1,2), (0,3), (1,3), (2,3), ...  With this
convention the adjacency among the first m vertices occupies exactly the
low C(m,2) bits, which the canonical-labeling search exploits.

The canonical key of a graph is the lexicographically smallest adjacency
bit string over all vertex permutations, where the string is read in colex
pair order with the first pair most significant.  Two graphs of equal
order are isomorphic iff their keys are equal.  The minimum is computed by
a depth-first search over partial vertex orderings that prunes any branch
whose determined prefix already exceeds the best complete string found; at
these orders (n <= 8) this is exact and fast.

Vertices are 0-based internally and 1-based in all text formats.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
import re

MAX_ORDER = 8


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: int, j: int) -> int:
    """Colex bit index of the unordered pair {i, j}, i != j, 0-based."""
    if i > j:
        i, j = j, i
    return j * (j - 1) // 2 + i


@dataclass(frozen=True)
class Graph:
    """Simple graph on `order` vertices with colex upper-triangle bitmask."""

    order: int
    mask: int

    def __post_init__(self):
        if not 0 <= self.order <= MAX_ORDER:
            raise ValueError(f"graph order {self.order} outside 0..{MAX_ORDER}")
        if self.mask < 0 or self.mask >> pair_count(self.order):
            raise ValueError("adjacency mask has bits outside the vertex range")

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.mask >> pair_index(i, j) & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for j in range(self.order) for i in range(j)
                if self.mask >> pair_index(i, j) & 1]

    def edge_count(self) -> int:
        return bin(self.mask).count("1")

    def neighbors(self, v: int) -> list[int]:
        return [u for u in range(self.order) if u != v and self.has_edge(u, v)]


@dataclass(frozen=True, order=True)
class CanonicalKey:
    """Isomorphism invariant: (order, lexmin bit string as an integer).

    The integer weights the first colex pair most significantly, so integer
    comparison agrees with lexicographic comparison of the bit strings.
    """

    order: int
    key: int


# ---------------------------------------------------------------------------
# canonical labeling
# ---------------------------------------------------------------------------

def _lexmin_search(g: Graph, fixed: tuple[int, ...] = ()) -> tuple[int, tuple[int, ...]]:
    """Lexmin adjacency string over orderings extending `fixed`.

    `fixed` pins the vertices occupying positions 0..len(fixed)-1; the
    remaining positions range over all orderings of the remaining vertices.
    Returns (key integer, full vertex ordering achieving it).
    """
    n = g.order
    adj = [0] * n  # neighbor bitmasks, adj[v] bit u set iff edge uv
    for i, j in g.edges():
        adj[i] |= 1 << j
        adj[j] |= 1 << i

    best_key: list[int | None] = [None]
    best_ord: list[tuple[int, ...]] = [()]
    # prefix(seq of m vertices) determines the low C(m,2) string bits; the
    # string prefix for depth m of the incumbent is best >> (P - C(m,2))
    total_bits = pair_count(n)

    start_prefix = 0
    for m in range(len(fixed)):
        bits = 0
        for pos in range(m):
            bits = bits << 1 | (adj[fixed[m]] >> fixed[pos] & 1)
        start_prefix = start_prefix << m | bits

    def descend(order: list[int], used: int, prefix: int, depth: int):
        if depth == n:
            if best_key[0] is None or prefix < best_key[0]:
                best_key[0] = prefix
                best_ord[0] = tuple(order)
            return
        # adjacency block of each candidate vertex against current order;
        # lex order makes only minimal blocks viable at this depth
        blocks = []
        min_block = None
        for v in range(n):
            if used >> v & 1:
                continue
            bits = 0
            av = adj[v]
            for pos in range(depth):
                bits = bits << 1 | (av >> order[pos] & 1)
            if min_block is None or bits < min_block:
                min_block = bits
                blocks = [v]
            elif bits == min_block:
                blocks.append(v)
        new_prefix = prefix << depth | min_block
        if best_key[0] is not None:
            done_bits = pair_count(depth + 1)
            if new_prefix > best_key[0] >> (total_bits - done_bits):
                return
        for v in blocks:
            order.append(v)
            descend(order, used | 1 << v, new_prefix, depth + 1)
            order.pop()

    used0 = 0
    for v in fixed:
        used0 |= 1 << v
    descend(list(fixed), used0, start_prefix, len(fixed))
    assert best_key[0] is not None
    return best_key[0], best_ord[0]


def canonical_key(g: Graph) -> CanonicalKey:
    """Minimum adjacency string over all order! vertex permutations."""
    if g.order <= 1:
        return CanonicalKey(g.order, 0)
    key, _ = _lexmin_search(g)
    return CanonicalKey(g.order, key)


def canonical_form(g: Graph) -> Graph:
    """The relabeled representative whose own adjacency string is minimal."""
    if g.order <= 1:
        return g
    _, order = _lexmin_search(g)
    return relabel(g, {v: pos for pos, v in enumerate(order)})


def relabel(g: Graph, perm: dict[int, int]) -> Graph:
    mask = 0
    for i, j in g.edges():
        mask |= 1 << pair_index(perm[i], perm[j])
    return Graph(g.order, mask)


def _key_from_mask(order: int, mask: int) -> int:
    """Key integer of a graph whose own labeling is already canonical."""
    # string bit t (most significant first) is colex pair t
    total = pair_count(order)
    key = 0
    for t in range(total):
        key = key << 1 | (mask >> t & 1)
    return key


def _mask_from_key(order: int, key: int) -> int:
    total = pair_count(order)
    mask = 0
    for t in range(total):
        if key >> (total - 1 - t) & 1:
            mask |= 1 << t
    return mask


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def enumerate_graphs(n: int) -> tuple[Graph, ...]:
    """All isomorphism classes of order n, sorted by ascending canonical key.

    Incremental construction: every class on n vertices arises from a class
    on n-1 vertices by attaching one vertex with some neighborhood, so
    extending all representatives by all 2^(n-1) neighborhoods and
    deduplicating by canonical key is exhaustive.
    """
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"enumeration order {n} outside 1..{MAX_ORDER}")
    if n == 1:
        return (Graph(1, 0),)
    seen: set[int] = set()
    base = pair_count(n - 1)
    for g in enumerate_graphs(n - 1):
        for nbhd in range(1 << (n - 1)):
            mask = g.mask
            for u in range(n - 1):
                if nbhd >> u & 1:
                    mask |= 1 << (base + u)
            seen.add(canonical_key(Graph(n, mask)).key)
    return tuple(Graph(n, _mask_from_key(n, key)) for key in sorted(seen))


def graph_index(g: Graph) -> int:
    """Position of g's class within enumerate_graphs(g.order)."""
    key = canonical_key(g)
    table = _index_table(g.order)
    return table[key.key]


@lru_cache(maxsize=None)
def _index_table(n: int) -> dict[int, int]:
    return {canonical_key(g).key: i for i, g in enumerate(enumerate_graphs(n))}


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def complement(g: Graph) -> Graph:
    full = (1 << pair_count(g.order)) - 1
    return Graph(g.order, g.mask ^ full)


def count_cliques(g: Graph, t: int) -> int:
    """Number of t-subsets of V(g) inducing a complete graph."""
    if not 1 <= t <= g.order:
        raise ValueError(f"clique order {t} outside 1..{g.order}")
    count = 0
    for sub in combinations(range(g.order), t):
        if all(g.mask >> pair_index(i, j) & 1 for i, j in combinations(sub, 2)):
            count += 1
    return count


def induced_subgraph(g: Graph, verts) -> Graph:
    """Subgraph induced on `verts`, relabeled 0..len-1 preserving their order."""
    verts = list(verts)
    if not verts:
        raise ValueError("empty vertex selection")
    if len(set(verts)) != len(verts) or any(not 0 <= v < g.order for v in verts):
        raise ValueError(f"invalid vertex selection {verts} for order {g.order}")
    mask = 0
    for a in range(len(verts)):
        for b in range(a):
            if g.has_edge(verts[a], verts[b]):
                mask |= 1 << pair_index(a, b)
    return Graph(len(verts), mask)


# ---------------------------------------------------------------------------
# text interchange ("{i, j}" tokens, 1-based, ascending colex pairs)
# ---------------------------------------------------------------------------

_EDGE_TOKEN = re.compile(r"\{\s*(\d+)\s*,\s*(\d+)\s*\}")


class EdgeListError(ValueError):
    pass


def parse_edge_list(text: str, order: int) -> Graph:
    if not 1 <= order <= MAX_ORDER:
        raise EdgeListError(f"order {order} outside 1..{MAX_ORDER}")
    stripped = _EDGE_TOKEN.sub("", text).strip()
    if stripped:
        raise EdgeListError(f"malformed edge-list text near {stripped[:20]!r}")
    mask = 0
    for tok in _EDGE_TOKEN.finditer(text):
        i, j = int(tok.group(1)), int(tok.group(2))
        if not 1 <= i < j <= order:
            raise EdgeListError(f"edge {{{i}, {j}}} invalid for order {order}")
        bit = 1 << pair_index(i - 1, j - 1)
        if mask & bit:
            raise EdgeListError(f"duplicate edge {{{i}, {j}}}")
        mask |= bit
    return Graph(order, mask)


def format_edge_list(g: Graph) -> str:
    return "".join("{%d, %d}" % (i + 1, j + 1) for i, j in g.edges())


def parse_graph_line(line: str) -> Graph:
    """One-graph-per-line format with an "order: edgelist" header."""
    head, sep, body = line.partition(":")
    if not sep:
        raise EdgeListError(f"missing 'order:' header in {line!r}")
    try:
        order = int(head.strip())
    except ValueError:
        raise EdgeListError(f"bad order field {head.strip()!r}") from None
    return parse_edge_list(body.strip(), order)


def format_graph_line(g: Graph) -> str:
    return f"{g.order}: {format_edge_list(g)}"
