"""Loaders for the reference tables shipped with the package.

Three fixtures live in data/: the catalogue of the 156 six-vertex graph
classes in edge-list form, the 4-decimal scaled objective margins
720*(obj - 10000/347858) for those rows, and a published 5x5 rational
block matrix (entries scaled by 10^-10) whose definiteness the test suite
decides independently.  The catalogue is a cross-check fixture only; the
enumeration never reads it.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources

from .graphs import Graph, parse_edge_list

REFERENCE_BOUND = Fraction(10000, 347858)  # the published certified bound
SCALE = 720  # 6!


def _lines(name: str):
    text = resources.files("flagcert.data").joinpath(name).read_text()
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            yield line


def reference_graphs() -> list[Graph]:
    """The 156 catalogue rows, in row order, as graphs of order 6."""
    rows = {}
    for line in _lines("six_vertex_graphs.tsv"):
        idx, _, body = line.partition("\t")
        rows[int(idx)] = parse_edge_list(body.strip(), 6)
    return [rows[i] for i in range(len(rows))]


def reference_margins() -> list[str]:
    """The shipped 4-decimal margin strings, in row order."""
    rows = {}
    for line in _lines("six_vertex_margins.tsv"):
        idx, _, val = line.partition("\t")
        rows[int(idx)] = val.strip()
    return [rows[i] for i in range(len(rows))]


def published_block_matrix() -> list[list[Fraction]]:
    """The published 5x5 symmetric rational matrix (denominator 10^10)."""
    rows = []
    for line in _lines("published_invariant_block.tsv"):
        rows.append([Fraction(int(v), 10 ** 10) for v in line.split("\t")])
    return rows
