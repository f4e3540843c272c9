"""Flag products, the label-averaging operator, and symmetry-split bases.

The quadratic-form matrices that feed the SDP are computed by the direct
injection formula: the coefficient of a host graph G in the averaged
product of two one-vertex-extension combinations f, g is

    (1 / (n)_k) * sum over label injections theta inducing sigma
                  of the pair density p(f, g; (G, theta)),

which for single-extension flags reduces to exact counting of ordered
pairs of extension vertices.  Expanding the product to a flag vector and
then averaging is kept as an independent slower path and checked against
the direct formula in the tests.

The extension space of a type splits under its automorphism group into the
symmetric part (spanned by orbit sums, "+") and the complementary part on
which group-averaging vanishes ("-", spanned by in-orbit differences);
cross products of the two parts average to zero, which is what splits the
SDP into independent parity blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .graphs import Graph, CanonicalKey, canonical_key, graph_index
from .flags import (
    Flag,
    TypeSigma,
    enumerate_flags,
    flag_index_table,
    flag_canonical_key,
    subset_orbit,
)
from .densities import (
    averaged_pair_counts,
    averaged_pair_denominator,
    averaging_coeff,
    pair_density,
)


@dataclass(frozen=True)
class FlagVector:
    """Formal rational combination of same-order flags over one type."""

    sigma: TypeSigma
    order: int
    coeffs: tuple[tuple[int, Fraction], ...]  # (class index, coefficient)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def dense(self) -> list[Fraction]:
        out = [Fraction(0)] * len(enumerate_flags(self.sigma, self.order))
        for i, c in self.coeffs:
            out[i] = c
        return out


def flag_vector(sigma: TypeSigma, order: int, coeffs: dict[int, Fraction]) -> FlagVector:
    items = tuple(sorted((i, Fraction(c)) for i, c in coeffs.items() if c != 0))
    return FlagVector(sigma, order, items)


def product_expand(f1: Flag, f2: Flag, order: int) -> FlagVector:
    """The product flag vector: sum over order-`order` classes of pair densities."""
    sigma = f1.sigma
    k = sigma.k
    if f1.order + f2.order - k > order:
        raise ValueError("expansion order too small for the product")
    coeffs = {}
    for i, host in enumerate(enumerate_flags(sigma, order)):
        p = pair_density(f1, f2, host)
        if p:
            coeffs[i] = p
    return flag_vector(sigma, order, coeffs)


def product_expand_vec(v1: FlagVector, v2: FlagVector, order: int) -> FlagVector:
    """Bilinear extension of the flag product to combinations."""
    sigma = v1.sigma
    flags1 = enumerate_flags(sigma, v1.order)
    flags2 = enumerate_flags(sigma, v2.order)
    total: dict[int, Fraction] = {}
    for i1, c1 in v1.coeffs:
        for i2, c2 in v2.coeffs:
            term = product_expand(flags1[i1], flags2[i2], order)
            for j, p in term.coeffs:
                total[j] = total.get(j, Fraction(0)) + c1 * c2 * p
    return flag_vector(sigma, order, total)


def average(v: FlagVector) -> dict[CanonicalKey, Fraction]:
    """Averaging operator: graph-class key -> coefficient, zeros dropped."""
    flags = enumerate_flags(v.sigma, v.order)
    out: dict[CanonicalKey, Fraction] = {}
    for i, c in v.coeffs:
        f = flags[i]
        key = canonical_key(f.graph)
        q = averaging_coeff(f)
        val = out.get(key, Fraction(0)) + c * q
        if val:
            out[key] = val
        elif key in out:
            del out[key]
    return out


# ---------------------------------------------------------------------------
# symmetry split of the one-vertex-extension space
# ---------------------------------------------------------------------------

def invariant_split(sigma: TypeSigma, order: int | None = None
                    ) -> tuple[list[FlagVector], list[FlagVector]]:
    """(symmetric basis, antisymmetric basis) of the 2^k extension space.

    Symmetric part: one orbit-sum vector per Aut orbit of label subsets,
    every flag with coefficient 1, orbits ordered by smallest subset.
    Antisymmetric part: for each orbit, the differences F_V - F_rep for the
    non-representative members; together these span the kernel of the
    group-averaging projector, so the two parts are complementary.
    """
    k = sigma.k
    if order is None:
        order = k + 1
    if order != k + 1:
        raise ValueError("split is defined on the one-vertex extension space")
    plus: list[FlagVector] = []
    minus: list[FlagVector] = []
    seen = set()
    for rep in range(1 << k):
        if rep in seen:
            continue
        orbit = subset_orbit(sigma, rep)
        seen.update(orbit)
        plus.append(flag_vector(sigma, order, {v: Fraction(1) for v in orbit}))
        for v in orbit:
            if v != rep:
                minus.append(flag_vector(
                    sigma, order, {v: Fraction(1), rep: Fraction(-1)}))
    return plus, minus


def basis_matrix(basis: list[FlagVector], dim: int) -> list[list[Fraction]]:
    """Columns are the basis vectors over the flag-class coordinates."""
    cols = []
    for v in basis:
        col = [Fraction(0)] * dim
        for i, c in v.coeffs:
            col[i] = c
        cols.append(col)
    return [[cols[j][i] for j in range(len(basis))] for i in range(dim)]


# ---------------------------------------------------------------------------
# per-graph quadratic-form coefficient matrices
# ---------------------------------------------------------------------------

@dataclass
class CoefficientMatrix:
    """Symmetric rational matrix: entry (a, b) is the coefficient of the
    host graph in the averaged product of basis vectors a and b."""

    sigma: TypeSigma
    graph_idx: int
    entries: tuple[tuple[Fraction, ...], ...]


def raw_coefficient_tables(sigma: TypeSigma, order: int) -> list[list[list[Fraction]]]:
    """Per enumerated host graph: the 2^k x 2^k matrix over extension flags."""
    counts = averaged_pair_counts(sigma, order)
    denom = averaged_pair_denominator(order, sigma.k)
    return [[[Fraction(c, denom) for c in row] for row in table]
            for table in counts]


def transform_table(raw: list[list[Fraction]],
                    basis_mat: list[list[Fraction]]) -> list[list[Fraction]]:
    """Congruence transform B^T raw B for one host graph."""
    dim = len(raw)
    cols = len(basis_mat[0]) if basis_mat else 0
    rb = [[sum(raw[i][j] * basis_mat[j][b] for j in range(dim))
           for b in range(cols)] for i in range(dim)]
    return [[sum(basis_mat[i][a] * rb[i][b] for i in range(dim))
             for b in range(cols)] for a in range(cols)]


def quadratic_coeff_matrices(sigma: TypeSigma, basis: list[FlagVector],
                             order: int) -> list[CoefficientMatrix]:
    """Per enumerated host graph, the matrix of averaged-product coefficients.

    Requires basis vectors on the one-vertex extension space and
    2*(k+1) - k <= order so the products live inside the hosts.
    """
    k = sigma.k
    if k + 2 > order:
        raise ValueError(f"order {order} cannot hold products of {k + 1}-flags")
    if any(v.order != k + 1 for v in basis):
        raise ValueError("basis vectors must be one-vertex extensions")
    bm = basis_matrix(basis, 1 << k)
    out = []
    for gi, raw in enumerate(raw_coefficient_tables(sigma, order)):
        m = transform_table(raw, bm)
        out.append(CoefficientMatrix(sigma, gi, tuple(tuple(row) for row in m)))
    return out


def averaged_product_coeff(sigma: TypeSigma, v1: FlagVector, v2: FlagVector,
                           order: int, host: Graph) -> Fraction:
    """Two-step coefficient: expand v1*v2 at `order`, average, read off host.

    Independent of the direct injection formula; used for cross-checking.
    """
    prod = product_expand_vec(v1, v2, order)
    avg = average(prod)
    return avg.get(canonical_key(host), Fraction(0))
