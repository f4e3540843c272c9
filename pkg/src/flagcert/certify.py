"""Exact rational certificates: rounding, PSD decisions, verification.

A certificate carries a rational bound plus one rational symmetric matrix
per (type, parity) block together with explicit basis descriptors.  It
proves the bound if every block matrix is PSD (decided by exact LDL^T with
diagonal pivoting) and for every host graph

    obj_G - bound - sum_blocks <A, M_G>  >=  0

with every quantity recomputed from scratch in rational arithmetic.
Verification resolves the basis descriptors through the flags module and
rebuilds the coefficient matrices without consulting any cache; the
certificate file is the only trusted input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .graphs import graph_index, parse_graph_line, format_graph_line
from .flags import (
    Flag,
    TypeSigma,
    enumerate_flags,
    extension_subset,
    flag_canonical_key,
    format_flag,
    parse_flag,
)
from .algebra import FlagVector, basis_matrix, flag_vector
from .densities import (
    averaged_pair_counts,
    averaged_pair_denominator,
    objective_column,
)
from .sdp import ObjectiveSpec, SdpProblem, Solution
from . import refdata


# ---------------------------------------------------------------------------
# exact PSD decision
# ---------------------------------------------------------------------------

@dataclass
class PsdVerdict:
    is_psd: bool
    pivots: list[Fraction]        # diagonal factors, in pivot order
    permutation: list[int]        # pivot order over original indices
    witness: list[Fraction] | None  # v with v' M v < 0 when not PSD

    def witness_value(self, m: list[list[Fraction]]) -> Fraction | None:
        if self.witness is None:
            return None
        v = self.witness
        n = len(v)
        return sum(v[i] * m[i][j] * v[j] for i in range(n) for j in range(n))


def check_psd_rational(m: list[list[Fraction]]) -> PsdVerdict:
    """Exact PSD decision by LDL^T with greatest-diagonal pivoting.

    A symmetric PSD matrix always admits this factorization with
    nonnegative pivots; a zero diagonal with a nonzero row, or a negative
    diagonal, yields an explicit rational witness vector.
    """
    n = len(m)
    for i in range(n):
        if len(m[i]) != n or any(m[i][j] != m[j][i] for j in range(n)):
            raise ValueError("matrix is not symmetric")
    work = [[Fraction(v) for v in row] for row in m]
    active = list(range(n))
    pivots: list[Fraction] = []
    perm: list[int] = []
    # elimination record for witness back-substitution: (pivot row of the
    # reduced matrix over active indices, pivot value, active set snapshot)
    steps: list[tuple[list[Fraction], Fraction, list[int]]] = []

    while active:
        # greatest remaining diagonal entry
        best = max(range(len(active)), key=lambda idx: work[active[idx]][active[idx]])
        p = active[best]
        d = work[p][p]
        if d < 0:
            wit = {p: Fraction(1)}
            return PsdVerdict(False, pivots, perm, _lift(steps, wit, n))
        if d == 0:
            # PSD requires the whole active row to vanish
            for q in active:
                if work[p][q] != 0:
                    c = work[p][q]
                    dq = work[q][q]
                    # (t e_p + s e_q)' M (.) = 2 t s c + s^2 dq < 0 for
                    # s = -sign(c), t large enough
                    s = Fraction(-1) if c > 0 else Fraction(1)
                    t = (abs(dq) + 1) / (2 * abs(c))
                    wit = {p: t, q: s}
                    return PsdVerdict(False, pivots, perm, _lift(steps, wit, n))
            pivots.append(d)
            perm.append(p)
            active.remove(p)
            continue
        pivots.append(d)
        perm.append(p)
        active.remove(p)
        row = [work[p][q] / d for q in active]
        steps.append((row, d, [p] + list(active)))
        for ai, qa in enumerate(active):
            for bi, qb in enumerate(active):
                work[qa][qb] -= row[ai] * d * row[bi]
    return PsdVerdict(True, pivots, perm, None)


def _lift(steps, wit: dict[int, Fraction], n: int) -> list[Fraction]:
    """Back-substitute a Schur-complement witness to the original matrix.

    If v satisfies v' M' v < 0 on the complement after pivoting on p with
    row r = m_p./d, then extending v by v_p = -r.v keeps the value.
    """
    for row, d, snapshot in reversed(steps):
        p = snapshot[0]
        rest = snapshot[1:]
        vp = -sum(row[j] * wit.get(rest[j], Fraction(0)) for j in range(len(rest)))
        if vp or p in wit:
            wit[p] = vp
    return [wit.get(i, Fraction(0)) for i in range(n)]


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

@dataclass
class CertBlock:
    sigma: TypeSigma
    parity: str
    basis: list[FlagVector]
    matrix: list[list[Fraction]]


@dataclass
class Certificate:
    bound: Fraction
    t: int
    order: int
    blocks: list[CertBlock]


@dataclass
class SlackRow:
    index: int
    lower: Fraction        # obj_G - bound
    quadratic: Fraction    # sum over blocks of <A, M_G>
    slack: Fraction        # lower - quadratic

    def display(self, scale: int) -> tuple[str, str, str]:
        lo = float(self.lower * scale)
        qu = float(self.quadratic * scale)
        return (f"{lo:.4f}", f"{qu:.4f}", f"{(lo - qu) * 1000:.4f}")


@dataclass
class SlackReport:
    bound: Fraction
    rows: list[SlackRow]
    psd: list[tuple[str, PsdVerdict]]

    @property
    def verified(self) -> bool:
        return (all(r.slack >= 0 for r in self.rows)
                and all(v.is_psd for _, v in self.psd))

    def min_slack(self) -> Fraction:
        return min(r.slack for r in self.rows)

    def to_tsv(self) -> str:
        scale = factorial(6) if len(self.rows) == 156 else factorial(3)
        lines = ["i\tL\tR\tdiff\tscaledL\tscaledR\t(scaledL-scaledR)e3"]
        for r in self.rows:
            lo, qu, diff = r.display(scale)
            lines.append(f"{r.index}\t{r.lower}\t{r.quadratic}\t{r.slack}\t"
                         f"{lo}\t{qu}\t{diff}")
        return "\n".join(lines) + "\n"


def nice_bound_candidates(max_denominator: int = 100):
    """All p/q with 1 <= q <= max_denominator, 0 < p/q <= 1, deduplicated."""
    seen = set()
    for q in range(1, max_denominator + 1):
        for p in range(1, q + 1):
            f = Fraction(p, q)
            if f not in seen:
                seen.add(f)
    return sorted(seen)


def pick_bound(lambda_num: float, shrink: float = -1e-6,
               max_denominator: int = 100) -> Fraction:
    """Largest candidate <= lambda - shrink.

    A small negative shrink lets the bound snap to a clean value the solver
    approached from below; exact verification is the final arbiter either
    way.
    """
    limit = lambda_num - shrink
    best = None
    for cand in nice_bound_candidates(max_denominator):
        if float(cand) <= limit:
            best = cand
    if best is None:
        raise ValueError(f"no candidate bound at or below {limit}")
    return best


def round_matrix(mat: np.ndarray, denominator: int,
                 eig_floor: float = 1e-8) -> list[list[Fraction]]:
    """Symmetrize, push eigenvalues up to the floor, round entrywise.

    The floor absorbs the solver's boundary noise on rank-deficient optimal
    faces; it is tiny against the rounding grid whenever denominator is
    moderate, so exactly-representable optima still round onto themselves.
    """
    a = np.asarray(mat, dtype=float)
    a = (a + a.T) / 2
    if a.size:
        evals, evecs = np.linalg.eigh(a)
        lifted = np.maximum(evals, eig_floor)
        a = evecs @ np.diag(lifted) @ evecs.T
        a = (a + a.T) / 2
    d = len(a)
    out = [[Fraction(0)] * d for _ in range(d)]
    for i in range(d):
        for j in range(i, d):
            v = Fraction(round(a[i, j] * denominator), denominator)
            out[i][j] = out[j][i] = v
    return out


def round_solution(problem: SdpProblem, sol: Solution, denominator: int,
                   shrink: float = -1e-6, bound: Fraction | None = None,
                   eig_floor: float = 1e-8) -> Certificate:
    """Turn a numerical solution into a rational certificate.

    The bound is the given one, else the largest nice rational at most
    lambda - shrink.  Shared blocks are rounded once and copied to every
    member, so complement pairs keep matching matrices exactly.
    """
    if denominator < 1:
        raise ValueError("denominator must be at least 1")
    if bound is None:
        bound = pick_bound(sol.lambda_, shrink)
    blocks = []
    for blk, mat in zip(problem.blocks, sol.block_matrices):
        rounded = round_matrix(mat, denominator, eig_floor)
        for member in blk.members:
            blocks.append(CertBlock(member.sigma, member.parity,
                                    list(member.basis), rounded))
    return Certificate(Fraction(bound), problem.spec.t, problem.spec.order, blocks)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def _resolve_basis(sigma: TypeSigma, vectors: list[FlagVector]) -> np.ndarray:
    """Integer basis matrix over extension-subset coordinates."""
    bm = basis_matrix(vectors, 1 << sigma.k)
    out = np.zeros((1 << sigma.k, len(vectors)), dtype=np.int64)
    for i, row in enumerate(bm):
        for j, v in enumerate(row):
            if v.denominator != 1:
                raise ValueError("basis coefficients must be integers")
            out[i, j] = int(v)
    return out


def verify_certificate(cert: Certificate) -> SlackReport:
    """Recompute everything exactly and decide the certificate.

    No caches and no data from the construction phase are consulted: the
    per-graph coefficient matrices are rebuilt from the basis descriptors
    by fresh injection counting, the block matrices get an exact LDL^T PSD
    decision, and every per-graph slack is an exact rational.
    """
    psd = []
    per_type: dict[TypeSigma, np.ndarray] = {}
    for bi, blk in enumerate(cert.blocks):
        if len(blk.matrix) != len(blk.basis):
            raise ValueError(f"block {bi}: matrix size does not match basis")
        psd.append((f"{bi}:{blk.parity}", check_psd_rational(blk.matrix)))
        if blk.sigma not in per_type:
            counts = np.array(averaged_pair_counts(blk.sigma, cert.order),
                              dtype=np.int64)
            # int64 stays exact: counts are bounded by the injection total
            # and the congruence transform multiplies by 0/+-1 entries
            assert counts.max(initial=0) <= averaged_pair_denominator(
                cert.order, blk.sigma.k)
            per_type[blk.sigma] = counts
    objective = objective_column(cert.t, cert.order)
    quads = [Fraction(0)] * len(objective)
    for blk in cert.blocks:
        denom = averaged_pair_denominator(cert.order, blk.sigma.k)
        bm = _resolve_basis(blk.sigma, blk.basis)
        nums = np.einsum("ia,gij,jb->gab", bm, per_type[blk.sigma], bm)
        dim = len(blk.basis)
        for gi in range(len(objective)):
            block_num = nums[gi]
            acc = Fraction(0)
            for a in range(dim):
                for b in range(dim):
                    v = int(block_num[a, b])
                    if v:
                        acc += blk.matrix[a][b] * v
            quads[gi] += acc / denom
    rows = []
    for gi in range(len(objective)):
        lower = objective[gi] - cert.bound
        rows.append(SlackRow(gi, lower, quads[gi], lower - quads[gi]))
    return SlackReport(cert.bound, rows, psd)


def rounding_margin_report(problem: SdpProblem, sol: Solution,
                           cert: Certificate) -> dict:
    """Numerical slack floor vs a bound on the rounding perturbation.

    Replacing the bound lambda by b adds lambda - b to every slack;
    replacing A by its rounding changes each slack by at most
    max|dA| * max_G sum|M_G| per block.  The certificate is expected to
    verify whenever the floor plus the bound headroom exceeds the
    perturbation bound.
    """
    coeff_mats = []
    for blk in problem.blocks:
        coeff_mats.append(np.array([[[float(v) for v in row] for row in m]
                                    for m in blk.matrices]))
    min_slack = None
    for gi in range(len(problem.graphs)):
        slack = float(problem.objective[gi]) - sol.lambda_
        for mats, sol_mat in zip(coeff_mats, sol.block_matrices):
            slack -= float(np.tensordot(mats[gi], np.asarray(sol_mat)))
        min_slack = slack if min_slack is None else min(min_slack, slack)
    perturbation = 0.0
    seen = 0
    for blk, mats, sol_mat in zip(problem.blocks, coeff_mats, sol.block_matrices):
        rounded = np.array([[float(v) for v in row]
                            for row in cert.blocks[seen].matrix])
        diff = float(np.abs(rounded - np.asarray(sol_mat)).max(initial=0.0))
        perturbation += diff * float(np.abs(mats).sum(axis=(1, 2)).max(initial=0.0))
        seen += len(blk.members)
    headroom = min_slack + (sol.lambda_ - float(cert.bound))
    return {
        "numerical_min_slack": min_slack,
        "bound_headroom": sol.lambda_ - float(cert.bound),
        "rounding_perturbation_bound": perturbation,
        "safe": headroom > perturbation,
    }


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def certificate_to_json(cert: Certificate) -> str:
    payload = {
        "format": 1,
        "spec": {"t": cert.t, "order": cert.order},
        "bound": str(cert.bound),
        "blocks": [
            {
                "type": format_graph_line(blk.sigma.graph),
                "parity": blk.parity,
                "basis": [
                    [[str(c), format_flag(_extension_flag(blk.sigma, i))]
                     for i, c in vec.coeffs]
                    for vec in blk.basis
                ],
                "matrix": [[str(v) for v in row] for row in blk.matrix],
            }
            for blk in cert.blocks
        ],
    }
    return json.dumps(payload, indent=1)


def _extension_flag(sigma: TypeSigma, index: int) -> Flag:
    return enumerate_flags(sigma, sigma.k + 1)[index]


def certificate_from_json(text: str) -> Certificate:
    payload = json.loads(text)
    if payload.get("format") != 1:
        raise ValueError("unknown certificate format")
    blocks = []
    for bpay in payload["blocks"]:
        sigma = TypeSigma(parse_graph_line(bpay["type"]))
        classes = {flag_canonical_key(f): i
                   for i, f in enumerate(enumerate_flags(sigma, sigma.k + 1))}
        basis = []
        for terms in bpay["basis"]:
            coeffs = {}
            for cstr, flagtext in terms:
                f = parse_flag(flagtext)
                if f.sigma.graph.mask != sigma.graph.mask:
                    raise ValueError("basis flag type differs from block type")
                key = flag_canonical_key(f)
                if key not in classes:
                    raise ValueError(f"unresolvable basis flag {flagtext!r}")
                coeffs[classes[key]] = Fraction(cstr)
            basis.append(flag_vector(sigma, sigma.k + 1, coeffs))
        matrix = [[Fraction(v) for v in row] for row in bpay["matrix"]]
        blocks.append(CertBlock(sigma, bpay["parity"], basis, matrix))
    return Certificate(Fraction(payload["bound"]), payload["spec"]["t"],
                       payload["spec"]["order"], blocks)


# ---------------------------------------------------------------------------
# reference margin comparison
# ---------------------------------------------------------------------------

def check_published_margins() -> dict:
    """Recompute the scaled per-row margins and compare to the shipped table.

    Each catalogue row's objective value is recomputed by clique counting;
    the comparison is at the table's own 4-decimal resolution.
    """
    graphs = refdata.reference_graphs()
    shipped = refdata.reference_margins()
    objective = objective_column(4, 6)
    max_dev = 0.0
    rows = []
    for i, g in enumerate(graphs):
        obj = objective[graph_index(g)]
        computed = float(refdata.SCALE * (obj - refdata.REFERENCE_BOUND))
        dev = abs(computed - float(shipped[i]))
        max_dev = max(max_dev, dev)
        rows.append((i, computed, shipped[i], dev))
    return {"rows": rows, "max_deviation": max_dev,
            "all_within": max_dev < 5e-5}
