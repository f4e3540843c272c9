"""Assembly of the bound-maximization SDP and solver/file interfaces.

The optimization is the feasibility form

    maximize lambda
    s.t.     obj_G - lambda - sum_blocks <A_block, M_G^block>  >=  0
             for every host graph G, with every A_block PSD,

whose per-graph rows come from the objective column and the quadratic-form
coefficient matrices.  The sign convention above is used everywhere,
including exported files and certificates.

Complement sharing pairs every type with its literal complement (label
structure preserved) and uses one matrix variable for the pair; the
coefficient matrices of the partner are aligned by the subset-complement
reindexing of the extension basis.  The one self-complementary order-4
type contributes a single member.  By the complement symmetry of the
constraint data, sharing does not change the optimal bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graphs import Graph, enumerate_graphs, canonical_key
from .flags import (
    TypeSigma,
    complement_type,
    enumerate_types,
    is_self_complementary,
)
from .algebra import (
    FlagVector,
    basis_matrix,
    flag_vector,
    invariant_split,
)
from .densities import (
    averaged_pair_counts,
    averaged_pair_denominator,
    objective_column,
)
from .solver import BlockStructure, IpmResult, SolverError, solve_ipm

PARITIES = ("+", "-")


@dataclass(frozen=True)
class ObjectiveSpec:
    """What to optimize: clique order, expansion order, types and parities."""

    t: int
    order: int
    types: tuple[TypeSigma, ...]
    parities: tuple[str, ...] = PARITIES
    complement_sharing: bool = True

    def __post_init__(self):
        if self.t not in (3, 4):
            raise ValueError("clique order must be 3 or 4")
        for sigma in self.types:
            if 2 * (sigma.k + 1) - sigma.k > self.order:
                raise ValueError(
                    f"type of order {sigma.k} needs expansion order "
                    f">= {sigma.k + 2}, got {self.order}")
        for p in self.parities:
            if p not in PARITIES:
                raise ValueError(f"unknown parity {p!r}")


def default_m4_spec(complement_sharing: bool = True) -> ObjectiveSpec:
    return ObjectiveSpec(4, 6, enumerate_types(4),
                         complement_sharing=complement_sharing)


def goodman_spec() -> ObjectiveSpec:
    return ObjectiveSpec(3, 3, enumerate_types(1), parities=("+",),
                         complement_sharing=False)


@dataclass
class BlockMember:
    """One (type, parity) slice sharing this block's matrix variable."""

    sigma: TypeSigma
    parity: str
    basis: list[FlagVector]


@dataclass
class SdpBlock:
    block_id: str
    members: list[BlockMember]
    dim: int
    matrices: list[list[list[Fraction]]]  # per graph index, dim x dim


@dataclass
class SdpProblem:
    spec: ObjectiveSpec
    graphs: tuple[Graph, ...]
    objective: list[Fraction]
    blocks: list[SdpBlock]
    row_scales: list[Fraction] = field(default_factory=list)
    pruned: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not self.row_scales:
            self.row_scales = [Fraction(1)] * len(self.graphs)

    def scaled(self, scales: list[Fraction]) -> "SdpProblem":
        """Same feasible set with every constraint row multiplied through."""
        if len(scales) != len(self.graphs) or any(c <= 0 for c in scales):
            raise ValueError("need one positive scale per constraint row")
        return SdpProblem(self.spec, self.graphs, self.objective, self.blocks,
                          [a * b for a, b in zip(self.row_scales, scales)],
                          self.pruned)


@dataclass
class Solution:
    lambda_: float
    block_matrices: list[np.ndarray]
    iterations: int = 0
    gap: float = 0.0
    pfeas: float = 0.0
    dfeas: float = 0.0


# ---------------------------------------------------------------------------
# problem assembly
# ---------------------------------------------------------------------------

def _complement_subset_map(k: int) -> list[int]:
    full = (1 << k) - 1
    return [v ^ full for v in range(1 << k)]


def _mapped_basis(basis: list[FlagVector], sigma_comp: TypeSigma) -> list[FlagVector]:
    """Reindex extension-space vectors by V -> [k] \\ V onto the complement type."""
    k = sigma_comp.k
    cmap = _complement_subset_map(k)
    out = []
    for v in basis:
        out.append(flag_vector(sigma_comp, k + 1,
                               {cmap[i]: c for i, c in v.coeffs}))
    return out


def _complement_groups(types: tuple[TypeSigma, ...]) -> list[tuple[TypeSigma, bool]]:
    """(leader, paired) per complement class present among `types`.

    Groups are formed only when both partners are present; a type whose
    partner is absent from the list stands alone unshared.
    """
    keys = {canonical_key(s.graph): s for s in types}
    groups = []
    done = set()
    for sigma in types:
        key = canonical_key(sigma.graph)
        if key in done:
            continue
        if is_self_complementary(sigma):
            done.add(key)
            groups.append((sigma, False))
            continue
        partner_key = canonical_key(complement_type(sigma).graph)
        if partner_key in keys:
            done.add(key)
            done.add(partner_key)
            groups.append((sigma, True))
        else:
            done.add(key)
            groups.append((sigma, False))
    return groups


def _prune_common_kernel(matrices: list[list[list[Fraction]]], dim: int
                         ) -> tuple[list[list[list[Fraction]]], list[int]]:
    """Drop basis directions annihilated by every per-graph matrix.

    Such directions contribute to no constraint; leaving them in forces the
    dual iterates onto the cone boundary and stalls the interior-point
    method.  Restriction is by coordinate subset, so the surviving basis
    vectors are unchanged.  Returns the restricted matrices and the kept
    coordinate indices.
    """
    live = [r for r in range(dim)
            if any(any(m[r][c] for c in range(dim)) for m in matrices)]
    if len(live) == dim:
        return matrices, live
    sub = [[[m[r][c] for c in live] for r in live] for m in matrices]
    return sub, live


def build_problem(spec: ObjectiveSpec) -> SdpProblem:
    graphs = enumerate_graphs(spec.order)
    objective = objective_column(spec.t, spec.order)
    blocks: list[SdpBlock] = []
    pruned_notes: list[str] = []

    if spec.complement_sharing:
        plan = _complement_groups(spec.types)
    else:
        plan = [(sigma, False) for sigma in spec.types]

    denom = None
    for gi_type, (sigma, paired) in enumerate(plan):
        split = dict(zip(PARITIES, invariant_split(sigma)))
        denom = averaged_pair_denominator(spec.order, sigma.k)
        # exact in int64: counts <= (order)_k * 2, basis entries in {-1,0,1}
        counts = np.array(averaged_pair_counts(sigma, spec.order), dtype=np.int64)
        counts_comp = None
        sigma_comp = None
        if paired:
            sigma_comp = complement_type(sigma)
            counts_comp = np.array(averaged_pair_counts(sigma_comp, spec.order),
                                   dtype=np.int64)
        for parity in spec.parities:
            basis = split[parity]
            if not basis:
                continue
            bm = np.array([[int(v) for v in row]
                           for row in basis_matrix(basis, 1 << sigma.k)],
                          dtype=np.int64)
            nums = np.einsum("ia,gij,jb->gab", bm, counts, bm)
            members = [BlockMember(sigma, parity, basis)]
            if paired:
                comp_basis = _mapped_basis(basis, sigma_comp)
                bm_c = np.array([[int(v) for v in row]
                                 for row in basis_matrix(comp_basis, 1 << sigma.k)],
                                dtype=np.int64)
                nums = nums + np.einsum("ia,gij,jb->gab", bm_c, counts_comp, bm_c)
                members.append(BlockMember(sigma_comp, parity, comp_basis))
            mats = [[[Fraction(int(nums[g, a, b]), denom)
                      for b in range(len(basis))]
                     for a in range(len(basis))]
                    for g in range(len(graphs))]
            mats, kept = _prune_common_kernel(mats, len(basis))
            if len(kept) < len(basis):
                pruned_notes.append(
                    f"type {gi_type}{parity}: dropped "
                    f"{len(basis) - len(kept)} inert directions")
                for m in members:
                    m.basis = [m.basis[i] for i in kept]
            if not kept:
                continue
            blocks.append(SdpBlock(f"t{gi_type}{parity}", members,
                                   len(kept), mats))
    return SdpProblem(spec, graphs, objective, blocks, pruned=pruned_notes)


# ---------------------------------------------------------------------------
# numerical solve
# ---------------------------------------------------------------------------

def _structure(problem: SdpProblem) -> tuple[BlockStructure, np.ndarray, np.ndarray, np.ndarray]:
    st = BlockStructure(n_free=1, block_dims=[b.dim for b in problem.blocks])
    n_rows = len(problem.graphs)
    q = np.zeros((n_rows, st.n_vars))
    const = np.zeros(n_rows)
    for g in range(n_rows):
        scale = float(problem.row_scales[g])
        q[g, 0] = -scale
        const[g] = float(problem.objective[g]) * scale
        for bi, block in enumerate(problem.blocks):
            m = block.matrices[g]
            off = st.offsets[bi]
            pos = 0
            for j in range(block.dim):
                for k in range(j, block.dim):
                    w = 1.0 if j == k else 2.0
                    q[g, off + pos] = -w * float(m[j][k]) * scale
                    pos += 1
    c = np.zeros(st.n_vars)
    c[0] = -1.0
    return st, q, const, c


def solve(problem: SdpProblem, tol: float = 1e-9,
          max_iter: int = 200) -> Solution:
    """Maximize the bound numerically; raises SolverError on non-convergence."""
    st, q, const, c = _structure(problem)
    res = solve_ipm(st, q, const, c, tol=tol, max_iter=max_iter)
    mats = [st.mat(res.x, b) for b in range(len(problem.blocks))]
    return Solution(float(res.x[0]), mats, res.iterations,
                    res.gap, res.pfeas, res.dfeas)


# ---------------------------------------------------------------------------
# SDPA sparse export / solution text import
# ---------------------------------------------------------------------------

class SdpaFormatError(ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def export_sdpa(problem: SdpProblem, path) -> None:
    """Write the problem in SDPA sparse form (.dat-s).

    Convention: minimize c'x with X = sum x_i F_i - F0 PSD; variable 1 is
    the bound (so c = (-1, 0, ...) and the reported primal objective is the
    negated bound).  Matrix blocks come first, then the per-graph slack
    rows as one diagonal block.  Entries are doubles printed with repr
    (round-trip exact for binary doubles).
    """
    st, q, const, c = _structure(problem)
    n_rows = len(problem.graphs)
    lines = []
    lines.append(f"{st.n_vars} = mdim")
    lines.append(f"{len(problem.blocks) + 1} = nblocks")
    dims = [str(b.dim) for b in problem.blocks] + [str(-n_rows)]
    lines.append(" ".join(dims))
    lines.append(" ".join(repr(float(v)) for v in c))
    # F0: mat blocks zero; slack diag = -const
    slack_blk = len(problem.blocks) + 1
    for g in range(n_rows):
        if const[g]:
            lines.append(f"0 {slack_blk} {g + 1} {g + 1} {repr(float(-const[g]))}")
    for i in range(st.n_vars):
        # matrix-copy components
        for bi, block in enumerate(problem.blocks):
            off = st.offsets[bi]
            t = block.dim * (block.dim + 1) // 2
            if off <= i < off + t:
                pos = i - off
                j, k = _tri_unrank(block.dim, pos)
                lines.append(f"{i + 1} {bi + 1} {j + 1} {k + 1} 1.0")
        for g in range(n_rows):
            if q[g, i]:
                lines.append(f"{i + 1} {slack_blk} {g + 1} {g + 1} {repr(float(q[g, i]))}")
    with open(path, "w") as fh:
        fh.write('"flag-algebra bound problem"\n')
        fh.write("\n".join(lines) + "\n")


def _tri_unrank(dim: int, pos: int) -> tuple[int, int]:
    for j in range(dim):
        row = dim - j
        if pos < row:
            return j, j + pos
        pos -= row
    raise IndexError(pos)


def read_sdpa(path):
    """Parse an SDPA sparse file back into (m, block dims, c, entries).

    entries: list of (matrix index, block, i, j, value) with 0 = constant
    term.  Raises SdpaFormatError with a line number on malformed input.
    """
    m = None
    nblocks = None
    dims = None
    c = None
    entries = []
    with open(path) as fh:
        for lineno, rawline in enumerate(fh, 1):
            text = rawline.strip()
            if not text or text.startswith(('"', "*")):
                continue
            head = text.split("=")[0].strip()
            if m is None:
                try:
                    m = int(head.split()[0])
                except ValueError:
                    raise SdpaFormatError(f"bad variable count {text!r}", lineno)
                continue
            if nblocks is None:
                try:
                    nblocks = int(head.split()[0])
                except ValueError:
                    raise SdpaFormatError(f"bad block count {text!r}", lineno)
                continue
            if dims is None:
                toks = text.replace(",", " ").replace("(", " ").replace(")", " ").split()
                try:
                    dims = [int(v) for v in toks[:nblocks]]
                except ValueError:
                    raise SdpaFormatError(f"bad block sizes {text!r}", lineno)
                if len(dims) != nblocks:
                    raise SdpaFormatError(
                        f"expected {nblocks} block sizes, got {len(dims)}", lineno)
                continue
            if c is None:
                toks = text.replace(",", " ").split()
                try:
                    c = [float(v) for v in toks]
                except ValueError:
                    raise SdpaFormatError(f"bad objective vector {text!r}", lineno)
                if len(c) != m:
                    raise SdpaFormatError(
                        f"expected {m} objective entries, got {len(c)}", lineno)
                continue
            toks = text.replace(",", " ").split()
            if len(toks) != 5:
                raise SdpaFormatError(f"expected 5 fields, got {len(toks)}", lineno)
            try:
                mat, blk, i, j = (int(v) for v in toks[:4])
                val = float(toks[4])
            except ValueError:
                raise SdpaFormatError(f"bad entry {text!r}", lineno)
            if not 0 <= mat <= m:
                raise SdpaFormatError(f"matrix index {mat} out of range", lineno)
            if not 1 <= blk <= nblocks:
                raise SdpaFormatError(f"block index {blk} out of range", lineno)
            entries.append((mat, blk, i, j, val))
    if c is None:
        raise SdpaFormatError("file ended before the objective vector")
    return m, dims, c, entries


def export_solution(problem: SdpProblem, sol: Solution, path) -> None:
    """Own text format: bound on the first line, then blocks row-major."""
    with open(path, "w") as fh:
        fh.write(f"{repr(sol.lambda_)}\n")
        for block, mat in zip(problem.blocks, sol.block_matrices):
            for row in np.asarray(mat):
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def import_solution(problem: SdpProblem, path) -> Solution:
    with open(path) as fh:
        rows = [line.split() for line in fh if line.strip()]
    if not rows:
        raise SdpaFormatError("empty solution file")
    try:
        lam = float(rows[0][0])
    except (ValueError, IndexError):
        raise SdpaFormatError("first line must hold the bound") from None
    mats = []
    pos = 1
    for block in problem.blocks:
        need = block.dim
        chunk = rows[pos:pos + need]
        if len(chunk) != need or any(len(r) != need for r in chunk):
            raise SdpaFormatError(
                f"block {block.block_id} needs {need}x{need} values")
        mats.append(np.array([[float(v) for v in r] for r in chunk]))
        pos += need
    if pos != len(rows):
        raise SdpaFormatError(f"{len(rows) - pos} unexpected trailing lines")
    return Solution(lam, mats)
