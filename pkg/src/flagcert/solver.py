"""Dense primal-dual interior-point solver for small block-diagonal SDPs.

Solves the linear-matrix-inequality pair

    (P)  min c'x   s.t.  S(x) = sum_i x_i F_i - F0  is PSD
    (D)  max <F0,Y> s.t. <F_i,Y> = c_i,  Y PSD

for problems whose cone splits into a handful of dense symmetric blocks
plus one diagonal (linear-inequality) block.  Nesterov-Todd scaling with a
Mehrotra-style predictor-corrector; everything is dense numpy, which is
ample at the intended sizes (blocks up to ~16, a few hundred variables).

The structure is passed explicitly rather than as sparse F_i data: the
diagonal block is `lin_coeffs @ x + lin_const`, and each matrix block is
the symmetric matrix assembled from its own slice of x (upper-triangle
row-major entries).  Only the objective coefficient vector c is general.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class SolverError(RuntimeError):
    """Raised when the iteration cap is hit before reaching the tolerance."""

    def __init__(self, message, info=None):
        super().__init__(message)
        self.info = info or {}


@dataclass
class BlockStructure:
    """Variable layout: x[0:n_free] are unrestricted scalars (appearing only
    in the diagonal block), followed by one upper-triangle slice per matrix
    block."""

    n_free: int
    block_dims: list[int]

    def __post_init__(self):
        self.offsets = []
        pos = self.n_free
        for d in self.block_dims:
            self.offsets.append(pos)
            pos += d * (d + 1) // 2
        self.n_vars = pos
        self._tri = [np.triu_indices(d) for d in self.block_dims]

    def mat(self, x: np.ndarray, b: int) -> np.ndarray:
        d = self.block_dims[b]
        rows, cols = self._tri[b]
        a = np.zeros((d, d))
        vals = x[self.offsets[b]:self.offsets[b] + len(rows)]
        a[rows, cols] = vals
        a[cols, rows] = vals
        return a

    def collect(self, mats: list[np.ndarray]) -> np.ndarray:
        """Adjoint of `mat` over all blocks: <E_sym_jk, Z> per variable."""
        out = np.zeros(self.n_vars)
        for b, z in enumerate(mats):
            rows, cols = self._tri[b]
            vals = z[rows, cols] * np.where(rows == cols, 1.0, 2.0)
            out[self.offsets[b]:self.offsets[b] + len(rows)] = vals
        return out


@dataclass
class IpmResult:
    x: np.ndarray
    y_lin: np.ndarray
    y_blocks: list[np.ndarray]
    iterations: int
    gap: float
    pfeas: float
    dfeas: float
    converged: bool
    notes: dict = field(default_factory=dict)


def _nt_scaling(S: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Inverse NT scaling point U = W^{-1} with W Y W = S."""
    ls = np.linalg.cholesky(S)
    h = ls.T @ Y @ ls
    h = (h + h.T) / 2
    evals, evecs = np.linalg.eigh(h)
    evals = np.maximum(evals, 1e-300)
    hroot = evecs @ np.diag(evals ** 0.25) @ evecs.T  # h^{1/2} via two quarters
    hroot = hroot @ hroot
    lsinv = np.linalg.inv(ls)
    u = lsinv.T @ hroot @ lsinv
    return (u + u.T) / 2


def _schur_block(U: np.ndarray) -> np.ndarray:
    """Matrix of <E_jk, U E_lm U> over upper-triangle index pairs."""
    d = U.shape[0]
    rows, cols = np.triu_indices(d)
    ujl = U[np.ix_(rows, rows)]
    ukm = U[np.ix_(cols, cols)]
    ujm = U[np.ix_(rows, cols)]
    ukl = U[np.ix_(cols, rows)]
    base = ujl * ukm + ujm * ukl
    off = (rows != cols).astype(float)
    factor = 2.0 ** (off[:, None] + off[None, :] - 1.0)
    return base * factor


def _psd_step_limit(S: np.ndarray, dS: np.ndarray) -> float:
    """sup {a : S + a dS psd}; S assumed positive definite."""
    ls = np.linalg.cholesky(S)
    lsinv = np.linalg.inv(ls)
    t = lsinv @ dS @ lsinv.T
    lam = np.linalg.eigvalsh((t + t.T) / 2)[0]
    if lam >= 0:
        return np.inf
    return -1.0 / lam


def _lin_step_limit(s: np.ndarray, ds: np.ndarray) -> float:
    neg = ds < 0
    if not neg.any():
        return np.inf
    return float(np.min(-s[neg] / ds[neg]))


def solve_ipm(structure: BlockStructure,
              lin_coeffs: np.ndarray,
              lin_const: np.ndarray,
              c: np.ndarray,
              tol: float = 1e-9,
              max_iter: int = 200,
              step_frac: float = 0.98) -> IpmResult:
    """Run the predictor-corrector NT method on the structured problem.

    lin_coeffs: (N, n_vars) rows of the diagonal block, lin_const: (N,);
    the diagonal slack is lin_coeffs @ x + lin_const.
    """
    try:
        return _iterate(structure, lin_coeffs, lin_const, c,
                        tol, max_iter, step_frac)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"numerical breakdown ({exc}); the problem may be unbounded "
            "or dual infeasible") from exc


def _iterate(st: BlockStructure, lin_coeffs, lin_const, c,
             tol, max_iter, step_frac) -> IpmResult:
    nblocks = len(st.block_dims)
    N = len(lin_const)
    nu = sum(st.block_dims) + N

    x = np.zeros(st.n_vars)
    S = [np.eye(d) for d in st.block_dims]
    s = np.maximum(lin_const, 0.0) + 1.0 + float(np.abs(lin_const).max(initial=0.0))
    Y = [np.eye(d) for d in st.block_dims]
    y = np.full(N, 1.0 / max(N, 1))

    f0_norm = 1.0 + float(np.linalg.norm(lin_const))
    c_norm = 1.0 + float(np.linalg.norm(c))

    def residuals():
        rp_lin = lin_coeffs @ x + lin_const - s
        rp_mat = [st.mat(x, b) - S[b] for b in range(nblocks)]
        rd = c - lin_coeffs.T @ y - st.collect(Y)
        return rp_lin, rp_mat, rd

    info = {}
    for it in range(max_iter):
        rp_lin, rp_mat, rd = residuals()
        gap = sum(float(np.tensordot(S[b], Y[b])) for b in range(nblocks))
        gap += float(s @ y)
        mu = gap / nu
        pobj = float(c @ x)
        dobj = float(lin_const @ y) * -1.0
        relgap = gap / (1.0 + abs(pobj) + abs(dobj))
        pfeas = (np.linalg.norm(rp_lin)
                 + sum(np.linalg.norm(r) for r in rp_mat)) / f0_norm
        dfeas = float(np.linalg.norm(rd)) / c_norm
        info = dict(iterations=it, gap=relgap, pfeas=pfeas, dfeas=dfeas, mu=mu)
        if relgap <= tol and pfeas <= tol * 100 and dfeas <= tol * 100:
            return IpmResult(x, y, Y, it, relgap, pfeas, dfeas, True)

        # NT scaling factors
        U = [_nt_scaling(S[b], Y[b]) for b in range(nblocks)]
        w_lin = y / s

        # Schur complement, shared by both solves this iteration
        B = lin_coeffs.T @ (lin_coeffs * w_lin[:, None])
        for b in range(nblocks):
            o = st.offsets[b]
            t = st.block_dims[b] * (st.block_dims[b] + 1) // 2
            B[o:o + t, o:o + t] += _schur_block(U[b])
        B += np.eye(st.n_vars) * (1e-13 * max(1.0, float(np.trace(B)) / st.n_vars))
        try:
            chol = np.linalg.cholesky(B)
        except np.linalg.LinAlgError:
            B += np.eye(st.n_vars) * (1e-8 * float(np.trace(B)) / st.n_vars)
            chol = np.linalg.cholesky(B)

        def solve_newton(nu_target):
            # complementarity target without the residual correction
            z0_lin = nu_target / s - y
            z0_mat = []
            for b in range(nblocks):
                sinv = np.linalg.inv(S[b])
                z0_mat.append(nu_target * (sinv + sinv.T) / 2 - Y[b])
            # rhs uses z0 - U Rp U since dS = F(dx) + Rp
            z_lin = z0_lin - w_lin * rp_lin
            z_mat = [z0_mat[b] - U[b] @ rp_mat[b] @ U[b] for b in range(nblocks)]
            rhs = lin_coeffs.T @ z_lin + st.collect(z_mat) - rd
            dx = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
            ds_lin = lin_coeffs @ dx + rp_lin
            dS_mat = [st.mat(dx, b) + rp_mat[b] for b in range(nblocks)]
            dy_lin = z0_lin - w_lin * ds_lin
            dY_mat = []
            for b in range(nblocks):
                dyb = z0_mat[b] - U[b] @ dS_mat[b] @ U[b]
                dY_mat.append((dyb + dyb.T) / 2)
            return dx, ds_lin, dS_mat, dy_lin, dY_mat

        def step_limits(ds_lin, dS_mat, dy_lin, dY_mat):
            ap = min([_lin_step_limit(s, ds_lin)]
                     + [_psd_step_limit(S[b], dS_mat[b]) for b in range(nblocks)])
            ad = min([_lin_step_limit(y, dy_lin)]
                     + [_psd_step_limit(Y[b], dY_mat[b]) for b in range(nblocks)])
            return min(1.0, step_frac * ap), min(1.0, step_frac * ad)

        # predictor
        dxa, dsa, dSa, dya, dYa = solve_newton(0.0)
        apa, ada = step_limits(dsa, dSa, dya, dYa)
        gap_aff = float((s + apa * dsa) @ (y + ada * dya))
        for b in range(nblocks):
            gap_aff += float(np.tensordot(S[b] + apa * dSa[b], Y[b] + ada * dYa[b]))
        sigma = min(1.0, max((gap_aff / gap) ** 3, 1e-10)) if gap > 0 else 0.1

        # corrector
        dx, ds_lin, dS_mat, dy_lin, dY_mat = solve_newton(sigma * mu)
        ap, ad = step_limits(ds_lin, dS_mat, dy_lin, dY_mat)

        x = x + ap * dx
        s = s + ap * ds_lin
        y = y + ad * dy_lin
        for b in range(nblocks):
            S[b] = S[b] + ap * dS_mat[b]
            Y[b] = Y[b] + ad * dY_mat[b]

    raise SolverError(
        f"no convergence within {max_iter} iterations "
        f"(gap {info.get('gap'):.2e}, pfeas {info.get('pfeas'):.2e}, "
        f"dfeas {info.get('dfeas'):.2e})", info)
