"""Dense Hermitian semidefinite programming at desk scale.

Standard form handled here:

    minimize    Re tr(C X) + c^T y
    subject to  Re tr(A_k X) + a_k^T y  (<= | >= | ==)  b_k
                X Hermitian PSD,  y >= 0 elementwise

The solver is a log-barrier Newton method (path following with
self-concordance-damped Newton centering) run on the real symmetric
embedding ``[[Re X, -Im X], [Im X, Re X]]``; traces on the embedding are
twice the complex-side real traces and are halved consistently.

Inequality rows enter the barrier; equality rows are eliminated exactly
in each Newton step through the KKT system, with an infeasible-start
correction that drives their residuals to float precision within the
first few steps.  (Modelling an equality as a pair of opposing
inequalities of width ~tol/10, the textbook shortcut, is catastrophically
ill-conditioned in this regime: the twin barrier walls produce Newton
terms that cancel to machine zero.)

Phase 1 minimizes a relaxation scalar tau over the one-sided rows; any
iterate with tau < 1 is strictly feasible for them, and a lower bound
above 1 certifies infeasibility.  A large trace cap keeps the phase
bounded.  Equality rows need no phase-1 treatment.

The per-step Newton system uses the Woodbury identity: the barrier
Hessian is the log-det term (inverted in closed form as ``D -> Z D Z``)
plus one rank-one term per inequality row, so only small systems over
the constraint rows are factorized.  Diagonal constraint matrices (the
common case for the lifted-reflection subproblems) take a fast path that
avoids dense products.

Everything is deterministic: no randomness, no iteration-order ambiguity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .channel import ComplexArray

Sense = Literal["<=", ">=", "=="]

MAX_BLOCK_DIM = 256
_BIG_M = 1e8
_INF = np.inf


class SdpError(RuntimeError):
    pass


@dataclass(frozen=True)
class TraceConstraint:
    """Row ``Re tr(A X) + a^T y  sense  b``; A is symmetrized on construction."""

    matrix: ComplexArray | None
    scalars: np.ndarray | None
    sense: Sense
    rhs: float


@dataclass
class SdpProblem:
    """One Hermitian matrix block plus nonnegative scalars, trace-form rows."""

    block_dim: int
    num_scalars: int
    cost_matrix: ComplexArray | None = None
    cost_scalars: np.ndarray | None = None
    constraints: list[TraceConstraint] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not (1 <= self.block_dim <= MAX_BLOCK_DIM):
            raise ValueError(f"block_dim must be in [1, {MAX_BLOCK_DIM}]")
        if self.num_scalars < 0:
            raise ValueError("num_scalars must be >= 0")
        self.cost_matrix = _hermitize(self.cost_matrix, self.block_dim)
        self.cost_scalars = _as_scalars(self.cost_scalars, self.num_scalars)

    def add_constraint(
        self,
        matrix: ComplexArray | None,
        scalars: np.ndarray | None,
        sense: Sense,
        rhs: float,
    ) -> None:
        a = _hermitize(matrix, self.block_dim)
        v = _as_scalars(scalars, self.num_scalars)
        if sense not in ("<=", ">=", "=="):
            raise ValueError(f"bad sense {sense!r}")
        if not np.any(a) and not np.any(v):
            raise ValueError("constraint has no variables")
        self.constraints.append(TraceConstraint(a, v, sense, float(rhs)))


@dataclass
class SdpSolution:
    X: ComplexArray
    scalars: np.ndarray
    status: Literal["optimal", "infeasible", "unbounded", "max_iter"]
    objective_value: float
    iterations: int
    duals: np.ndarray | None = None       # per original constraint, original units
    gap_estimate: float = np.inf          # duality-gap bound, original units
    data_scale: float = 1.0               # objective row norm used for normalization


def _hermitize(a: ComplexArray | None, n: int) -> ComplexArray:
    if a is None:
        return np.zeros((n, n), dtype=complex)
    a = np.asarray(a, dtype=complex)
    if a.shape != (n, n):
        raise ValueError(f"matrix shape {a.shape} != ({n}, {n})")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("non-finite matrix entries")
    return 0.5 * (a + a.conj().T)


def _as_scalars(v: np.ndarray | None, s: int) -> np.ndarray:
    if v is None:
        return np.zeros(s)
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (s,):
        raise ValueError(f"scalar coefficient shape {v.shape} != ({s},)")
    return v


def real_embed(h: ComplexArray) -> np.ndarray:
    """[[Re H, -Im H], [Im H, Re H]]; Hermitian H maps to symmetric, PSD to PSD."""
    h = np.asarray(h, dtype=complex)
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def complex_from_embed(z: np.ndarray) -> ComplexArray:
    """Project a symmetric 2n x 2n matrix back onto the embedded subspace."""
    n = z.shape[0] // 2
    re = 0.5 * (z[:n, :n] + z[n:, n:])
    im = 0.5 * (z[n:, :n] - z[:n, n:])
    x = re + 1j * im
    return 0.5 * (x + x.conj().T)


def max_eig_pair(h: ComplexArray) -> tuple[float, ComplexArray]:
    """Largest eigenvalue and unit eigenvector with a deterministic phase.

    The eigenvector is rotated so its first entry of non-negligible modulus
    is real and positive.
    """
    h = np.asarray(h, dtype=complex)
    h = 0.5 * (h + h.conj().T)
    vals, vecs = np.linalg.eigh(h)
    lam = float(vals[-1])
    v = vecs[:, -1]
    mags = np.abs(v)
    j = int(np.argmax(mags > 1e-12 * mags.max())) if mags.max() > 0 else 0
    phase = v[j] / abs(v[j]) if abs(v[j]) > 0 else 1.0
    v = v / phase
    return lam, v


# ---------------------------------------------------------------------------
# internal rows
#
# Inequalities are kept in lo/up form (exactly one side finite).  Equalities
# are a separate set with target values.  Diagonal-matrix rows are stored as
# their diagonals for the fast path; dense rows carry embedded matrices.


@dataclass
class _RowSet:
    diag_d: np.ndarray      # (m_diag, 2n) embedded diagonals
    diag_a: np.ndarray      # (m_diag, s)
    dense_A: np.ndarray     # (m_dense, 2n, 2n) embedded symmetric matrices
    dense_a: np.ndarray     # (m_dense, s)
    origin: list[int]

    @property
    def m(self) -> int:
        return len(self.diag_a) + len(self.dense_a)

    @property
    def a_all(self) -> np.ndarray:
        return np.vstack([self.diag_a, self.dense_a])

    def values(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        vals = []
        if len(self.diag_a):
            vals.append(0.5 * self.diag_d @ np.diag(z) + self.diag_a @ y)
        if len(self.dense_a):
            g = 0.5 * np.tensordot(self.dense_A, z, axes=([1, 2], [0, 1]))
            vals.append(g + self.dense_a @ y)
        if not vals:
            return np.zeros(0)
        return np.concatenate(vals)


@dataclass
class _Problem:
    ineq: _RowSet
    ineq_lo: np.ndarray
    ineq_up: np.ndarray
    eq: _RowSet
    eq_b: np.ndarray
    ce: np.ndarray
    cvec: np.ndarray
    n2: int

    @property
    def nu(self) -> float:
        return self.n2 + len(self.cvec) + self.ineq.m


def _preprocess(problem: SdpProblem) -> tuple[_Problem, float, np.ndarray]:
    """Scale rows and the objective; split into inequality and equality sets."""
    n, s = problem.block_dim, problem.num_scalars
    ce = real_embed(problem.cost_matrix)
    cvec = problem.cost_scalars.copy()
    r0 = max(np.linalg.norm(problem.cost_matrix), np.abs(cvec).max(initial=0.0), 1e-30)
    ce /= r0
    cvec = cvec / r0

    buckets = {
        "ineq": {"dd": [], "da": [], "dlo": [], "dup": [], "do": [],
                 "eA": [], "ea": [], "elo": [], "eup": [], "eo": []},
        "eq": {"dd": [], "da": [], "db": [], "do": [],
               "eA": [], "ea": [], "eb": [], "eo": []},
    }
    row_scales = np.empty(len(problem.constraints))
    for idx, con in enumerate(problem.constraints):
        r = max(np.linalg.norm(con.matrix), np.abs(con.scalars).max(initial=0.0), 1e-30)
        row_scales[idx] = r
        a_c = con.matrix / r
        avec = con.scalars / r
        b = con.rhs / r
        off = a_c - np.diag(np.diag(a_c))
        is_diag = not np.any(off)
        if con.sense == "==":
            dst = buckets["eq"]
            if is_diag:
                dst["dd"].append(np.concatenate([a_c.real.diagonal()] * 2))
                dst["da"].append(avec)
                dst["db"].append(b)
                dst["do"].append(idx)
            else:
                dst["eA"].append(real_embed(a_c))
                dst["ea"].append(avec)
                dst["eb"].append(b)
                dst["eo"].append(idx)
        else:
            lo, up = (-_INF, b) if con.sense == "<=" else (b, _INF)
            dst = buckets["ineq"]
            if is_diag:
                dst["dd"].append(np.concatenate([a_c.real.diagonal()] * 2))
                dst["da"].append(avec)
                dst["dlo"].append(lo)
                dst["dup"].append(up)
                dst["do"].append(idx)
            else:
                dst["eA"].append(real_embed(a_c))
                dst["ea"].append(avec)
                dst["elo"].append(lo)
                dst["eup"].append(up)
                dst["eo"].append(idx)

    bi, be = buckets["ineq"], buckets["eq"]
    n2 = 2 * n
    ineq = _RowSet(
        diag_d=np.array(bi["dd"]).reshape(len(bi["dd"]), n2),
        diag_a=np.array(bi["da"]).reshape(len(bi["da"]), s),
        dense_A=np.array(bi["eA"]).reshape(len(bi["eA"]), n2, n2),
        dense_a=np.array(bi["ea"]).reshape(len(bi["ea"]), s),
        origin=bi["do"] + bi["eo"],
    )
    eq = _RowSet(
        diag_d=np.array(be["dd"]).reshape(len(be["dd"]), n2),
        diag_a=np.array(be["da"]).reshape(len(be["da"]), s),
        dense_A=np.array(be["eA"]).reshape(len(be["eA"]), n2, n2),
        dense_a=np.array(be["ea"]).reshape(len(be["ea"]), s),
        origin=be["do"] + be["eo"],
    )
    prob = _Problem(
        ineq=ineq,
        ineq_lo=np.array(bi["dlo"] + bi["elo"], dtype=float),
        ineq_up=np.array(bi["dup"] + bi["eup"], dtype=float),
        eq=eq,
        eq_b=np.array(be["db"] + be["eb"], dtype=float),
        ce=ce,
        cvec=cvec,
        n2=n2,
    )
    return prob, r0, row_scales


# ---------------------------------------------------------------------------
# barrier core


def _chol_logdet(z: np.ndarray) -> tuple[np.ndarray | None, float]:
    try:
        zl = np.linalg.cholesky(z)
    except np.linalg.LinAlgError:
        return None, np.inf
    return zl, 2.0 * float(np.log(np.diag(zl)).sum())


def _chol_inverse(zl: np.ndarray) -> np.ndarray:
    n = zl.shape[0]
    linv = np.linalg.solve(zl, np.eye(n))
    return linv.T @ linv


class _Barrier:
    """Damped-Newton centering with exact equality elimination."""

    def __init__(self, prob: _Problem):
        self.p = prob
        self.fin_lo = np.isfinite(prob.ineq_lo)
        self.fin_up = np.isfinite(prob.ineq_up)
        self.res_scale = max(1.0, float(np.abs(prob.eq_b).max(initial=0.0)))

    def res_tol(self, t: float) -> float:
        # per-step float noise in the Newton correction grows ~ eps * t
        return max(1e-9, 1e-14 * t * self.res_scale)

    def objective(self, z: np.ndarray, y: np.ndarray) -> float:
        return 0.5 * float(np.tensordot(self.p.ce, z)) + float(self.p.cvec @ y)

    def ineq_slacks(self, z: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.p.ineq.values(z, y)
        return g - self.p.ineq_lo, self.p.ineq_up - g

    def eq_residual(self, z: np.ndarray, y: np.ndarray) -> np.ndarray:
        if self.p.eq.m == 0:
            return np.zeros(0)
        return self.p.eq.values(z, y) - self.p.eq_b

    def strictly_feasible_ineq(self, z: np.ndarray, y: np.ndarray) -> bool:
        if len(y) and y.min() <= 0:
            return False
        zl, _ = _chol_logdet(z)
        if zl is None:
            return False
        s_lo, s_up = self.ineq_slacks(z, y)
        return bool(
            (not self.fin_lo.any() or s_lo[self.fin_lo].min() > 0)
            and (not self.fin_up.any() or s_up[self.fin_up].min() > 0)
        )

    def _gram(self, rows_a: _RowSet, rows_b: _RowSet, z: np.ndarray, zz, y2) -> np.ndarray:
        """<u_i, H0^{-1} u_j> for u from the two row sets (shares fast paths)."""
        ma, mb = rows_a.m, rows_b.m
        mda, mdb = len(rows_a.diag_a), len(rows_b.diag_a)
        out = np.empty((ma, mb))
        if mda and mdb:
            out[:mda, :mdb] = 0.25 * (rows_a.diag_d @ zz @ rows_b.diag_d.T)
        if len(rows_b.dense_A):
            vs_b = z @ rows_b.dense_A @ z
            if mda:
                dv = vs_b.diagonal(axis1=1, axis2=2)
                out[:mda, mdb:] = 0.25 * (rows_a.diag_d @ dv.T)
            if len(rows_a.dense_A):
                flat = rows_a.dense_A.reshape(len(rows_a.dense_A), -1)
                out[mda:, mdb:] = 0.25 * (flat @ vs_b.reshape(len(vs_b), -1).T)
        if len(rows_a.dense_A) and mdb:
            vs_a = z @ rows_a.dense_A @ z
            dv = vs_a.diagonal(axis1=1, axis2=2)
            out[mda:, :mdb] = 0.25 * (dv @ rows_b.diag_d.T)
        out += (rows_a.a_all * y2) @ rows_b.a_all.T
        return out

    def _proj(self, rows: _RowSet, mat: np.ndarray, yvec: np.ndarray) -> np.ndarray:
        """<u_k, (mat, yvec)> for every row: the row-space image of a point."""
        parts = []
        if len(rows.diag_a):
            parts.append(0.5 * rows.diag_d @ np.diag(mat) + rows.diag_a @ yvec)
        if len(rows.dense_a):
            flat = rows.dense_A.reshape(len(rows.dense_A), -1)
            parts.append(0.5 * flat @ mat.ravel() + rows.dense_a @ yvec)
        if not parts:
            return np.zeros(0)
        return np.concatenate(parts)

    def _combine(self, rows: _RowSet, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(sum_k w_k A_k/2, sum_k w_k a_k) in embedded matrix + scalar form."""
        md = len(rows.diag_a)
        mat = np.zeros((self.p.n2, self.p.n2))
        if md and np.any(w[:md]):
            mat += np.diag(0.5 * (w[:md] @ rows.diag_d))
        if len(rows.dense_a) and np.any(w[md:]):
            mat += 0.5 * np.tensordot(w[md:], rows.dense_A, axes=(0, 0))
        return mat, rows.a_all.T @ w

    def newton_step(
        self, t: float, z: np.ndarray, y: np.ndarray, zl: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, float, float]:
        """Returns (dz, dy, decrement^2, eq_residual_norm)."""
        p = self.p
        s_lo, s_up = self.ineq_slacks(z, y)
        inv_up = np.where(self.fin_up, 1.0 / s_up, 0.0)
        inv_lo = np.where(self.fin_lo, 1.0 / s_lo, 0.0)
        gamma = inv_up - inv_lo
        curv = inv_up**2 + inv_lo**2

        zinv = _chol_inverse(zl)
        gm, ga = self._combine(p.ineq, gamma)
        r_mat = zinv - 0.5 * t * p.ce - gm
        r_y = -t * p.cvec + (1.0 / y if len(y) else y) - ga

        y2 = y * y
        zz = z * z
        m = p.ineq.m
        me = p.eq.m

        # H^{-1} r via Woodbury over the inequality rows
        q_i = self._proj(p.ineq, z @ r_mat @ z, y2 * r_y) if m else np.zeros(0)
        if m:
            g_ii = self._gram(p.ineq, p.ineq, z, zz, y2)
            w_sys = g_ii + np.diag(1.0 / np.maximum(curv, 1e-300))
            w_fac = _Factor(w_sys)
        if me:
            r_eq = self.eq_residual(z, y)
            q_e = self._proj(p.eq, z @ r_mat @ z, y2 * r_y)
            g_ee = self._gram(p.eq, p.eq, z, zz, y2)
            if m:
                g_ei = self._gram(p.eq, p.ineq, z, zz, y2)
                s_mat = g_ee - g_ei @ w_fac.solve(g_ei.T)
                jh_r = q_e - g_ei @ w_fac.solve(q_i)
            else:
                s_mat = g_ee
                jh_r = q_e
            lam_eq = _Factor(s_mat).solve(jh_r + r_eq)
            em, ea = self._combine(p.eq, lam_eq)
            r2_mat = r_mat - em
            r2_y = r_y - ea
        else:
            r_eq = np.zeros(0)
            lam_eq = np.zeros(0)
            r2_mat, r2_y = r_mat, r_y

        if m:
            q2 = self._proj(p.ineq, z @ r2_mat @ z, y2 * r2_y)
            omega = w_fac.solve(q2)
            om, oa = self._combine(p.ineq, omega)
            acc_mat = r2_mat - om
            acc_y = r2_y - oa
        else:
            acc_mat, acc_y = r2_mat, r2_y
        dz = z @ acc_mat @ z
        dz = 0.5 * (dz + dz.T)
        dy = y2 * acc_y

        # decrement^2 = <Delta, H Delta>, assembled as a sum of nonnegative
        # terms: the inner-product form <r, Delta> cancels catastrophically
        # when the iterate sits within ~sqrt(eps) of a barrier wall
        zi_dz = zinv @ dz
        lam2 = float(np.tensordot(zi_dz.T, zi_dz))
        if len(y):
            lam2 += float(((dy / y) ** 2).sum())
        if m:
            rates_i = self._proj(p.ineq, dz, dy)
            lam2 += float((curv * rates_i**2).sum())
        res_norm = float(np.abs(r_eq).max()) if me else 0.0
        return dz, dy, lam2, res_norm

    def _psi(self, t: float, z: np.ndarray, y: np.ndarray, logdet: float) -> float:
        s_lo, s_up = self.ineq_slacks(z, y)
        if (self.fin_up.any() and s_up[self.fin_up].min() <= 0) or (
            self.fin_lo.any() and s_lo[self.fin_lo].min() <= 0
        ):
            return np.inf
        if len(y) and y.min() <= 0:
            return np.inf
        val = t * self.objective(z, y) - logdet
        if self.fin_up.any():
            val -= np.log(s_up[self.fin_up]).sum()
        if self.fin_lo.any():
            val -= np.log(s_lo[self.fin_lo]).sum()
        if len(y):
            val -= np.log(y).sum()
        return float(val)

    def center(
        self,
        t: float,
        z: np.ndarray,
        y: np.ndarray,
        budget: int,
        stop_early: Callable[[np.ndarray, np.ndarray], bool] | None = None,
        lam_stop: float = 0.25,
    ) -> tuple[np.ndarray, np.ndarray, int, bool]:
        """Newton with merit backtracking until decrement <= lam_stop.

        The trial step is the full Newton step clipped to 99% of the nearest
        wall; acceptance is Armijo on the barrier merit with a float-noise
        allowance of 32 eps |psi| (at large t the merit is dominated by t*f
        and its differences saturate in float64), falling back to the
        self-concordance damping 1/(1+lambda) when backtracking bottoms out.
        The decrement is the cancellation-free form <Delta, H Delta>.
        """
        steps = 0
        strangled = 0
        while steps < budget:
            zl, logdet = _chol_logdet(z)
            if zl is None:
                return z, y, steps, False
            dz, dy, lam2, res = self.newton_step(t, z, y, zl)
            if not np.isfinite(lam2):
                return z, y, steps, False
            if lam2 <= lam_stop**2 and res <= self.res_tol(t):
                return z, y, steps, True
            # at large t the decrement has a float noise floor ~ (eps*t)^2/s^2;
            # once the proposed step is below float resolution, we are done
            step_scale = max(
                float(np.abs(dz).max()) / (1.0 + float(np.abs(z).max())),
                (float(np.abs(dy).max()) / (1.0 + float(np.abs(y).max()))) if len(y) else 0.0,
            )
            if step_scale <= 3e-15 and res <= self.res_tol(t):
                return z, y, steps, True
            steps += 1
            lam = float(np.sqrt(max(lam2, 0.0)))

            alpha_cap = 1.0
            s_lo, s_up = self.ineq_slacks(z, y)
            grate = self._proj_rates(dz, dy)
            pos = (grate > 0) & self.fin_up
            if np.any(pos):
                alpha_cap = min(alpha_cap, 0.99 * float((s_up[pos] / grate[pos]).min()))
            neg = (grate < 0) & self.fin_lo
            if np.any(neg):
                alpha_cap = min(alpha_cap, 0.99 * float((s_lo[neg] / -grate[neg]).min()))
            if len(y):
                negy = dy < 0
                if np.any(negy):
                    alpha_cap = min(alpha_cap, 0.99 * float((y[negy] / -dy[negy]).min()))

            psi0 = self._psi(t, z, y, logdet)
            damped = min(alpha_cap, 1.0 / (1.0 + lam))
            alpha = alpha_cap
            accepted = False
            for _ in range(30):
                z_try = z + alpha * dz
                y_try = y + alpha * dy
                zl_try, logdet_try = _chol_logdet(z_try)
                if zl_try is not None:
                    psi_try = self._psi(t, z_try, y_try, logdet_try)
                    if psi_try <= psi0 - 0.25 * alpha * lam2 + 32e-16 * abs(psi0):
                        accepted = True
                        break
                if alpha <= damped:
                    break
                alpha = max(0.5 * alpha, damped) if alpha > damped else damped
            if not accepted:
                # damped fallback: guaranteed descent for self-concordant
                # barriers even when the merit test saturates in float
                alpha = damped
                for _ in range(40):
                    z_try = z + alpha * dz
                    y_try = y + alpha * dy
                    zl_try, _ = _chol_logdet(z_try)
                    if zl_try is not None and (not len(y_try) or y_try.min() > 0):
                        s_lo_t, s_up_t = self.ineq_slacks(z_try, y_try)
                        walls_ok = (
                            not self.fin_up.any() or s_up_t[self.fin_up].min() > 0
                        ) and (not self.fin_lo.any() or s_lo_t[self.fin_lo].min() > 0)
                        if walls_ok:
                            accepted = True
                            break
                    alpha *= 0.5
            if not accepted:
                return z, y, steps, True  # numerical floor; iterate remains usable
            strangled = strangled + 1 if alpha < 1e-8 else 0
            if strangled >= 8:
                return z, y, steps, True  # pinned against a wall by float noise
            z = z_try
            y = y_try
            if stop_early is not None and stop_early(z, y):
                return z, y, steps, True
        return z, y, steps, True

    def _proj_rates(self, dz: np.ndarray, dy: np.ndarray) -> np.ndarray:
        return self._proj(self.p.ineq, dz, dy) if self.p.ineq.m else np.zeros(0)


class _Factor:
    """Symmetric solve with an lstsq fallback for degenerate row sets."""

    def __init__(self, a: np.ndarray):
        self.a = a
        try:
            self.f = np.linalg.cholesky(a + np.diag(np.full(len(a), 1e-300)))
            self.chol = True
        except np.linalg.LinAlgError:
            self.f = None
            self.chol = False

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.chol:
            u = np.linalg.solve(self.f, b)
            return np.linalg.solve(self.f.T, u)
        try:
            return np.linalg.solve(self.a, b)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(self.a, b, rcond=None)[0]


# ---------------------------------------------------------------------------
# driver


def solve(
    problem: SdpProblem,
    tol: float = 1e-7,
    max_iter: int = 300,
    start: tuple[ComplexArray, np.ndarray] | None = None,
    mu: float = 15.0,
) -> SdpSolution:
    """Solve the SDP; see the module docstring for the form and the method.

    ``start`` may carry a strictly feasible (X, y) hint, which skips the
    feasibility phase when it verifies; solving is deterministic either way.
    """
    if not (0.0 < tol < 1.0):
        raise ValueError("tol must be in (0, 1)")
    n, s = problem.block_dim, problem.num_scalars
    prob, r0, row_scales = _preprocess(problem)
    n2 = 2 * n
    core = _Barrier(prob)
    nu = prob.nu
    total = 0

    def finish(z, y, status, t_end):
        if status in ("optimal", "max_iter") and prob.eq.m:
            z, y = _project_equalities(prob, z, y)
        x = complex_from_embed(z)
        obj = float(np.real(np.trace(problem.cost_matrix @ x))) + float(
            problem.cost_scalars @ y
        )
        duals = None
        if status == "optimal":
            duals = np.zeros(len(problem.constraints))
            if prob.ineq.m:
                s_lo, s_up = core.ineq_slacks(z, y)
                lam_rows = (
                    1.0 / np.maximum(s_up, 1e-300) - 1.0 / np.maximum(s_lo, 1e-300)
                ) / t_end
                for lam, idx in zip(lam_rows, prob.ineq.origin):
                    sense = problem.constraints[idx].sense
                    duals[idx] += (-lam if sense == ">=" else lam) * r0 / row_scales[idx]
            if prob.eq.m:
                zl, _ = _chol_logdet(z)
                if zl is not None:
                    lam_eq = _eq_multipliers(core, t_end, z, y, zl)
                    for lam, idx in zip(lam_eq, prob.eq.origin):
                        duals[idx] += lam / t_end * r0 / row_scales[idx]
        gap = nu / t_end * r0 if np.isfinite(t_end) and t_end > 0 else np.inf
        return SdpSolution(
            X=x,
            scalars=y.copy(),
            status=status,
            objective_value=obj,
            iterations=total,
            duals=duals,
            gap_estimate=gap,
            data_scale=r0,
        )

    z = np.eye(n2)
    y = np.ones(s)
    hinted = False
    have_start = prob.ineq.m == 0
    if start is not None:
        x_h, y_h = start
        z_h = real_embed(_hermitize(np.asarray(x_h, dtype=complex), n))
        y_h = _as_scalars(np.asarray(y_h, dtype=float), s).copy()
        if core.strictly_feasible_ineq(z_h, y_h):
            z, y = z_h, y_h
            have_start = True
            hinted = True

    if not have_start:
        status1, z, y, total = _phase1(prob, n2, s, mu, max_iter)
        if status1 != "ok":
            return finish(z, y, status1, np.inf)

    # main phase: follow the central path; equality residuals are pulled to
    # zero by the KKT correction and must keep shrinking, else infeasible
    t = 1.0
    t_target = nu / (0.5 * tol)
    res_prev = np.inf
    res_stall = 0
    while True:
        budget = min(60, max_iter - total)
        if budget <= 0:
            return finish(z, y, "max_iter", t)
        z, y, used, ok = core.center(
            t, z, y, budget, stop_early=lambda zz, yy: core.objective(zz, yy) < -1e9
        )
        total += used
        if not ok:
            return finish(z, y, "max_iter", t)
        if core.objective(z, y) < -1e9:
            return finish(z, y, "unbounded", t)
        if prob.eq.m:
            res = float(np.abs(core.eq_residual(z, y)).max())
            # the exact projection at the end repairs a noise-floor residual;
            # mid-path it only needs to stay well below the caller's tolerances
            floor_ok = res <= 1e-3 * core.res_scale
            if res > core.res_tol(t) and not (res > 0.5 * res_prev and floor_ok):
                res_stall = res_stall + 1 if res > 0.5 * res_prev else 0
                if res_stall >= 4:
                    if hinted:
                        # a hint squeezed against a wall can strangle the
                        # correction steps; retry once from a fresh interior
                        hinted = False
                        status1, z, y, p1_used = _phase1(prob, n2, s, mu, max_iter - total)
                        total += p1_used
                        if status1 != "ok":
                            return finish(z, y, status1, np.inf)
                        t = 1.0
                        res_prev = np.inf
                        res_stall = 0
                        continue
                    return finish(z, y, "infeasible", t)  # equalities unreachable
                res_prev = min(res_prev, res)
                continue  # hold t until the equality subspace is reached
        if t >= t_target:
            return finish(z, y, "optimal", t)
        t = min(t * mu, t_target)


def _project_equalities(prob: _Problem, z: np.ndarray, y: np.ndarray) -> tuple:
    """Least-norm exact projection onto the equality subspace.

    Kills the ~eps*t float noise the Newton corrections leave in the
    residuals; the shift is tiny, so positive definiteness is unaffected
    (verified, with the projection skipped otherwise).
    """
    eq = prob.eq
    res = eq.values(z, y) - prob.eq_b
    jjt = np.zeros((eq.m, eq.m))
    md = len(eq.diag_a)
    if md:
        jjt[:md, :md] = 0.25 * (eq.diag_d @ eq.diag_d.T)
    if len(eq.dense_a):
        flat = eq.dense_A.reshape(len(eq.dense_A), -1)
        jjt[md:, md:] = 0.25 * (flat @ flat.T)
        if md:
            dv = eq.dense_A.diagonal(axis1=1, axis2=2)
            cross = 0.25 * (eq.diag_d @ dv.T)
            jjt[:md, md:] = cross
            jjt[md:, :md] = cross.T
    jjt += eq.a_all @ eq.a_all.T
    try:
        c = np.linalg.solve(jjt, res)
    except np.linalg.LinAlgError:
        c = np.linalg.lstsq(jjt, res, rcond=None)[0]
    dmat = np.zeros_like(z)
    if md:
        dmat += np.diag(0.5 * (c[:md] @ eq.diag_d))
    if len(eq.dense_a):
        dmat += 0.5 * np.tensordot(c[md:], eq.dense_A, axes=(0, 0))
    z_new = z - dmat
    y_new = y - eq.a_all.T @ c
    zl, _ = _chol_logdet(z_new)
    if zl is None or (len(y_new) and y_new.min() <= 0):
        return z, y
    return z_new, y_new


def _eq_multipliers(core: _Barrier, t, z, y, zl) -> np.ndarray:
    """Equality multipliers at a centered point (for dual reporting)."""
    p = core.p
    s_lo, s_up = core.ineq_slacks(z, y)
    inv_up = np.where(core.fin_up, 1.0 / s_up, 0.0)
    inv_lo = np.where(core.fin_lo, 1.0 / s_lo, 0.0)
    gamma = inv_up - inv_lo
    curv = inv_up**2 + inv_lo**2
    zinv = _chol_inverse(zl)
    gm, ga = core._combine(p.ineq, gamma)
    r_mat = zinv - 0.5 * t * p.ce - gm
    r_y = -t * p.cvec + (1.0 / y if len(y) else y) - ga
    y2 = y * y
    zz = z * z
    q_e = core._proj(p.eq, z @ r_mat @ z, y2 * r_y)
    g_ee = core._gram(p.eq, p.eq, z, zz, y2)
    if p.ineq.m:
        q_i = core._proj(p.ineq, z @ r_mat @ z, y2 * r_y)
        g_ii = core._gram(p.ineq, p.ineq, z, zz, y2)
        w_fac = _Factor(g_ii + np.diag(1.0 / np.maximum(curv, 1e-300)))
        g_ei = core._gram(p.eq, p.ineq, z, zz, y2)
        s_mat = g_ee - g_ei @ w_fac.solve(g_ei.T)
        jh_r = q_e - g_ei @ w_fac.solve(q_i)
    else:
        s_mat = g_ee
        jh_r = q_e
    return _Factor(s_mat).solve(jh_r)


def _phase1(
    prob: _Problem, n2: int, s: int, mu: float, max_iter: int
) -> tuple[str, np.ndarray, np.ndarray, int]:
    """Minimize a relaxation scalar tau over the one-sided rows.

    Any iterate with tau < 1 is strictly feasible for them; equality rows are
    handled by the main phase's KKT correction and need nothing here.
    """
    rows = prob.ineq
    md = len(rows.diag_a)

    diag_d, diag_a, diag_lo, diag_up = [], [], [], []
    dense_A, dense_a, dense_lo, dense_up = [], [], [], []
    for k in range(rows.m):
        if k < md:
            mat, avec = rows.diag_d[k], rows.diag_a[k]
            dst = (diag_d, diag_a, diag_lo, diag_up)
        else:
            mat, avec = rows.dense_A[k - md], rows.dense_a[k - md]
            dst = (dense_A, dense_a, dense_lo, dense_up)
        lo, up = prob.ineq_lo[k], prob.ineq_up[k]
        if np.isfinite(up):     # g - tau <= up - 1
            dst[0].append(mat)
            dst[1].append(np.concatenate([avec, [-1.0]]))
            dst[2].append(-_INF)
            dst[3].append(up - 1.0)
        else:                    # g + tau >= lo + 1
            dst[0].append(mat)
            dst[1].append(np.concatenate([avec, [1.0]]))
            dst[2].append(lo + 1.0)
            dst[3].append(_INF)

    # big-M cap keeps phase 1 bounded: tr(X) + sum(y) <= BIG_M
    diag_d.append(np.ones(n2))
    diag_a.append(np.concatenate([np.ones(s), [0.0]]))
    diag_lo.append(-_INF)
    diag_up.append(_BIG_M)

    empty = _RowSet(
        diag_d=np.zeros((0, n2)),
        diag_a=np.zeros((0, s + 1)),
        dense_A=np.zeros((0, n2, n2)),
        dense_a=np.zeros((0, s + 1)),
        origin=[],
    )
    cvec = np.zeros(s + 1)
    cvec[-1] = 1.0
    p1 = _Problem(
        ineq=_RowSet(
            diag_d=np.array(diag_d).reshape(len(diag_d), n2),
            diag_a=np.array(diag_a).reshape(len(diag_a), s + 1),
            dense_A=np.array(dense_A).reshape(len(dense_A), n2, n2),
            dense_a=np.array(dense_a).reshape(len(dense_a), s + 1),
            origin=[],
        ),
        ineq_lo=np.array(diag_lo + dense_lo, dtype=float),
        ineq_up=np.array(diag_up + dense_up, dtype=float),
        eq=empty,
        eq_b=np.zeros(0),
        ce=np.zeros((n2, n2)),
        cvec=cvec,
        n2=n2,
    )
    core1 = _Barrier(p1)

    z = np.eye(n2)
    y_base = np.ones(s)
    g0 = rows.values(z, y_base)
    viol = np.maximum(
        np.where(np.isfinite(prob.ineq_up), g0 - prob.ineq_up, -np.inf),
        np.where(np.isfinite(prob.ineq_lo), prob.ineq_lo - g0, -np.inf),
    )
    tau0 = max(0.0, float(viol.max(initial=-1.0))) + 1.1
    y = np.concatenate([y_base, [tau0]])
    target = 1.0 - 3e-4

    total = 0
    t = 1.0
    prev_tau = np.inf
    while True:
        budget = min(60, max_iter - total)
        if budget <= 0:
            return "max_iter", z, y[:s], total
        z, y, used, ok = core1.center(
            t, z, y, budget, stop_early=lambda zz, yy: yy[-1] <= target
        )
        total += used
        tau = float(y[-1])
        gap = p1.nu / t
        if tau <= target:
            return "ok", z, y[:s].copy(), total
        stalled = tau >= prev_tau - max(1e-14, 1e-3 * abs(1.0 - tau))
        if tau < 1.0 - 1e-12 and stalled:
            # strictly inside the one-sided rows; margin not worth chasing
            return "ok", z, y[:s].copy(), total
        if not ok or tau - gap > 1.0 - 1e-11 or t > 1e18:
            return "infeasible", z, y[:s], total
        prev_tau = tau
        t *= mu


# ---------------------------------------------------------------------------
# debug dump


def dump_problem(problem: SdpProblem, path: str) -> None:
    """Write a self-describing text dump for offline cross-checking."""
    with open(path, "w") as fh:
        fh.write("sdp-problem format 1\n")
        fh.write(f"block_dim {problem.block_dim}\n")
        fh.write(f"num_scalars {problem.num_scalars}\n")
        fh.write(f"num_constraints {len(problem.constraints)}\n")
        fh.write("objective_matrix rows (re im pairs, row-major)\n")
        _write_matrix(fh, problem.cost_matrix)
        fh.write("objective_scalars\n")
        fh.write(" ".join(f"{v:.17g}" for v in problem.cost_scalars) + "\n")
        for k, con in enumerate(problem.constraints):
            fh.write(f"constraint {k} sense {con.sense} rhs {con.rhs:.17g}\n")
            _write_matrix(fh, con.matrix)
            fh.write(" ".join(f"{v:.17g}" for v in con.scalars) + "\n")


def _write_matrix(fh, a: ComplexArray) -> None:
    for row in a:
        fh.write(" ".join(f"{v.real:.17g} {v.imag:.17g}" for v in row) + "\n")
