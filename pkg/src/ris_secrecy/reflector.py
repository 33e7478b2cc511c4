"""Reflection-side subproblem: secrecy-slack maximization at a fixed beamformer.

The per-element coefficients q lift to U = [q; 1][q; 1]^H, on which both
rates become ratios of traces: R_i = ln tr(G_Ai U) - ln tr(G_Ii U).  The
rate difference keeps two concave ln-trace terms; the two convex (negated
concave) ones are linearized at the anchor (a tight global lower bound on
the true rate difference), and a slack variable delta turns the feasibility
problem into a maximization with strictly interior iterates.  The same
trace-minus-lambda_max penalty as on the transmit side recovers rank one.

The surviving ln-trace terms are handled with global tangent cuts: a
tangent of ln upper-bounds it everywhere, so each cut is a valid outer
relaxation, and cuts accumulate until the true constraint holds at the
relaxed optimum (the subproblem is convex, so that fixed point is its
exact optimum).  A cut is indexed by the two positive trace values at its
linearization point, which makes the pool reusable across SCA iterations
for as long as the beamformer (hence the G matrices) is unchanged.

Amplitudes can be orders of magnitude above one for an active surface, so
the lift is solved in units of the anchor's typical amplitude (a diagonal
congruence) and scaled back on recovery.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, ComplexArray, NoiseConfig
from .errors import MaxIterations, NoFeasibleStart, SubproblemInfeasible
from . import rates, sdp


@dataclass(frozen=True)
class GMatrices:
    """Block matrices of the lifted formulation at a fixed beamformer."""

    g_b: ComplexArray       # diag(h_IB^H) H_AI, (N, M)
    g_e: ComplexArray
    g_ib: ComplexArray      # (N+1, N+1) noise Gram, Bob side
    g_ie: ComplexArray
    g_ab: ComplexArray      # (N+1, N+1) signal-plus-noise Gram, Bob side
    g_ae: ComplexArray
    g_power: ComplexArray   # (N+1, N+1) reflected-power quadratic
    mu_b: float
    mu_e: float
    gbar_b: ComplexArray    # sigma_I^2 diag(|h_IB|^2), (N, N)
    gbar_e: ComplexArray


@dataclass
class LiftedReflect:
    """Hermitian PSD lift U (corner pinned to 1) and the secrecy slack."""

    u_mat: ComplexArray
    delta: float

    @property
    def rank_residual(self) -> float:
        vals = np.linalg.eigvalsh(0.5 * (self.u_mat + self.u_mat.conj().T))
        return float(vals.sum() - vals[-1])


@dataclass
class Sca2Step:
    delta: float
    reflected_power: float   # tr(G U), the paper's stopping metric
    rank_residual: float
    secrecy_anchor: float    # rate difference of the anchor lift


@dataclass
class Algorithm2Config:
    eta: float = 1e-3
    eps2: float = 1e-3          # relative stall of tr(G U) and delta
    max_iter: int = 60
    eps_rank: float = 1e-3      # recovery-quality threshold, relative to tr(U)
    ramp_iters: int = 3
    sdp_tol: float = 1e-7
    cut_tol: float = 1e-6       # nats, acceptance of the tangent relaxation
    sdp_max_iter: int = 400


@dataclass
class Algorithm2Result:
    q: ComplexArray
    lift: LiftedReflect
    steps: list[Sca2Step] = field(default_factory=list)


def build_g_matrices(w: ComplexArray, ch: ChannelSet, noise: NoiseConfig) -> GMatrices:
    """Assemble every block of the lifted formulation for this beamformer."""
    n = ch.num_ris_elements

    def side(h_direct: ComplexArray, h_ris: ComplexArray, sigma2: float):
        g_i = (h_ris.conj()[:, None]) * ch.h_ai           # diag(h^H) H_AI
        gbar = noise.sigma2_i * np.diag(np.abs(h_ris) ** 2)
        gw = g_i @ w
        s = complex(np.vdot(h_direct, w))                 # h_direct^H w
        mu = sigma2 + abs(s) ** 2
        g_ii = np.zeros((n + 1, n + 1), dtype=complex)
        g_ii[:n, :n] = gbar
        g_ii[n, n] = sigma2
        g_ai = np.zeros((n + 1, n + 1), dtype=complex)
        g_ai[:n, :n] = np.outer(gw, gw.conj()) + gbar
        g_ai[:n, n] = gw * np.conj(s)
        g_ai[n, :n] = g_ai[:n, n].conj()
        g_ai[n, n] = mu
        return g_i, gbar, g_ii, g_ai, mu

    g_b, gbar_b, g_ib, g_ab, mu_b = side(ch.h_ab, ch.h_ib, noise.sigma2_b)
    g_e, gbar_e, g_ie, g_ae, mu_e = side(ch.h_ae, ch.h_ie, noise.sigma2_e)

    g_power = np.zeros((n + 1, n + 1), dtype=complex)
    g_power[:n, :n] = np.diag(np.abs(ch.h_ai @ w) ** 2) + noise.sigma2_i * np.eye(n)
    return GMatrices(
        g_b=g_b, g_e=g_e, g_ib=g_ib, g_ie=g_ie, g_ab=g_ab, g_ae=g_ae,
        g_power=g_power, mu_b=mu_b, mu_e=mu_e, gbar_b=gbar_b, gbar_e=gbar_e,
    )


def _trace(mat: ComplexArray, u: ComplexArray) -> float:
    return float(np.real(np.trace(mat @ u)))


def lifted_rate(u: ComplexArray, g: GMatrices, side: str) -> float:
    """ln tr(G_Ai U) - ln tr(G_Ii U) in nats; matches the plain rate on rank-one U."""
    if side == "b":
        num, den = _trace(g.g_ab, u), _trace(g.g_ib, u)
    elif side == "e":
        num, den = _trace(g.g_ae, u), _trace(g.g_ie, u)
    else:
        raise ValueError(f"side must be 'b' or 'e', got {side!r}")
    if num <= 0 or den <= 0:
        raise ValueError("nonpositive lifted trace: numerically broken U")
    return float(np.log(num) - np.log(den))


def rate_difference(u: ComplexArray, g: GMatrices) -> float:
    return lifted_rate(u, g, "b") - lifted_rate(u, g, "e")


def lemma2_surrogate(u: ComplexArray, u_t: ComplexArray, g: GMatrices) -> float:
    """Global lower bound on the lifted rate difference, tight at u = u_t."""
    a = _trace(g.g_ab, u)
    e = _trace(g.g_ie, u)
    b_t = _trace(g.g_ib, u_t)
    c_t = _trace(g.g_ae, u_t)
    if min(a, e, b_t, c_t) <= 0:
        raise ValueError("nonpositive lifted trace: numerically broken U")
    lin = (_trace(g.g_ib, u) - b_t) / b_t + (_trace(g.g_ae, u) - c_t) / c_t
    return float(np.log(a) + np.log(e) - np.log(b_t) - np.log(c_t) - lin)


def lift_from_q(q: ComplexArray, blend: float = 0.0) -> ComplexArray:
    """Rank-one lift of physical coefficients, optionally interior-blended.

    The lifted vector holds the *conjugated* coefficients: the block matrices
    follow the convention where the stacked vector is the conjugate transpose
    of the coefficient list, and only this pairing reproduces the plain-rate
    formulas on rank-one lifts (checked in the cross-module consistency test).
    """
    v = np.concatenate([q.conj(), [1.0 + 0j]])
    u = np.outer(v, v.conj())
    if blend > 0.0:
        u = (1.0 - blend) * u + blend * np.diag(np.abs(v) ** 2)
    return u


def _back_off_budget(
    u: ComplexArray, g: GMatrices, p_i: float | None, frac: float = 1e-3
) -> ComplexArray:
    """Shrink the element block so the reflected power sits below the budget.

    Slack maximization ends hard against the power wall; anchoring the next
    solve a hair from it strangles the Newton steps.  Every power term is
    quadratic in the elements, so a diagonal congruence gives the exact
    back-off at a negligible rate cost.
    """
    if p_i is None:
        return u
    load = _trace(g.g_power, u)
    target = (1.0 - frac) * p_i
    if load <= target or load <= 0:
        return u
    n = u.shape[0] - 1
    s = np.sqrt(target / load)
    d = np.concatenate([np.full(n, s), [1.0]])
    return u * np.outer(d, d)


def solve_p9(
    u_t: ComplexArray,
    delta_t: float,
    g: GMatrices,
    eta: float | None,
    rbar: float,
    p_i: float | None,
    unit_modulus: bool = False,
    cut_pool: list[tuple[float, float]] | None = None,
    sdp_tol: float = 1e-7,
    cut_tol: float = 1e-6,
    max_cuts: int = 25,
    sdp_max_iter: int = 400,
) -> tuple[LiftedReflect, list[tuple[float, float]]]:
    """One penalized convex step anchored at ``u_t``; returns (lift, cut pool).

    ``p_i=None`` drops the reflected-power budget; ``unit_modulus`` pins every
    element's lifted magnitude to one (passive optimized phases); ``eta=None``
    drops the rank penalty entirely (pure slack maximization over the
    relaxation, the natural first stage before rank-one refinement).  The
    rank-one penalty tr(U) - linearized lambda_max is applied to the
    amplitude-normalized lift: rank is invariant under the congruence, and
    normalizing keeps the penalty weight commensurate with the slack variable
    (in raw units the penalty matrix outweighs delta by ~beta^2 and the slack
    would drown in the objective normalization).
    """
    if eta is not None and eta <= 0:
        raise ValueError("penalty factor must be positive")
    n1 = u_t.shape[0]
    n = n1 - 1

    # diagonal congruence: work in units of the anchor's element amplitude
    d_amp = float(np.sqrt(max(np.mean(np.abs(np.diag(u_t))[:n]), 1e-12)))
    d_vec = np.concatenate([np.full(n, d_amp), [1.0]])
    d_outer = np.outer(d_vec, d_vec)

    def scaled(mat: ComplexArray) -> ComplexArray:
        return mat * d_outer

    u_t_s = u_t / d_outer

    b_t = _trace(g.g_ib, u_t)
    c_t = _trace(g.g_ae, u_t)
    if b_t <= 0 or c_t <= 0:
        raise ValueError("nonpositive anchor trace")
    l_mat = g.g_ib / b_t + g.g_ae / c_t

    if eta is None:
        pen = None
    else:
        _lam, nu_vec = sdp.max_eig_pair(u_t_s)
        pen = (np.eye(n1) - np.outer(nu_vec, nu_vec.conj())) / eta

    g_ab_s, g_ie_s, l_s = scaled(g.g_ab), scaled(g.g_ie), scaled(l_mat)
    g_pow_s = scaled(g.g_power)

    pool = list(cut_pool) if cut_pool else []
    anchor = (_trace(g.g_ab, u_t), _trace(g.g_ie, u_t))
    if anchor[0] <= 0 or anchor[1] <= 0:
        raise ValueError("nonpositive anchor trace")
    if not any(abs(pa - anchor[0]) < 1e-12 * anchor[0] for pa, _pe in pool):
        pool.append(anchor)

    # strictly feasible hint from the anchor when it has secrecy slack
    hint = None
    margin = rate_difference(u_t, g) - rbar
    if margin > 1e-10:
        hint = (u_t_s, np.array([max(0.5 * margin, 1e-12)]))

    last = None
    for _ in range(max_cuts):
        prob = sdp.SdpProblem(
            block_dim=n1,
            num_scalars=1,
            cost_matrix=pen,
            cost_scalars=np.array([-1.0]),
        )
        for pa, pe in pool:
            a_cut = g_ab_s / pa + g_ie_s / pe - l_s
            rhs = rbar - np.log(pa) - np.log(pe) + np.log(b_t) + np.log(c_t)
            prob.add_constraint(a_cut, np.array([-1.0]), ">=", float(rhs))
        if p_i is not None:
            prob.add_constraint(g_pow_s, None, "<=", p_i)
        corner = np.zeros((n1, n1))
        corner[n, n] = 1.0
        prob.add_constraint(corner, None, "==", 1.0)
        if unit_modulus:
            for k in range(n):
                ek = np.zeros((n1, n1))
                ek[k, k] = 1.0
                prob.add_constraint(ek, None, "==", 1.0 / d_amp**2)

        sol = sdp.solve(prob, tol=sdp_tol, start=hint, max_iter=sdp_max_iter)
        good_enough = (
            sol.status == "max_iter"
            and sol.gap_estimate <= 3e-4 * max(1.0, abs(sol.objective_value))
        )
        if sol.status != "optimal" and not good_enough:
            raise SubproblemInfeasible(f"penalized step ended with status {sol.status}")
        u_hat = sol.X * d_outer
        delta_hat = float(sol.scalars[0])
        last = LiftedReflect(u_mat=u_hat, delta=delta_hat)

        true_val = lemma2_surrogate(u_hat, u_t, g)
        viol = rbar + delta_hat - true_val
        if viol <= cut_tol * max(1.0, abs(true_val)):
            return last, pool
        pool.append((_trace(g.g_ab, u_hat), _trace(g.g_ie, u_hat)))
        # the anchor stays strictly inside every tangent cut, so the hint holds

    # the relaxation did not close; fall back to the feasible slack at the point
    last.delta = max(0.0, true_val - rbar)
    return last, pool


def _uniform_start(
    w: ComplexArray, ch: ChannelSet, noise: NoiseConfig, p_i: float | None
) -> ComplexArray:
    """Uniform-phase start: all-ones scaled to 95% of the power budget."""
    n = ch.num_ris_elements
    ones = np.ones(n, dtype=complex)
    if p_i is None:
        return ones
    load = rates.ris_power(w, ones, ch, noise)
    if load <= 0:
        return ones
    gamma = min(np.sqrt(0.95 * p_i / load), 1e6)
    return gamma * ones


def recover_q(lift: LiftedReflect, unit_modulus: bool = False) -> ComplexArray:
    """Read the coefficients off the dominant eigenpair.

    The eigenvector's global phase is removed by dividing through by the last
    entry, which enforces the [q; 1] structure exactly instead of leaking
    rank-residual error into the amplitudes.
    """
    n = lift.u_mat.shape[0] - 1
    lam, v = sdp.max_eig_pair(lift.u_mat)
    u_vec = np.sqrt(max(lam, 0.0)) * v
    tail = u_vec[n]
    if abs(tail) < 1e-9:
        raise SubproblemInfeasible("degenerate lift: vanishing reference entry")
    q = (u_vec[:n] / tail).conj()  # the lift stores conjugated coefficients
    if unit_modulus:
        mags = np.abs(q)
        q = np.where(mags > 0, q / np.maximum(mags, 1e-300), 1.0 + 0j)
    return q


def algorithm2(
    w: ComplexArray,
    ch: ChannelSet,
    noise: NoiseConfig,
    rbar: float,
    p_i: float | None,
    cfg: Algorithm2Config | None = None,
    q_init: ComplexArray | None = None,
    unit_modulus: bool = False,
) -> Algorithm2Result:
    """Penalty-based SCA over the lifted reflection at a fixed beamformer.

    Starts from ``q_init`` (or a uniform-phase budget-scaled vector), ramping
    the secrecy target up from the start's achieved value over the first few
    iterations when the start itself misses it.
    """
    cfg = cfg or Algorithm2Config()
    g = build_g_matrices(w, ch, noise)

    if not np.any(w) and rbar > 0:
        raise NoFeasibleStart("zero beamformer cannot meet a positive secrecy target")

    q0 = q_init if q_init is not None else _uniform_start(w, ch, noise, p_i)
    u_t = _back_off_budget(lift_from_q(q0, blend=1e-3), g, p_i)
    achieved = rate_difference(u_t, g)

    def probe(level: float) -> float:
        # aim well below the anchor's rate so its hint has healthy margins
        return min(rbar, level - max(0.5, 0.1 * abs(level)))

    # stage 1: no rank pressure; maximize the slack over the relaxation until
    # it stalls (an SCA on the tight surrogate: monotone in the achieved rate)
    rbar_probe = probe(achieved)
    pool: list[tuple[float, float]] = []
    steps: list[Sca2Step] = []
    best = -np.inf
    for _ in range(cfg.max_iter):
        lift, pool = solve_p9(
            u_t, 0.0, g, None, rbar_probe, p_i,
            unit_modulus=unit_modulus, cut_pool=pool,
            sdp_tol=cfg.sdp_tol, cut_tol=cfg.cut_tol, sdp_max_iter=cfg.sdp_max_iter,
        )
        achieved = rbar_probe + lift.delta
        steps.append(
            Sca2Step(
                delta=lift.delta,
                reflected_power=_trace(g.g_power, lift.u_mat),
                rank_residual=lift.rank_residual,
                secrecy_anchor=rate_difference(lift.u_mat, g),
            )
        )
        u_t = _back_off_budget(lift.u_mat, g, p_i)
        if achieved <= best + max(1e-4, cfg.eps2 * abs(best)):
            break
        best = achieved
        if achieved >= rbar + max(1e-3, cfg.eps2 * rbar):
            break  # comfortably above target; rank refinement has headroom
        rbar_probe = probe(achieved)

    def start_verifies() -> bool:
        if q_init is None:
            return False
        ok_rate = rates.secrecy_rate(w, q_init, ch, noise) >= rbar - 1e-3
        ok_load = p_i is None or rates.ris_power(w, q_init, ch, noise) <= p_i + 1e-9
        return ok_rate and ok_load

    headroom = achieved - rbar
    if headroom < max(1e-3, cfg.eps2 * rbar) and start_verifies():
        # slack is exhausted at this beamformer; a no-op step keeps the outer
        # loop honest instead of grinding a degenerate subproblem
        return Algorithm2Result(
            q=q_init, lift=LiftedReflect(u_mat=lift_from_q(q_init), delta=0.0), steps=steps
        )
    if achieved < rbar:
        raise NoFeasibleStart(
            f"secrecy target unreachable at this beamformer "
            f"(relaxation tops out at {achieved:.4f} < {rbar:.4f})"
        )

    # stage 2: rank-one refinement at the true target; the slack absorbs the
    # loss as the penalty squeezes the lift back onto rank one
    delta_t = max(0.0, achieved - rbar)
    power_prev = _trace(g.g_power, u_t)
    for _ in range(cfg.max_iter):
        lift, pool = solve_p9(
            u_t, delta_t, g, cfg.eta, rbar, p_i,
            unit_modulus=unit_modulus, cut_pool=pool,
            sdp_tol=cfg.sdp_tol, cut_tol=cfg.cut_tol, sdp_max_iter=cfg.sdp_max_iter,
        )
        power_now = _trace(g.g_power, lift.u_mat)
        steps.append(
            Sca2Step(
                delta=lift.delta,
                reflected_power=power_now,
                rank_residual=lift.rank_residual,
                secrecy_anchor=rate_difference(lift.u_mat, g),
            )
        )
        power_stall = abs(power_now - power_prev) <= cfg.eps2 * max(power_now, 1e-15)
        delta_stall = abs(lift.delta - delta_t) <= cfg.eps2 * max(abs(lift.delta), 1e-9)
        rank_ok = lift.rank_residual < cfg.eps_rank * max(
            float(np.real(np.trace(lift.u_mat))), 1e-30
        )
        u_t = _back_off_budget(lift.u_mat, g, p_i)
        delta_t, power_prev = lift.delta, power_now
        if power_stall and delta_stall and rank_ok:
            q = recover_q(lift, unit_modulus=unit_modulus)
            if p_i is not None:
                load = rates.ris_power(w, q, ch, noise)
                if load > p_i:
                    q = q * np.sqrt(p_i / load)
            if rates.secrecy_rate(w, q, ch, noise) >= rbar - 1e-3:
                return Algorithm2Result(q=q, lift=lift, steps=steps)
    if start_verifies():
        # refinement could not beat the (already feasible) starting reflection
        return Algorithm2Result(
            q=q_init, lift=LiftedReflect(u_mat=lift_from_q(q_init), delta=0.0), steps=steps
        )
    raise MaxIterations("reflection SCA did not converge to a usable rank-one point")
