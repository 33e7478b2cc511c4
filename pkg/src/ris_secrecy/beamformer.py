"""Transmit-side subproblem: minimum-power beamforming at a fixed reflection.

With the reflection coefficients frozen, the secrecy-constrained power
minimization lifts to a semidefinite program over W = w w^H whose rank-one
constraint is replaced by the penalty tr(W) - lambda_max(W) (zero exactly on
rank-one PSD matrices).  The concave lambda_max is linearized at the current
iterate, giving a convex program per iteration; the loop stops once the
penalty residual is negligible and the rank-one beamformer is read off the
dominant eigenpair.

The exact lifted secrecy constraint is

    tr(h_B h_B^H W)/denom_B - e^rbar * tr(h_E h_E^H W)/denom_E >= e^rbar - 1,

equivalent to R_B - R_E >= rbar for rank-one W (both rates keep their +1
inside the log, which is where the e^rbar weight on the eavesdropper
quadratic comes from).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelSet, ComplexArray, NoiseConfig
from .errors import MaxIterations, NoFeasibleStart, SubproblemInfeasible
from . import rates, sdp


@dataclass(frozen=True)
class EffectiveChannels:
    """Composite Bob/Eve channels and rate denominators at a fixed reflection."""

    h_b: ComplexArray
    h_e: ComplexArray
    denom_b: float
    denom_e: float


@dataclass
class BeamformerLift:
    """Hermitian PSD lift W with its rank-one penalty residual."""

    w_mat: ComplexArray
    rank_residual: float


@dataclass
class ScaStep:
    """One record per convex solve, for convergence diagnostics."""

    objective: float
    trace: float
    rank_residual: float
    constraint_margin: float


@dataclass
class Algorithm1Config:
    eta: float = 1e-3
    eps1: float = 1e-3          # rank-residual stop, relative to tr(W)
    max_iter: int = 50
    power_cap: float = 1e3     # watts, feasibility-probe trace cap
    sdp_tol: float = 1e-7


@dataclass
class Algorithm1Result:
    w: ComplexArray
    lift: BeamformerLift
    steps: list[ScaStep] = field(default_factory=list)


def effective_channels(q: ComplexArray, ch: ChannelSet, noise: NoiseConfig) -> EffectiveChannels:
    """h_B = (h_AB^H + h_IB^H Q H_AI)^H and its Eve twin, plus denominators."""
    row_b = ch.h_ab.conj() + (ch.h_ib.conj() * q) @ ch.h_ai
    row_e = ch.h_ae.conj() + (ch.h_ie.conj() * q) @ ch.h_ai
    q2 = np.abs(q) ** 2
    denom_b = noise.sigma2_b + float(np.abs(ch.h_ib) ** 2 @ q2) * noise.sigma2_i
    denom_e = noise.sigma2_e + float(np.abs(ch.h_ie) ** 2 @ q2) * noise.sigma2_i
    return EffectiveChannels(
        h_b=row_b.conj(), h_e=row_e.conj(), denom_b=denom_b, denom_e=denom_e
    )


def rank_one_residual(w_mat: ComplexArray) -> float:
    """tr(W) - lambda_max(W): nonnegative on PSD, zero iff rank <= 1."""
    vals = np.linalg.eigvalsh(0.5 * (w_mat + w_mat.conj().T))
    return float(vals.sum() - vals[-1])


def _secrecy_matrix(eff: EffectiveChannels, rbar: float) -> ComplexArray:
    gbar = float(np.exp(rbar))
    return (
        np.outer(eff.h_b, eff.h_b.conj()) / eff.denom_b
        - gbar * np.outer(eff.h_e, eff.h_e.conj()) / eff.denom_e
    )


def _ris_quadratic(q: ComplexArray, ch: ChannelSet) -> ComplexArray:
    # tr(Q H W H^H Q^H) = Re tr((H^H diag|q|^2 H) W)
    return ch.h_ai.conj().T @ (np.abs(q)[:, None] ** 2 * ch.h_ai)


def feasible_start(
    q: ComplexArray,
    ch: ChannelSet,
    noise: NoiseConfig,
    rbar: float,
    p_i: float | None,
    cfg: Algorithm1Config,
) -> BeamformerLift:
    """Probe feasibility and build the SCA anchor.

    Maximizes the secrecy-constraint left side under the RIS budget and a
    trace cap; if even that optimum misses e^rbar - 1 the target is
    unreachable at this reflection, otherwise the maximizer is scaled down to
    the minimal multiple that meets the constraint with equality.
    """
    eff = effective_channels(q, ch, noise)
    s_mat = _secrecy_matrix(eff, rbar)
    target = float(np.exp(rbar)) - 1.0
    m = ch.num_tx_antennas

    prob = sdp.SdpProblem(block_dim=m, num_scalars=0, cost_matrix=-s_mat)
    prob.add_constraint(np.eye(m), None, "<=", cfg.power_cap)
    if p_i is not None:
        budget = p_i - float(np.vdot(q, q).real) * noise.sigma2_i
        if budget <= 0:
            raise NoFeasibleStart("RIS noise alone exceeds the amplification budget")
        prob.add_constraint(_ris_quadratic(q, ch), None, "<=", budget)
    sol = sdp.solve(prob, tol=cfg.sdp_tol)
    if sol.status != "optimal":
        raise SubproblemInfeasible(f"feasibility probe ended with status {sol.status}")
    best = -sol.objective_value
    if best < target:
        raise NoFeasibleStart(
            f"secrecy target unreachable at this reflection (max {best:.3e} < {target:.3e})"
        )
    scale = target / best if best > 0 else 0.0
    w0 = scale * sol.X
    return BeamformerLift(w_mat=w0, rank_residual=rank_one_residual(w0))


def solve_p5(
    eff: EffectiveChannels,
    q: ComplexArray,
    w_t: BeamformerLift,
    eta: float,
    rbar: float,
    p_i: float | None,
    ch: ChannelSet,
    noise: NoiseConfig,
    sdp_tol: float = 1e-7,
) -> tuple[BeamformerLift, float]:
    """One penalized convex step anchored at ``w_t``; returns (lift, objective).

    Objective: tr(W) + (1/eta) (tr(W) - linearized lambda_max at w_t); the
    constant terms of the linearization cancel, leaving C = (1+1/eta) I -
    (1/eta) nu nu^H.
    """
    if eta <= 0:
        raise ValueError("penalty factor must be positive")
    m = ch.num_tx_antennas
    _lam, nu_vec = sdp.max_eig_pair(w_t.w_mat)
    c_mat = (1.0 + 1.0 / eta) * np.eye(m) - (1.0 / eta) * np.outer(nu_vec, nu_vec.conj())

    prob = sdp.SdpProblem(block_dim=m, num_scalars=0, cost_matrix=c_mat)
    prob.add_constraint(_secrecy_matrix(eff, rbar), None, ">=", float(np.exp(rbar)) - 1.0)
    if p_i is not None:
        budget = p_i - float(np.vdot(q, q).real) * noise.sigma2_i
        prob.add_constraint(_ris_quadratic(q, ch), None, "<=", budget)
    sol = sdp.solve(prob, tol=sdp_tol)
    if sol.status != "optimal":
        raise SubproblemInfeasible(f"penalized step ended with status {sol.status}")
    lift = BeamformerLift(w_mat=sol.X, rank_residual=rank_one_residual(sol.X))
    return lift, sol.objective_value


def _recover(
    lift: BeamformerLift,
    eff: EffectiveChannels,
    rbar: float,
) -> ComplexArray:
    """Dominant eigenvector, rescaled onto the secrecy boundary exactly."""
    lam, nu_vec = sdp.max_eig_pair(lift.w_mat)
    lam = max(lam, 0.0)
    if rbar <= 0.0 or lam == 0.0:
        return np.sqrt(lam) * nu_vec
    s_mat = _secrecy_matrix(eff, rbar)
    gain = float(np.real(nu_vec.conj() @ s_mat @ nu_vec))
    target = float(np.exp(rbar)) - 1.0
    if gain <= 0:
        return np.sqrt(lam) * nu_vec  # direction lost the margin; caller verifies
    return np.sqrt(target / gain) * nu_vec


def algorithm1(
    q: ComplexArray,
    ch: ChannelSet,
    noise: NoiseConfig,
    rbar: float,
    p_i: float | None,
    cfg: Algorithm1Config | None = None,
    w_warm: ComplexArray | None = None,
) -> Algorithm1Result:
    """Penalty-based SCA for the transmit beamformer at a fixed reflection.

    ``p_i=None`` drops the RIS amplification budget (passive surface).
    ``w_warm`` anchors the first linearization at an externally known
    feasible beamformer when it still verifies at this reflection.
    """
    cfg = cfg or Algorithm1Config()
    m = ch.num_tx_antennas
    if rbar <= 0.0:
        w = np.zeros(m, dtype=complex)
        lift = BeamformerLift(w_mat=np.zeros((m, m), dtype=complex), rank_residual=0.0)
        return Algorithm1Result(w=w, lift=lift, steps=[])

    eff = effective_channels(q, ch, noise)
    target = float(np.exp(rbar)) - 1.0
    s_mat = _secrecy_matrix(eff, rbar)

    w_t = None
    if w_warm is not None and np.any(w_warm):
        margin = float(np.real(w_warm.conj() @ s_mat @ w_warm)) - target
        budget_ok = True
        if p_i is not None:
            lhs = float(np.real(w_warm.conj() @ _ris_quadratic(q, ch) @ w_warm))
            budget_ok = lhs <= p_i - float(np.vdot(q, q).real) * noise.sigma2_i + 1e-15
        if margin >= -1e-9 * target and budget_ok:
            scale = np.sqrt(target / max(margin + target, 1e-300))
            w0 = min(1.0, scale) * w_warm if margin >= 0 else scale * w_warm
            mat = np.outer(w0, w0.conj())
            w_t = BeamformerLift(w_mat=mat, rank_residual=0.0)
    if w_t is None:
        w_t = feasible_start(q, ch, noise, rbar, p_i, cfg)

    steps: list[ScaStep] = []
    for _ in range(cfg.max_iter):
        lift, objective = solve_p5(eff, q, w_t, cfg.eta, rbar, p_i, ch, noise, cfg.sdp_tol)
        margin = float(np.real(np.trace(s_mat @ lift.w_mat))) - target
        steps.append(
            ScaStep(
                objective=objective,
                trace=float(np.real(np.trace(lift.w_mat))),
                rank_residual=lift.rank_residual,
                constraint_margin=margin,
            )
        )
        w_t = lift
        if lift.rank_residual < cfg.eps1 * max(steps[-1].trace, 1e-30):
            w = _recover(lift, eff, rbar)
            ok_secrecy = (
                rates.secrecy_rate(w, q, ch, noise) >= rbar - 1e-6
                if np.any(w)
                else rbar <= 0
            )
            ok_budget = True
            if p_i is not None:
                ok_budget = rates.ris_power(w, q, ch, noise) <= p_i + 1e-9
            if ok_secrecy and ok_budget:
                return Algorithm1Result(w=w, lift=lift, steps=steps)
    raise MaxIterations("penalized SCA did not converge to a usable rank-one point")
