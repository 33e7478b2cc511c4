"""Outer alternating minimization over the beamformer and the reflection.

Starting from the identity reflection, the transmit power is minimized at
the current reflection (algorithm 1), then the secrecy slack is maximized
over the reflection at the new beamformer (algorithm 2); the loop stops when
the transmit power stalls in relative terms.  The previous beamformer stays
feasible after every reflection update, so anchoring algorithm 1 on it makes
the transmit-power sequence non-increasing; that monotonicity is asserted,
not assumed.

Modes:
  active             amplifying surface, power budget p_i, RIS noise on
  passive_optimized  unit-modulus phases, no budget, RIS noise off
  passive_identity   reflection frozen at identity, RIS noise off
"""
from __future__ import annotations

import concurrent.futures
import dataclasses
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .beamformer import Algorithm1Config, algorithm1
from .channel import ChannelParams, ChannelSet, ComplexArray, NodeLayout, NoiseConfig, generate_channels
from .errors import MaxIterations, NoFeasibleStart, NonMonotoneError, SubproblemInfeasible
from .rates import Beamformer, ReflectMatrix, ris_power, secrecy_rate, total_power
from .reflector import Algorithm2Config, algorithm2

Mode = Literal["active", "passive_optimized", "passive_identity"]


@dataclass(frozen=True)
class AltMinConfig:
    rbar: float
    p_i: float = 10e-3
    eta: float = 1e-3
    eps_outer: float = 1e-3
    eps1: float = 1e-3
    eps2: float = 1e-3
    max_outer: int = 30
    mode: Mode = "active"
    sdp_tol: float = 1e-7

    def __post_init__(self) -> None:
        for name in ("eps_outer", "eps1", "eps2"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ValueError(f"{name} must be in (0, 1)")
        if self.rbar < 0:
            raise ValueError("target secrecy rate must be >= 0")
        if self.mode == "active" and self.p_i <= 0:
            raise ValueError("active mode needs a positive amplification budget")


@dataclass
class IterationRow:
    iteration: int
    transmit_power: float
    ris_power: float
    total_power: float
    secrecy_rate: float
    rank_residual_w: float
    rank_residual_u: float
    delta: float


@dataclass
class RunRecord:
    rows: list[IterationRow] = field(default_factory=list)
    status: str = "running"

    @property
    def outer_iterations(self) -> int:
        return len(self.rows)

    def transmit_trace(self) -> np.ndarray:
        return np.array([r.transmit_power for r in self.rows])

    def total_trace(self) -> np.ndarray:
        return np.array([r.total_power for r in self.rows])


def optimize(
    ch: ChannelSet, noise: NoiseConfig, cfg: AltMinConfig
) -> tuple[Beamformer, ReflectMatrix, RunRecord]:
    """Alternate the two subproblem solvers until the transmit power stalls."""
    m, n = ch.num_tx_antennas, ch.num_ris_elements
    record = RunRecord()

    if cfg.rbar == 0.0:
        # any reflection is optimal at w = 0; the zero one also zeroes RIS draw
        w = np.zeros(m, dtype=complex)
        q = np.zeros(n, dtype=complex)
        record.rows.append(
            IterationRow(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        )
        record.status = "converged"
        return Beamformer(w), ReflectMatrix(q), record

    active = cfg.mode == "active"
    noise_eff = noise if active else NoiseConfig(noise.sigma2_b, noise.sigma2_e, 0.0)
    p_i_eff = cfg.p_i if active else None
    a1cfg = Algorithm1Config(eta=cfg.eta, eps1=cfg.eps1, sdp_tol=cfg.sdp_tol)
    a2cfg = Algorithm2Config(eta=cfg.eta, eps2=cfg.eps2, sdp_tol=cfg.sdp_tol)

    q = np.ones(n, dtype=complex)
    w_prev: ComplexArray | None = None
    pt_prev = np.inf
    rank_u = 0.0
    delta = 0.0

    for it in range(cfg.max_outer):
        res1 = algorithm1(
            q, ch, noise_eff, cfg.rbar, p_i_eff, a1cfg, w_warm=w_prev
        )
        w = res1.w
        pt = float(np.vdot(w, w).real)
        if pt > pt_prev * (1.0 + 1e-9) + 1e-9:
            raise NonMonotoneError(
                f"transmit power rose from {pt_prev:.6e} to {pt:.6e} at iteration {it}"
            )

        if cfg.mode != "passive_identity":
            res2 = algorithm2(
                w,
                ch,
                noise_eff,
                cfg.rbar,
                p_i_eff,
                a2cfg,
                q_init=q,
                unit_modulus=cfg.mode == "passive_optimized",
            )
            q = res2.q
            rank_u = res2.lift.rank_residual
            delta = res2.lift.delta

        record.rows.append(
            IterationRow(
                iteration=it,
                transmit_power=pt,
                ris_power=ris_power(w, q, ch, noise_eff),
                total_power=total_power(w, q, ch, noise_eff, ris_active=active),
                secrecy_rate=secrecy_rate(w, q, ch, noise_eff),
                rank_residual_w=res1.lift.rank_residual,
                rank_residual_u=rank_u,
                delta=delta,
            )
        )

        if it >= 1 and abs(pt - pt_prev) / max(pt_prev, 1e-12) < cfg.eps_outer:
            record.status = "converged"
            return Beamformer(w), ReflectMatrix(q), record
        pt_prev = pt
        w_prev = w

    record.status = "max_outer"
    return Beamformer(w), ReflectMatrix(q), record


# ---------------------------------------------------------------------------
# batches over channel realizations


@dataclass
class SeedOutcome:
    seed: int
    status: str
    transmit_power: float = np.nan
    ris_power: float = np.nan
    total_power: float = np.nan
    secrecy_rate: float = np.nan
    outer_iterations: int = 0


@dataclass
class BatchResult:
    outcomes: list[SeedOutcome]

    def ok(self) -> list[SeedOutcome]:
        return [o for o in self.outcomes if o.status in ("converged", "max_outer")]

    @property
    def num_infeasible(self) -> int:
        return sum(1 for o in self.outcomes if o.status == "infeasible")

    def mean_total_power(self) -> float:
        vals = [o.total_power for o in self.ok()]
        return float(np.mean(vals)) if vals else np.nan

    def stderr_total_power(self) -> float:
        vals = [o.total_power for o in self.ok()]
        if len(vals) < 2:
            return np.nan
        return float(np.std(vals, ddof=1) / np.sqrt(len(vals)))


def _run_one(args) -> SeedOutcome:
    layout, params, noise, cfg, seed = args
    ch = generate_channels(layout, dataclasses.replace(params, seed=seed))
    try:
        w, q, record = optimize(ch, noise, cfg)
    except (NoFeasibleStart, SubproblemInfeasible):
        return SeedOutcome(seed=seed, status="infeasible")
    except MaxIterations:
        return SeedOutcome(seed=seed, status="stalled")
    row = record.rows[-1]
    return SeedOutcome(
        seed=seed,
        status=record.status,
        transmit_power=row.transmit_power,
        ris_power=row.ris_power,
        total_power=row.total_power,
        secrecy_rate=row.secrecy_rate,
        outer_iterations=record.outer_iterations,
    )


def run_batch(
    layout: NodeLayout,
    params: ChannelParams,
    noise: NoiseConfig,
    cfg: AltMinConfig,
    num_realizations: int,
    jobs: int | None = None,
) -> BatchResult:
    """Independent runs over seeds 0..num_realizations-1; failures are data.

    Results are ordered by seed regardless of completion order; ``jobs``
    selects process-level parallelism (the solves are single-threaded).
    """
    if num_realizations < 1:
        raise ValueError("need at least one realization")
    work = [(layout, params, noise, cfg, seed) for seed in range(num_realizations)]
    if jobs is None or jobs <= 1 or num_realizations == 1:
        outcomes = [_run_one(item) for item in work]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_one, work))
    return BatchResult(outcomes=outcomes)
