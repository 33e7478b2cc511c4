"""Deterministic rate and power bookkeeping for a given (w, q) pair.

All rates are in nats (natural logarithm).  ``q`` holds the per-element
reflection coefficients beta_n * exp(j*theta_n); the reflection matrix is
diag(q) and is never formed densely: ||h^H diag(q)||^2 is evaluated as
sum_n |h_n|^2 |q_n|^2.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, ComplexArray, NoiseConfig


@dataclass(frozen=True)
class Beamformer:
    """Transmit beamforming vector, shape (M,)."""

    w: ComplexArray

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.w)):
            raise ValueError("non-finite beamformer entries")

    @property
    def power(self) -> float:
        return float(np.vdot(self.w, self.w).real)


@dataclass(frozen=True)
class ReflectMatrix:
    """Per-element reflection coefficients, shape (N,); the matrix is diag(q)."""

    q: ComplexArray

    def as_matrix(self) -> ComplexArray:
        return np.diag(self.q)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.abs(self.q)


def _check_dims(w: ComplexArray, q: ComplexArray, ch: ChannelSet) -> None:
    if w.shape != (ch.num_tx_antennas,):
        raise ValueError(f"beamformer shape {w.shape} != ({ch.num_tx_antennas},)")
    if q.shape != (ch.num_ris_elements,):
        raise ValueError(f"reflection shape {q.shape} != ({ch.num_ris_elements},)")


def _rate(
    w: ComplexArray,
    q: ComplexArray,
    h_direct: ComplexArray,
    h_ris: ComplexArray,
    h_ai: ComplexArray,
    sigma2_rx: float,
    sigma2_i: float,
) -> float:
    # effective row channel h_direct^H + h_ris^H diag(q) H_AI
    eff = h_direct.conj() + (h_ris.conj() * q) @ h_ai
    signal = abs(eff @ w) ** 2
    noise = sigma2_rx + float(np.sum(np.abs(h_ris) ** 2 * np.abs(q) ** 2)) * sigma2_i
    return float(np.log1p(signal / noise))


def rate_bob(w: ComplexArray, q: ComplexArray, ch: ChannelSet, noise: NoiseConfig) -> float:
    """Achievable rate of the legitimate link, nats."""
    _check_dims(w, q, ch)
    return _rate(w, q, ch.h_ab, ch.h_ib, ch.h_ai, noise.sigma2_b, noise.sigma2_i)


def rate_eve(w: ComplexArray, q: ComplexArray, ch: ChannelSet, noise: NoiseConfig) -> float:
    """Achievable rate of the eavesdropper link, nats."""
    _check_dims(w, q, ch)
    return _rate(w, q, ch.h_ae, ch.h_ie, ch.h_ai, noise.sigma2_e, noise.sigma2_i)


def secrecy_rate(w: ComplexArray, q: ComplexArray, ch: ChannelSet, noise: NoiseConfig) -> float:
    """[R_B - R_E]^+ in nats."""
    return max(rate_bob(w, q, ch, noise) - rate_eve(w, q, ch, noise), 0.0)


def ris_power(w: ComplexArray, q: ComplexArray, ch: ChannelSet, noise: NoiseConfig) -> float:
    """Amplification power drawn at the surface: ||diag(q) H_AI w||^2 + ||q||^2 sigma_I^2."""
    _check_dims(w, q, ch)
    reflected = q * (ch.h_ai @ w)
    return float(np.vdot(reflected, reflected).real + np.vdot(q, q).real * noise.sigma2_i)


def total_power(
    w: ComplexArray,
    q: ComplexArray,
    ch: ChannelSet,
    noise: NoiseConfig,
    ris_active: bool = True,
) -> float:
    """Transmit power plus (for an active surface) the RIS amplification power.

    A passive surface draws no supply power, so only ||w||^2 counts there.
    """
    pt = float(np.vdot(w, w).real)
    if not ris_active:
        return pt
    return pt + ris_power(w, q, ch, noise)


def nats_to_bits(r_nats: float) -> float:
    return r_nats / float(np.log(2.0))
