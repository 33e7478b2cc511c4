"""Seeded channel generation for the RIS-assisted wiretap geometry.

Every link is modelled as large-scale path loss times small-scale Rician
fading.  The transmitter (Alice), the RIS, the legitimate user (Bob) and the
eavesdropper (Eve) sit at fixed 2-D positions; heights are absorbed into the
distances.

Reproducibility: realizations are drawn from numpy's Philox bit generator
(counter-based, platform-stable).  One generator is created per realization
from the 64-bit seed, and the five blocks are always drawn in the same order
(h_AB, h_AE, H_AI, h_IB, h_IE), so a given seed yields a bit-identical
ChannelSet on every platform and call.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

ComplexArray = NDArray[np.complexfloating]


@dataclass(frozen=True)
class NodeLayout:
    """2-D node positions in meters."""

    alice: tuple[float, float]
    ris: tuple[float, float]
    bob: tuple[float, float]
    eve: tuple[float, float]

    def __post_init__(self) -> None:
        pts = {"alice": self.alice, "ris": self.ris, "bob": self.bob, "eve": self.eve}
        names = list(pts)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                if _distance(pts[a], pts[b]) <= 0.0:
                    raise ValueError(f"coincident nodes: {a} and {b}")

    def distance(self, a: str, b: str) -> float:
        return _distance(getattr(self, a), getattr(self, b))


def _distance(p: tuple[float, float], q: tuple[float, float]) -> float:
    return float(np.hypot(p[0] - q[0], p[1] - q[1]))


@dataclass(frozen=True)
class ChannelParams:
    """Dimensions, propagation constants and the realization seed.

    The path-loss reference is 30 dB attenuation at 1 m; direct (Alice-Bob,
    Alice-Eve) links use ``exponent_direct``, RIS-adjacent links use
    ``exponent_ris``.  These constants are conventional values for this kind
    of scenario, not measured ones, so experiments built on them should be
    read as trends rather than absolute wattages.
    """

    num_tx_antennas: int
    num_ris_elements: int
    path_loss_ref_db: float = 30.0
    exponent_direct: float = 3.5
    exponent_ris: float = 2.2
    rician_k_db: float = 3.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_tx_antennas < 1 or self.num_ris_elements < 1:
            raise ValueError("antenna/element counts must be >= 1")
        if self.exponent_direct < 2.0 or self.exponent_ris < 2.0:
            raise ValueError("path-loss exponents must be >= 2.0")


@dataclass(frozen=True)
class ChannelSet:
    """One realization of the five channel blocks."""

    h_ab: ComplexArray  # (M,)   Alice-Bob
    h_ae: ComplexArray  # (M,)   Alice-Eve
    h_ai: ComplexArray  # (N, M) Alice-RIS
    h_ib: ComplexArray  # (N,)   RIS-Bob
    h_ie: ComplexArray  # (N,)   RIS-Eve

    def __post_init__(self) -> None:
        for name in ("h_ab", "h_ae", "h_ai", "h_ib", "h_ie"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def num_tx_antennas(self) -> int:
        return self.h_ab.shape[0]

    @property
    def num_ris_elements(self) -> int:
        return self.h_ib.shape[0]


@dataclass(frozen=True)
class NoiseConfig:
    """Linear noise powers (watts) at Bob, Eve and the RIS amplifiers."""

    sigma2_b: float
    sigma2_e: float
    sigma2_i: float

    def __post_init__(self) -> None:
        if self.sigma2_b <= 0 or self.sigma2_e <= 0:
            raise ValueError("receiver noise powers must be positive")
        if self.sigma2_i < 0:
            raise ValueError("RIS noise power must be >= 0")

    @classmethod
    def from_dbm(cls, bob_dbm: float, eve_dbm: float, ris_dbm: float | None) -> "NoiseConfig":
        """ris_dbm=None means a noiseless (passive) surface."""
        sigma2_i = 0.0 if ris_dbm is None else dbm_to_watts(ris_dbm)
        return cls(dbm_to_watts(bob_dbm), dbm_to_watts(eve_dbm), sigma2_i)


def dbm_to_watts(p_dbm: float) -> float:
    """Convert a dBm figure to linear watts."""
    if not np.isfinite(p_dbm):
        raise ValueError("dBm value must be finite")
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def path_loss_gain(dist: float, exponent: float, ref_db: float) -> float:
    """Linear power gain 10^(-ref_db/10) * dist^(-exponent)."""
    if dist <= 0.0:
        raise ValueError("distance must be positive")
    return 10.0 ** (-ref_db / 10.0) * dist ** (-exponent)


def rician_sample(
    rng: np.random.Generator, rows: int, cols: int, k_linear: float
) -> ComplexArray:
    """Unit-power Rician fading block of shape (rows, cols).

    The line-of-sight part is the all-ones matrix (planar wavefront), the
    diffuse part is i.i.d. circularly-symmetric complex Gaussian; each entry
    has unit second moment for any K.  ``k_linear=inf`` gives the pure LOS
    limit; ``k_linear=0`` is Rayleigh fading.
    """
    if k_linear < 0:
        raise ValueError("Rician K must be >= 0")
    shape = (rows, cols)
    if np.isinf(k_linear):
        return np.ones(shape, dtype=complex)
    diffuse = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    diffuse *= np.sqrt(0.5)
    los = np.ones(shape, dtype=complex)
    k = float(k_linear)
    return np.sqrt(k / (1.0 + k)) * los + np.sqrt(1.0 / (1.0 + k)) * diffuse


def generate_channels(layout: NodeLayout, params: ChannelParams) -> ChannelSet:
    """Draw one seeded realization of all five channel blocks.

    Each block is sqrt(path-loss gain) times a unit-power Rician sample; the
    draw order is fixed so identical (layout, params) give bit-identical
    output.
    """
    m, n = params.num_tx_antennas, params.num_ris_elements
    k_lin = 10.0 ** (params.rician_k_db / 10.0)
    rng = np.random.Generator(np.random.Philox(params.seed))

    def block(a: str, b: str, exponent: float, rows: int, cols: int) -> ComplexArray:
        gain = path_loss_gain(layout.distance(a, b), exponent, params.path_loss_ref_db)
        return np.sqrt(gain) * rician_sample(rng, rows, cols, k_lin)

    h_ab = block("alice", "bob", params.exponent_direct, m, 1).ravel()
    h_ae = block("alice", "eve", params.exponent_direct, m, 1).ravel()
    h_ai = block("alice", "ris", params.exponent_ris, n, m)
    h_ib = block("ris", "bob", params.exponent_ris, n, 1).ravel()
    h_ie = block("ris", "eve", params.exponent_ris, n, 1).ravel()
    return ChannelSet(h_ab=h_ab, h_ae=h_ae, h_ai=h_ai, h_ib=h_ib, h_ie=h_ie)
