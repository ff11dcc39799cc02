"""Core downlink model: instance container, phase/precoder types, SINR and power ops.

The modelled link is `user <- surface <- active array`: an N-chain active
array illuminates an M-element transmissive surface whose element m applies a
unit-modulus weight exp(j*phi_m), and user k receives through the row vector
h_k of the surface-to-user channel.  The effective channel seen by the digital
precoder is therefore

    heff = H @ diag(exp(j*phi)) @ T          (K x N)

with H the (K, M) user channels and T the (M, N) array-to-surface transfer
matrix.  All powers in this module are linear (watts); decibels only appear at
the configuration boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "ConstraintKind",
    "SystemInstance",
    "PhaseConfig",
    "Precoder",
    "Solution",
    "effective_channel",
    "sinr",
    "spectral_efficiency",
    "wsr",
    "constraint_value",
]


class ConstraintKind(Enum):
    """Which quadratic power constraint applies to the digital precoder.

    RADIATED_POWER caps ``||D T B||_F^2``, the power leaving the surface.
    TRANSMITTED_POWER caps ``||B||_F^2``, the power fed into the chains.
    """

    RADIATED_POWER = "rp"
    TRANSMITTED_POWER = "tp"


def _as_complex(a, name: str, ndim: int) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.ndim != ndim:
        raise DimensionMismatchError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatchError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SystemInstance:
    """One frozen problem instance.

    Attributes
    ----------
    transfer : (M, N) complex ndarray
        Array-to-surface transfer matrix T.
    channel : (K, M) complex ndarray
        Surface-to-user channels, one row per user.
    noise_power : float
        Receiver noise variance sigma^2 (linear).
    power_budget : float
        Constraint level p_max (linear watts).
    weights : (K,) float ndarray
        Nonnegative per-user rate weights.
    constraint : ConstraintKind
        Which power expression the budget applies to.
    """

    transfer: np.ndarray
    channel: np.ndarray
    noise_power: float
    power_budget: float
    weights: np.ndarray
    constraint: ConstraintKind

    def __post_init__(self):
        t = _as_complex(self.transfer, "transfer", 2)
        h = _as_complex(self.channel, "channel", 2)
        if h.shape[1] != t.shape[0]:
            raise DimensionMismatchError(
                f"channel has {h.shape[1]} columns but transfer has {t.shape[0]} rows"
            )
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (h.shape[0],):
            raise DimensionMismatchError(
                f"weights must have shape ({h.shape[0]},), got {w.shape}"
            )
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DimensionMismatchError("weights must be finite and nonnegative")
        if not (np.isfinite(self.noise_power) and self.noise_power > 0):
            raise DimensionMismatchError("noise_power must be positive")
        if not (np.isfinite(self.power_budget) and self.power_budget > 0):
            raise DimensionMismatchError("power_budget must be positive")
        if not isinstance(self.constraint, ConstraintKind):
            raise DimensionMismatchError("constraint must be a ConstraintKind")
        object.__setattr__(self, "transfer", t)
        object.__setattr__(self, "channel", h)
        object.__setattr__(self, "weights", w)

    @property
    def n_chains(self) -> int:
        return self.transfer.shape[1]

    @property
    def n_elements(self) -> int:
        return self.transfer.shape[0]

    @property
    def n_users(self) -> int:
        return self.channel.shape[0]


@dataclass(frozen=True)
class PhaseConfig:
    """Per-element surface phases phi (radians).

    The surface weight matrix is D = diag(exp(j*phi)); storing angles rather
    than complex weights makes the unit-modulus constraint unviolable.
    """

    phases: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=float)
        if p.ndim != 1:
            raise DimensionMismatchError(f"phases must be 1-dimensional, got shape {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DimensionMismatchError("phases contains non-finite entries")
        object.__setattr__(self, "phases", p)

    def phasor(self) -> np.ndarray:
        """Diagonal of D, i.e. exp(j*phi), shape (M,)."""
        return np.exp(1j * self.phases)


@dataclass(frozen=True)
class Precoder:
    """Digital precoder B of shape (N, K); column k carries user k's stream."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_complex(self.matrix, "precoder", 2))


@dataclass(frozen=True)
class Solution:
    """Solver output bundle; validated for internal consistency on creation."""

    phases: PhaseConfig
    precoder: Precoder
    sinr: np.ndarray
    spectral_efficiency: np.ndarray
    wsr: float
    constraint_slack: float
    power_budget: float
    trace: tuple = ()
    detail: object = field(default=None, compare=False)

    def __post_init__(self):
        s = np.asarray(self.sinr, dtype=float)
        se = np.asarray(self.spectral_efficiency, dtype=float)
        if s.shape != se.shape:
            raise DimensionMismatchError("sinr and spectral_efficiency must have equal shape")
        if np.any(s < 0):
            raise DimensionMismatchError("sinr must be nonnegative")
        if not np.allclose(se, np.log2(1.0 + s), rtol=1e-9, atol=1e-12):
            raise DimensionMismatchError("spectral_efficiency inconsistent with sinr")
        if self.constraint_slack < -1e-6 * self.power_budget:
            raise DimensionMismatchError(
                f"constraint violated: slack {self.constraint_slack:.3e} "
                f"below -1e-6 * {self.power_budget:.3e}"
            )
        object.__setattr__(self, "sinr", s)
        object.__setattr__(self, "spectral_efficiency", se)


def _check_phases(inst: SystemInstance, phases: PhaseConfig) -> None:
    if phases.phases.shape != (inst.n_elements,):
        raise DimensionMismatchError(
            f"phases must have shape ({inst.n_elements},), got {phases.phases.shape}"
        )


def _check_precoder(inst: SystemInstance, precoder: Precoder) -> None:
    if precoder.matrix.shape != (inst.n_chains, inst.n_users):
        raise DimensionMismatchError(
            f"precoder must have shape ({inst.n_chains}, {inst.n_users}), "
            f"got {precoder.matrix.shape}"
        )


def effective_channel(inst: SystemInstance, phases: PhaseConfig) -> np.ndarray:
    """Return heff = H @ diag(exp(j*phi)) @ T, shape (K, N)."""
    _check_phases(inst, phases)
    return (inst.channel * phases.phasor()[np.newaxis, :]) @ inst.transfer


def sinr(
    inst: SystemInstance,
    phases: PhaseConfig,
    precoder: Precoder,
    user: int | None = None,
):
    """SINR of each user (or of one user when ``user`` is given).

    SINR_k = |heff_k @ b_k|^2 / (sum_{i != k} |heff_k @ b_i|^2 + sigma^2).
    """
    _check_precoder(inst, precoder)
    heff = effective_channel(inst, phases)
    gains = np.abs(heff @ precoder.matrix) ** 2  # (K, K), [k, i] = |heff_k b_i|^2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    values = signal / (interference + inst.noise_power)
    if user is None:
        return values
    return float(values[user])


def spectral_efficiency(inst: SystemInstance, phases: PhaseConfig, precoder: Precoder) -> np.ndarray:
    """Per-user rate log2(1 + SINR_k), bits/s/Hz."""
    return np.log2(1.0 + sinr(inst, phases, precoder))


def wsr(inst: SystemInstance, phases: PhaseConfig, precoder: Precoder) -> float:
    """Weighted sum rate sum_k weights_k * log2(1 + SINR_k)."""
    return float(inst.weights @ spectral_efficiency(inst, phases, precoder))


def constraint_value(inst: SystemInstance, phases: PhaseConfig, precoder: Precoder) -> float:
    """Left-hand side of the active power constraint.

    RADIATED_POWER:    ||diag(exp(j*phi)) T B||_F^2
    TRANSMITTED_POWER: ||B||_F^2
    """
    _check_precoder(inst, precoder)
    if inst.constraint is ConstraintKind.TRANSMITTED_POWER:
        return float(np.linalg.norm(precoder.matrix) ** 2)
    _check_phases(inst, phases)
    radiated = phases.phasor()[:, np.newaxis] * (inst.transfer @ precoder.matrix)
    return float(np.linalg.norm(radiated) ** 2)
