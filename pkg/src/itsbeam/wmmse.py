"""Weighted-sum-rate maximisation by block coordinate ascent on an FP surrogate.

The weighted sum rate f0(phi, B) = sum_k w_k log2(1 + SINR_k) is lifted to the
fractional-programming surrogate

    f1(phi, B, gamma, y) = sum_k w_k log2(1 + gamma_k) - sum_k w_k gamma_k
                         + sum_k 2 sqrt(w_k (1 + gamma_k)) Re{conj(y_k) F_k}
                         - sum_k |y_k|^2 (G_k + |F_k|^2)

with F_k = heff_k @ b_k the signal amplitude and G_k the interference-plus-
noise power of user k.  At the closed-form auxiliary optimum

    gamma_k = SINR_k,   y_k = sqrt(w_k (1 + gamma_k)) F_k / (G_k + |F_k|^2),

the last three terms cancel and f1 collapses to f0 exactly, so maximising f1
block-by-block drives the true objective upward.  One outer iteration updates
gamma, y, the surface phases (projected gradient ascent on a quadratic form)
and the digital precoder (regularised least squares with a water-level dual),
in that order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import SolverError
from .model import (
    ConstraintKind,
    PhaseConfig,
    Precoder,
    Solution,
    SystemInstance,
    constraint_value,
    effective_channel,
    sinr,
    wsr,
)

__all__ = [
    "SolverSettings",
    "AuxVariables",
    "AnalogSubproblem",
    "update_gamma",
    "update_y",
    "surrogate_objective",
    "build_analog_subproblem",
    "analog_objective",
    "analog_objective_and_gradient",
    "optimize_phases",
    "digital_precoder",
    "dual_search",
    "bcd_solve",
    "dump_trace",
]

_MIN_STEP = 1e-12


@dataclass(frozen=True)
class SolverSettings:
    """Tunable solver knobs; defaults reproduce the reference configuration.

    ``freeze_phases`` skips the analog block entirely, which turns the solver
    into plain digital WMMSE for fixed surface phases (used by the
    random-phase and no-surface baselines).
    """

    bcd_epsilon: float = 1e-3
    bcd_max_iters: int = 200
    pga_max_iters: int = 50
    tau_init: float = 1.0
    armijo_shrink: float = 0.5
    armijo_zeta: float = 1e-3
    dual_tolerance: float = 1e-6
    dual_max_iters: int = 100
    freeze_phases: bool = False

    def __post_init__(self):
        if self.bcd_epsilon <= 0 or self.dual_tolerance <= 0:
            raise SolverError("tolerances must be positive")
        if min(self.bcd_max_iters, self.pga_max_iters, self.dual_max_iters) < 1:
            raise SolverError("iteration caps must be >= 1")
        if not 0 < self.armijo_shrink < 1:
            raise SolverError("armijo_shrink must lie in (0, 1)")
        if self.tau_init <= 0 or self.armijo_zeta <= 0:
            raise SolverError("tau_init and armijo_zeta must be positive")


@dataclass(frozen=True)
class AuxVariables:
    """FP auxiliaries: per-user SINR estimates gamma and complex scalars y."""

    gamma: np.ndarray  # (K,), nonnegative
    y: np.ndarray      # (K,), complex

    def __post_init__(self):
        g = np.asarray(self.gamma, dtype=float)
        y = np.asarray(self.y, dtype=complex)
        if g.ndim != 1 or y.shape != g.shape:
            raise SolverError("gamma and y must be 1-D with equal shape")
        if np.any(g < 0):
            raise SolverError("gamma must be nonnegative")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class AnalogSubproblem:
    """Phase subproblem data: maximise 2 Re{psi^H nu} - psi^H U psi over |psi_m| = 1."""

    linear_term: np.ndarray     # nu, (M,) complex
    quadratic_term: np.ndarray  # U, (M, M) complex Hermitian PSD

    def __post_init__(self):
        nu = np.asarray(self.linear_term, dtype=complex)
        u = np.asarray(self.quadratic_term, dtype=complex)
        if nu.ndim != 1 or u.shape != (nu.size, nu.size):
            raise SolverError("inconsistent subproblem shapes")
        object.__setattr__(self, "linear_term", nu)
        object.__setattr__(self, "quadratic_term", u)


def _signal_terms(inst: SystemInstance, phases: PhaseConfig, precoder: Precoder):
    """Return (F, total) with F_k = heff_k @ b_k and total_k = sum_i |heff_k b_i|^2 + sigma^2."""
    heff = effective_channel(inst, phases)
    cross = heff @ precoder.matrix  # (K, K), [k, i] = heff_k @ b_i
    f = np.diag(cross)
    total = np.sum(np.abs(cross) ** 2, axis=1) + inst.noise_power
    return f, total


def update_gamma(inst: SystemInstance, phases: PhaseConfig, precoder: Precoder) -> np.ndarray:
    """Closed-form gamma update: the current per-user SINR."""
    return sinr(inst, phases, precoder)


def update_y(
    inst: SystemInstance,
    phases: PhaseConfig,
    precoder: Precoder,
    gamma: np.ndarray,
) -> np.ndarray:
    """Closed-form y update: sqrt(w (1 + gamma)) F / (G + |F|^2)."""
    f, total = _signal_terms(inst, phases, precoder)
    return np.sqrt(inst.weights * (1.0 + np.asarray(gamma))) * f / total


def surrogate_objective(
    inst: SystemInstance,
    phases: PhaseConfig,
    precoder: Precoder,
    aux: AuxVariables,
) -> float:
    """Evaluate f1 at an arbitrary point (bits/s/Hz scale)."""
    f, total = _signal_terms(inst, phases, precoder)
    w = inst.weights
    scale = np.sqrt(w * (1.0 + aux.gamma))
    value = (
        np.sum(w * np.log2(1.0 + aux.gamma))
        - np.sum(w * aux.gamma)
        + np.sum(2.0 * scale * np.real(np.conj(aux.y) * f))
        - np.sum(np.abs(aux.y) ** 2 * total)
    )
    return float(value)


def build_analog_subproblem(
    inst: SystemInstance,
    precoder: Precoder,
    aux: AuxVariables,
) -> AnalogSubproblem:
    """Collect the phase-dependent part of f1 into (nu, U).

    With a_{k,i} = h_k * (T b_i) elementwise (the per-element path from stream
    i to user k) and psi = exp(j phi), the phase-dependent terms of f1 are
    2 Re{psi^H nu} - psi^H U psi - sigma^2 sum_k |y_k|^2 where

        nu = sum_k sqrt(w_k (1 + gamma_k)) y_k conj(a_{k,k}),
        U  = sum_k |y_k|^2 sum_i conj(a_{k,i}) a_{k,i}^T.
    """
    tb = inst.transfer @ precoder.matrix  # (M, K), column i = T b_i
    paths = inst.channel[:, np.newaxis, :] * tb.T[np.newaxis, :, :]  # (K, K, M), [k, i]
    scale = np.sqrt(inst.weights * (1.0 + aux.gamma))
    self_paths = paths[np.arange(inst.n_users), np.arange(inst.n_users)]  # (K, M)
    nu = (scale * aux.y) @ np.conj(self_paths)
    weights_sq = np.abs(aux.y) ** 2
    u = np.einsum("k,kim,kin->mn", weights_sq, np.conj(paths), paths, optimize=True)
    return AnalogSubproblem(linear_term=nu, quadratic_term=u)


def analog_objective(sub: AnalogSubproblem, phases: PhaseConfig) -> float:
    """f3(phi) = 2 Re{psi^H nu} - psi^H U psi at psi = exp(j phi)."""
    psi = phases.phasor()
    quad = np.real(np.vdot(psi, sub.quadratic_term @ psi))
    return float(2.0 * np.real(np.vdot(psi, sub.linear_term)) - quad)


def analog_objective_and_gradient(sub: AnalogSubproblem, phases: PhaseConfig):
    """Return (f3, grad f3) where grad_m = 2 Re{-j exp(-j phi_m) (nu - U psi)_m}."""
    psi = phases.phasor()
    u_psi = sub.quadratic_term @ psi
    value = float(2.0 * np.real(np.vdot(psi, sub.linear_term)) - np.real(np.vdot(psi, u_psi)))
    grad = 2.0 * np.real(-1j * np.conj(psi) * (sub.linear_term - u_psi))
    return value, grad


def _wrap(phases: np.ndarray) -> np.ndarray:
    return np.mod(phases, 2.0 * np.pi)


def _pga(sub: AnalogSubproblem, phases_init: PhaseConfig, settings: SolverSettings):
    """Projected gradient ascent with Armijo backtracking; returns (phases, steps, value)."""
    phi = _wrap(phases_init.phases)
    value, grad = analog_objective_and_gradient(sub, PhaseConfig(phi))
    steps = 0
    for _ in range(settings.pga_max_iters):
        grad_sq = float(grad @ grad)
        tau = settings.tau_init
        accepted = False
        while tau >= _MIN_STEP:
            candidate = _wrap(phi + tau * grad)
            cand_value = analog_objective(sub, PhaseConfig(candidate))
            if cand_value - value >= settings.armijo_zeta * tau * grad_sq:
                accepted = True
                break
            tau *= settings.armijo_shrink
        if not accepted:
            break
        improvement = cand_value - value
        phi = candidate
        value, grad = analog_objective_and_gradient(sub, PhaseConfig(phi))
        steps += 1
        if improvement <= 0.0:
            break  # flat accept (zero gradient); nothing left to gain
    return PhaseConfig(phi), steps, value


def optimize_phases(
    sub: AnalogSubproblem,
    phases_init: PhaseConfig,
    settings: SolverSettings,
) -> PhaseConfig:
    """Maximise the phase subproblem from ``phases_init``; never goes downhill."""
    phases, _, _ = _pga(sub, phases_init, settings)
    return phases


def _regularizer(inst: SystemInstance) -> np.ndarray:
    """Constraint curvature: d(h)/d(conj B) = R @ B with R below."""
    if inst.constraint is ConstraintKind.TRANSMITTED_POWER:
        return np.eye(inst.n_chains, dtype=complex)
    return inst.transfer.conj().T @ inst.transfer


def _precoder_system(inst: SystemInstance, heff: np.ndarray, aux: AuxVariables):
    """Normal equations of the f1 B-step: (gram + mu R) b_k = rhs[:, k]."""
    weights_sq = np.abs(aux.y) ** 2
    gram = np.einsum("k,kn,km->nm", weights_sq, np.conj(heff), heff)
    rhs = (np.sqrt(inst.weights * (1.0 + aux.gamma)) * aux.y) * np.conj(heff).T  # (N, K)
    return gram, rhs


_RANK_RTOL = 1e-10


def _limit_precoder(gram: np.ndarray, rhs: np.ndarray, reg: np.ndarray) -> Precoder:
    """mu -> 0+ limit of solve(gram + mu reg, rhs).

    The gram matrix is PSD and the right-hand side lies in its range (both are
    built from the same weighted channel rows), so the limit exists even when
    users with y_k = 0 leave the gram rank-deficient.  Directions with zero
    gain carry no objective value; the limit keeps them only insofar as they
    cancel constraint power: b_null = -(Z^H reg Z)^+ Z^H reg b_range.
    """
    lam, vecs = np.linalg.eigh(0.5 * (gram + gram.conj().T))
    lam_max = float(lam[-1]) if lam.size else 0.0
    keep = lam > max(lam_max, 0.0) * _RANK_RTOL
    if not np.any(keep):
        return Precoder(np.zeros_like(rhs))
    v_keep = vecs[:, keep]
    matrix = v_keep @ ((v_keep.conj().T @ rhs) / lam[keep][:, None])
    if np.all(keep):
        return Precoder(matrix)
    z = vecs[:, ~keep]
    shrink = np.linalg.lstsq(
        z.conj().T @ reg @ z, z.conj().T @ (reg @ matrix), rcond=None
    )[0]
    return Precoder(matrix - z @ shrink)


def digital_precoder(
    inst: SystemInstance,
    phases: PhaseConfig,
    aux: AuxVariables,
    mu: float,
) -> Precoder:
    """Precoder maximising the Lagrangian of the f1 B-step at dual value mu.

    Solves (sum_i |y_i|^2 conj(heff_i) heff_i^T + mu R) b_k
         = sqrt(w_k (1 + gamma_k)) y_k conj(heff_k) per user.
    """
    if mu < 0:
        raise SolverError("mu must be nonnegative")
    heff = effective_channel(inst, phases)
    gram, rhs = _precoder_system(inst, heff, aux)
    lhs = gram + mu * _regularizer(inst)
    lam = np.linalg.eigvalsh(0.5 * (lhs + lhs.conj().T))
    if lam[0] <= lam[-1] * _RANK_RTOL:
        raise SolverError("singular precoder system: needs positive dual (mu > 0)")
    matrix = np.linalg.solve(lhs, rhs)
    if not np.all(np.isfinite(matrix)):
        raise SolverError("singular precoder system: needs positive dual (mu > 0)")
    return Precoder(matrix)


def dual_search(
    inst: SystemInstance,
    phases: PhaseConfig,
    aux: AuxVariables,
    settings: SolverSettings,
):
    """Find the smallest dual mu whose precoder meets the power budget.

    Returns (precoder, mu).  If the unconstrained solution (mu = 0) is already
    feasible it is returned directly; otherwise the power h(mu), which is
    non-increasing in mu, is bisected until the budget is met within
    ``dual_tolerance`` relative tolerance (tightened when mu is large so that
    complementary slackness holds at the same tolerance).
    """
    budget = inst.power_budget
    tol = settings.dual_tolerance * budget
    heff = effective_channel(inst, phases)
    gram, rhs = _precoder_system(inst, heff, aux)
    reg = _regularizer(inst)

    def power_at(mu: float):
        matrix = np.linalg.solve(gram + mu * reg, rhs)
        if not np.all(np.isfinite(matrix)):
            raise SolverError("dual-regularised solve produced a non-finite precoder")
        prec = Precoder(matrix)
        return prec, constraint_value(inst, phases, prec)

    # The mu = 0 optimum needs rank-aware handling: users with y_k = 0 leave
    # the gram singular, and a naive solve then reports roundoff-level power
    # instead of the finite mu -> 0+ limit.
    prec0 = _limit_precoder(gram, rhs, reg)
    h0 = constraint_value(inst, phases, prec0)
    if h0 <= budget:
        return prec0, 0.0

    hi = 1.0
    prec_hi, h_hi = power_at(hi)
    doublings = 0
    while h_hi >= budget:
        hi *= 2.0
        doublings += 1
        if doublings > 200:
            raise SolverError("dual bracket expansion failed: power never fell below budget")
        prec_hi, h_hi = power_at(hi)
    lo = hi / 2.0 if doublings else 0.0

    for _ in range(settings.dual_max_iters):
        gap = budget - h_hi
        if gap <= tol and hi * gap <= tol:
            return prec_hi, hi
        mid = 0.5 * (lo + hi)
        prec_mid, h_mid = power_at(mid)
        if h_mid > budget:
            lo = mid
        else:
            hi, prec_hi, h_hi = mid, prec_mid, h_mid
    raise SolverError(
        f"dual bisection did not converge: bracket [{lo:.6e}, {hi:.6e}], "
        f"power gap {budget - h_hi:.3e}"
    )


def _solution_from_state(
    inst: SystemInstance,
    phases: PhaseConfig,
    precoder: Precoder,
    trace,
    detail,
) -> Solution:
    s = sinr(inst, phases, precoder)
    se = np.log2(1.0 + s)
    return Solution(
        phases=phases,
        precoder=precoder,
        sinr=s,
        spectral_efficiency=se,
        wsr=float(inst.weights @ se),
        constraint_slack=inst.power_budget - constraint_value(inst, phases, precoder),
        power_budget=inst.power_budget,
        trace=tuple(trace),
        detail=detail,
    )


def bcd_solve(
    inst: SystemInstance,
    settings: SolverSettings,
    init: Solution,
) -> Solution:
    """Run outer BCD iterations (gamma, y, phases, precoder) from a feasible start.

    Stops once the weighted-sum-rate gain of an iteration drops to
    ``settings.bcd_epsilon`` or below, or after ``bcd_max_iters`` iterations.
    The returned trace holds (iteration, wsr) pairs starting at iteration 0
    (the initial point); ``detail`` carries per-iteration diagnostics.
    """
    # Recompute slack against this instance rather than trusting the value
    # stored on the init, which may have been produced for another budget.
    init_power = constraint_value(inst, init.phases, init.precoder)
    if inst.power_budget - init_power < -1e-6 * inst.power_budget:
        raise SolverError("initial point violates the power constraint")
    phases = init.phases
    precoder = init.precoder
    current = wsr(inst, phases, precoder)
    trace = [(0, current)]
    detail = []
    for iteration in range(1, settings.bcd_max_iters + 1):
        gamma = update_gamma(inst, phases, precoder)
        y = update_y(inst, phases, precoder, gamma)
        aux = AuxVariables(gamma=gamma, y=y)
        pga_steps = 0
        if not settings.freeze_phases:
            sub = build_analog_subproblem(inst, precoder, aux)
            phases, pga_steps, _ = _pga(sub, phases, settings)
        precoder, mu = dual_search(inst, phases, aux, settings)
        new = wsr(inst, phases, precoder)
        trace.append((iteration, new))
        detail.append(
            {
                "iteration": iteration,
                "wsr": new,
                "surrogate": surrogate_objective(inst, phases, precoder, aux),
                "mu": mu,
                "pga_steps": pga_steps,
            }
        )
        gain = new - current
        current = new
        if gain <= settings.bcd_epsilon:
            break
    return _solution_from_state(inst, phases, precoder, trace, detail)


def dump_trace(detail, path) -> None:
    """Write bcd_solve per-iteration diagnostics to a JSON file."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(list(detail), fh, indent=2)
        fh.write("\n")
