"""Built-in invariant checks behind the ``itsbeam selfcheck`` command.

Each check re-derives the quantity under test independently (elementwise
loops, finite differences, a scalar bisection) rather than calling the code
path it validates, so a PASS means two routes agree. Runs in a few seconds.
"""

from __future__ import annotations

import numpy as np

from .geometry import (
    GeometryConfig,
    IlluminationMode,
    antenna_gain,
    build_layout,
    build_transfer_matrix,
)
from .model import (
    ConstraintKind,
    PhaseConfig,
    Precoder,
    SystemInstance,
    constraint_value,
    effective_channel,
    sinr,
    wsr,
)
from .wmmse import (
    AuxVariables,
    SolverSettings,
    analog_objective,
    analog_objective_and_gradient,
    build_analog_subproblem,
    bcd_solve,
    dual_search,
    surrogate_objective,
    update_gamma,
    update_y,
)
from .zfwf import waterfill, zfwf_solve
from .harness import Method, default_experiment_spec, run_trial

__all__ = ["run_selfcheck"]


def _random_instance(rng, m=16, n=4, k=4, constraint=ConstraintKind.TRANSMITTED_POWER):
    transfer = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2 * m)
    channel = (rng.standard_normal((k, m)) + 1j * rng.standard_normal((k, m))) / np.sqrt(2)
    return SystemInstance(
        transfer=transfer,
        channel=channel,
        noise_power=0.5,
        power_budget=4.0,
        weights=rng.uniform(0.5, 1.5, k),
        constraint=constraint,
    )


def _check_model_oracle(rng) -> bool:
    inst = _random_instance(rng, m=6, n=3, k=2)
    phases = PhaseConfig(rng.uniform(0, 2 * np.pi, 6))
    heff = effective_channel(inst, phases)
    manual = np.zeros((2, 3), dtype=complex)
    for k in range(2):
        for n in range(3):
            for m in range(6):
                manual[k, n] += (
                    inst.channel[k, m] * np.exp(1j * phases.phases[m]) * inst.transfer[m, n]
                )
    return bool(np.allclose(heff, manual, rtol=0, atol=1e-12))


def _check_radiated_power_invariance(rng) -> bool:
    inst = _random_instance(rng, constraint=ConstraintKind.RADIATED_POWER)
    precoder = Precoder(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    phases = PhaseConfig(rng.uniform(0, 2 * np.pi, 16))
    with_d = constraint_value(inst, phases, precoder)
    without = float(np.linalg.norm(inst.transfer @ precoder.matrix) ** 2)
    return abs(with_d - without) <= 1e-12 * max(without, 1.0)


def _check_gain_quadrature() -> bool:
    theta = np.linspace(0.0, np.pi / 2, 20001)
    for kappa in (0.0, 1.0, 49.0):
        integrand = antenna_gain(theta, kappa) * np.sin(theta) / 2.0
        total = float(np.trapezoid(integrand, theta))
        if abs(total - 1.0) > 1e-3:
            return False
    return True


def _check_transfer_magnitude() -> bool:
    cfg = GeometryConfig(
        n_active=4,
        n_elements=32,
        wavelength=0.01,
        active_radius=0.01,
        separation=0.08,
        kappa=9.0,
        surface_efficiency=0.5,
        illumination=IlluminationMode.FULL,
        grid_shape=(8, 4),
    )
    layout = build_layout(cfg)
    transfer = build_transfer_matrix(cfg, layout)
    dists = np.linalg.norm(
        layout.element_positions[:, None, :] - layout.active_positions[None, :, :], axis=-1
    )
    bound = (cfg.wavelength / (4 * np.pi * dists.min())) * np.sqrt(
        cfg.surface_efficiency * 2 * (1 + cfg.kappa)
    )
    return bool(np.all(np.abs(transfer) <= bound * (1 + 1e-12)))


def _check_fp_identity(rng) -> bool:
    inst = _random_instance(rng)
    phases = PhaseConfig(rng.uniform(0, 2 * np.pi, 16))
    precoder = Precoder(
        0.5 * (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    )
    gamma = update_gamma(inst, phases, precoder)
    y = update_y(inst, phases, precoder, gamma)
    aux = AuxVariables(gamma=gamma, y=y)
    f1 = surrogate_objective(inst, phases, precoder, aux)
    f0 = wsr(inst, phases, precoder)
    return abs(f1 - f0) <= 1e-9 * abs(f0)


def _check_analog_gradient(rng) -> bool:
    inst = _random_instance(rng)
    phases = PhaseConfig(rng.uniform(0, 2 * np.pi, 16))
    precoder = Precoder(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
    gamma = update_gamma(inst, phases, precoder)
    aux = AuxVariables(gamma=gamma, y=update_y(inst, phases, precoder, gamma))
    sub = build_analog_subproblem(inst, precoder, aux)
    _, grad = analog_objective_and_gradient(sub, phases)
    step = 1e-6
    for m in range(16):
        bump = np.zeros(16)
        bump[m] = step
        fd = (
            analog_objective(sub, PhaseConfig(phases.phases + bump))
            - analog_objective(sub, PhaseConfig(phases.phases - bump))
        ) / (2 * step)
        if abs(fd - grad[m]) > 1e-5 * max(1.0, abs(fd)):
            return False
    return True


def _check_dual_feasibility(rng) -> bool:
    for constraint in ConstraintKind:
        inst = _random_instance(rng, constraint=constraint)
        phases = PhaseConfig(rng.uniform(0, 2 * np.pi, 16))
        precoder = Precoder(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))
        gamma = update_gamma(inst, phases, precoder)
        aux = AuxVariables(gamma=gamma, y=update_y(inst, phases, precoder, gamma))
        settings = SolverSettings()
        prec, mu = dual_search(inst, phases, aux, settings)
        h = constraint_value(inst, phases, prec)
        if h > inst.power_budget * (1 + 1e-9):
            return False
        if mu > 0 and mu * (inst.power_budget - h) > 1e-6 * inst.power_budget:
            return False
    return True


def _check_waterfill(rng) -> bool:
    w = rng.uniform(0.5, 2.0, 4)
    a = rng.uniform(0.1, 3.0, 4)
    noise, budget = 0.3, 5.0
    alloc = waterfill(w, a, noise, budget)
    if abs(float(a @ alloc.powers) - budget) > 1e-9 * budget:
        return False
    # independent oracle: bisection on the water level
    lo, hi = 1e-12, 1e12
    for _ in range(200):
        mid = np.sqrt(lo * hi)
        spent = float(a @ np.clip(w / (mid * a) - noise, 0.0, None))
        if spent > budget:
            lo = mid
        else:
            hi = mid
    oracle = np.clip(w / (hi * a) - noise, 0.0, None)
    return bool(np.allclose(alloc.powers, oracle, rtol=0, atol=1e-6 * budget))


def _check_zf(rng) -> bool:
    inst = _random_instance(rng)
    solution = zfwf_solve(inst)
    heff = effective_channel(inst, solution.phases)
    cross = heff @ solution.precoder.matrix
    diag = np.abs(np.diag(cross))
    off = np.abs(cross - np.diag(np.diag(cross)))
    if np.any(off > 1e-6 * diag.min()):
        return False
    return bool(
        np.allclose(
            sinr(inst, solution.phases, solution.precoder),
            solution.sinr,
            rtol=1e-9,
            atol=0,
        )
    )


def _check_bcd_monotone(rng) -> bool:
    inst = _random_instance(rng)
    init = zfwf_solve(inst)
    solution = bcd_solve(inst, SolverSettings(bcd_epsilon=1e-4, bcd_max_iters=30), init)
    values = [v for _, v in solution.trace]
    diffs = np.diff(values)
    return bool(np.all(diffs >= -1e-9)) and values[-1] >= init.wsr - 1e-9


def _check_harness_determinism() -> bool:
    from dataclasses import replace

    spec = replace(default_experiment_spec(), trials=1)
    rec1 = run_trial(spec, 20.0, 0, Method.ZF_WF, spec.illuminations[0])
    rec2 = run_trial(spec, 20.0, 0, Method.ZF_WF, spec.illuminations[0])
    return rec1 == rec2


def run_selfcheck(verbose: bool = True) -> bool:
    """Run all invariant bundles; returns True when every check passes."""
    rng = np.random.default_rng(2024)
    checks = [
        ("model effective-channel oracle", lambda: _check_model_oracle(rng)),
        ("model radiated-power phase invariance", lambda: _check_radiated_power_invariance(rng)),
        ("geometry gain-pattern quadrature", _check_gain_quadrature),
        ("geometry transfer magnitude bound", _check_transfer_magnitude),
        ("wmmse surrogate identity", lambda: _check_fp_identity(rng)),
        ("wmmse analog gradient vs finite differences", lambda: _check_analog_gradient(rng)),
        ("wmmse dual feasibility + slackness", lambda: _check_dual_feasibility(rng)),
        ("zfwf water-filling vs bisection oracle", lambda: _check_waterfill(rng)),
        ("zfwf zero interference", lambda: _check_zf(rng)),
        ("bcd monotone ascent", lambda: _check_bcd_monotone(rng)),
        ("harness trial determinism", _check_harness_determinism),
    ]
    all_ok = True
    for name, check in checks:
        ok = bool(check())
        all_ok &= ok
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return all_ok
