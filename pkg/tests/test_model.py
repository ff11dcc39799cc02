"""Objective and constraint arithmetic checked against scalar-loop oracles."""

import numpy as np
import pytest

from itsbeam import (
    ConstraintKind,
    DimensionMismatchError,
    PhaseConfig,
    Precoder,
    Solution,
    SystemInstance,
    constraint_value,
    effective_channel,
    sinr,
    spectral_efficiency,
    wsr,
)
from helpers import complex_normal, make_instance, random_phases, random_precoder


def oracle_effective_channel(inst, phases):
    """Triple-loop recomputation of H diag(exp(j phi)) T."""
    k_users, m = inst.channel.shape
    n = inst.transfer.shape[1]
    out = np.zeros((k_users, n), dtype=complex)
    psi = np.exp(1j * phases.phases)
    for k in range(k_users):
        for j in range(n):
            acc = 0.0 + 0.0j
            for i in range(m):
                acc += inst.channel[k, i] * psi[i] * inst.transfer[i, j]
            out[k, j] = acc
    return out


def oracle_sinr(inst, phases, precoder):
    heff = oracle_effective_channel(inst, phases)
    k_users = inst.n_users
    values = np.zeros(k_users)
    for k in range(k_users):
        signal = abs(np.dot(heff[k], precoder.matrix[:, k])) ** 2
        interference = sum(
            abs(np.dot(heff[k], precoder.matrix[:, i])) ** 2
            for i in range(k_users)
            if i != k
        )
        values[k] = signal / (interference + inst.noise_power)
    return values


def identity_instance(k, constraint=ConstraintKind.TRANSMITTED_POWER, noise_power=1e-2):
    """K = M = N with H = T = I, so heff at zero phases is the identity."""
    eye = np.eye(k, dtype=complex)
    return SystemInstance(
        transfer=eye,
        channel=eye,
        noise_power=noise_power,
        power_budget=10.0,
        weights=np.ones(k),
        constraint=constraint,
    )


def test_effective_channel_identity_case():
    inst = identity_instance(3)
    heff = effective_channel(inst, PhaseConfig(np.zeros(3)))
    assert np.allclose(heff, np.eye(3), atol=1e-15)


def test_effective_channel_phase_periodicity():
    rng = np.random.default_rng(11)
    inst = make_instance(rng, m=6, n=2, k=2)
    phases = random_phases(rng, 6)
    shifted = PhaseConfig(phases.phases + 2.0 * np.pi * rng.integers(-3, 4, size=6))
    a = effective_channel(inst, phases)
    b = effective_channel(inst, shifted)
    assert np.max(np.abs(a - b)) < 1e-12


def test_effective_channel_loop_oracle():
    rng = np.random.default_rng(12)
    for _ in range(5):
        inst = make_instance(rng, m=4, n=2, k=2)
        phases = random_phases(rng, 4)
        fast = effective_channel(inst, phases)
        slow = oracle_effective_channel(inst, phases)
        assert np.max(np.abs(fast - slow)) < 1e-12


def test_sinr_single_user():
    inst = identity_instance(1, noise_power=0.25)
    prec = Precoder(np.array([[2.0 + 1.0j]]))
    value = sinr(inst, PhaseConfig(np.zeros(1)), prec, user=0)
    assert abs(value - abs(2.0 + 1.0j) ** 2 / 0.25) < 1e-12


def test_sinr_zero_column_is_zero():
    rng = np.random.default_rng(13)
    inst = make_instance(rng, m=6, n=3, k=3)
    matrix = complex_normal(rng, 3, 3)
    matrix[:, 1] = 0.0
    values = sinr(inst, random_phases(rng, 6), Precoder(matrix))
    assert values[1] == 0.0


def test_sinr_loop_oracle():
    rng = np.random.default_rng(14)
    for _ in range(5):
        inst = make_instance(rng, m=5, n=3, k=3)
        phases = random_phases(rng, 5)
        prec = random_precoder(rng, 3, 3)
        fast = sinr(inst, phases, prec)
        slow = oracle_sinr(inst, phases, prec)
        assert np.max(np.abs(fast - slow) / slow) < 1e-12


def test_sinr_column_phase_invariance():
    rng = np.random.default_rng(15)
    inst = make_instance(rng, m=6, n=3, k=3)
    phases = random_phases(rng, 6)
    prec = random_precoder(rng, 3, 3)
    rotated = prec.matrix.copy()
    rotated[:, 2] *= np.exp(1j * 0.817)
    a = sinr(inst, phases, prec)
    b = sinr(inst, phases, Precoder(rotated))
    assert np.max(np.abs(a - b) / a) < 1e-10


def test_wsr_zero_precoder():
    rng = np.random.default_rng(16)
    inst = make_instance(rng, m=6, n=3, k=3)
    prec = Precoder(np.zeros((3, 3), dtype=complex))
    assert wsr(inst, random_phases(rng, 6), prec) == 0.0


def test_wsr_ignores_zero_weight_user():
    # Diagonal precoder over an identity channel: user SINRs are 1 and 99,
    # but only the first carries weight, so the WSR is 2 log2(2) = 2.
    noise = 0.04
    inst = SystemInstance(
        transfer=np.eye(2, dtype=complex),
        channel=np.eye(2, dtype=complex),
        noise_power=noise,
        power_budget=10.0,
        weights=np.array([2.0, 0.0]),
        constraint=ConstraintKind.TRANSMITTED_POWER,
    )
    prec = Precoder(np.diag([np.sqrt(noise), np.sqrt(99.0 * noise)]))
    values = sinr(inst, PhaseConfig(np.zeros(2)), prec)
    assert np.allclose(values, [1.0, 99.0], rtol=1e-12)
    assert abs(wsr(inst, PhaseConfig(np.zeros(2)), prec) - 2.0) < 1e-12


def test_wsr_compositional_identity():
    rng = np.random.default_rng(17)
    inst = make_instance(rng, m=6, n=3, k=3)
    phases = random_phases(rng, 6)
    prec = random_precoder(rng, 3, 3)
    direct = wsr(inst, phases, prec)
    composed = float(inst.weights @ np.log2(1.0 + sinr(inst, phases, prec)))
    assert abs(direct - composed) < 1e-12
    assert np.allclose(
        spectral_efficiency(inst, phases, prec),
        np.log2(1.0 + sinr(inst, phases, prec)),
        rtol=1e-12,
    )


def test_wsr_monotone_in_signal():
    inst = identity_instance(2, noise_power=0.1)
    phases = PhaseConfig(np.zeros(2))
    base = Precoder(np.diag([1.0, 1.0]).astype(complex))
    boosted = Precoder(np.diag([1.3, 1.0]).astype(complex))
    assert wsr(inst, phases, boosted) > wsr(inst, phases, base)


def test_constraint_tp_single_entry():
    inst = identity_instance(2)
    matrix = np.zeros((2, 2), dtype=complex)
    matrix[1, 0] = np.sqrt(3.7)
    value = constraint_value(inst, PhaseConfig(np.zeros(2)), Precoder(matrix))
    assert abs(value - 3.7) < 1e-12


def test_constraint_rp_unitary_invariance():
    rng = np.random.default_rng(18)
    inst = make_instance(rng, m=6, n=3, k=3, constraint=ConstraintKind.RADIATED_POWER)
    prec = random_precoder(rng, 3, 3)
    reference = float(np.linalg.norm(inst.transfer @ prec.matrix) ** 2)
    for _ in range(5):
        value = constraint_value(inst, random_phases(rng, 6), prec)
        assert abs(value - reference) < 1e-12 * reference


def test_constraint_rp_loop_oracle():
    rng = np.random.default_rng(19)
    inst = make_instance(rng, m=4, n=2, k=2, constraint=ConstraintKind.RADIATED_POWER)
    phases = random_phases(rng, 4)
    prec = random_precoder(rng, 2, 2)
    acc = 0.0
    psi = np.exp(1j * phases.phases)
    for m in range(4):
        for k in range(2):
            entry = psi[m] * sum(inst.transfer[m, j] * prec.matrix[j, k] for j in range(2))
            acc += abs(entry) ** 2
    fast = constraint_value(inst, phases, prec)
    assert abs(fast - acc) < 1e-12 * acc


def test_dimension_validation():
    rng = np.random.default_rng(20)
    inst = make_instance(rng, m=6, n=3, k=3)
    with pytest.raises(DimensionMismatchError):
        effective_channel(inst, PhaseConfig(np.zeros(5)))
    with pytest.raises(DimensionMismatchError):
        sinr(inst, random_phases(rng, 6), Precoder(np.zeros((2, 3), dtype=complex)))
    with pytest.raises(DimensionMismatchError):
        SystemInstance(
            transfer=np.zeros((4, 2), dtype=complex),
            channel=np.zeros((2, 3), dtype=complex),
            noise_power=1e-2,
            power_budget=1.0,
            weights=np.ones(2),
            constraint=ConstraintKind.TRANSMITTED_POWER,
        )
    with pytest.raises(DimensionMismatchError):
        make_instance(rng, noise_power=0.0)


def test_solution_consistency_checks():
    rng = np.random.default_rng(21)
    phases = random_phases(rng, 4)
    prec = random_precoder(rng, 2, 2)
    s = np.array([1.0, 2.0])
    good = Solution(
        phases=phases,
        precoder=prec,
        sinr=s,
        spectral_efficiency=np.log2(1.0 + s),
        wsr=float(np.sum(np.log2(1.0 + s))),
        constraint_slack=0.5,
        power_budget=1.0,
    )
    assert good.wsr > 0
    with pytest.raises(DimensionMismatchError):
        Solution(
            phases=phases,
            precoder=prec,
            sinr=s,
            spectral_efficiency=np.log2(1.0 + s) * 1.5,
            wsr=1.0,
            constraint_slack=0.5,
            power_budget=1.0,
        )
    with pytest.raises(DimensionMismatchError):
        Solution(
            phases=phases,
            precoder=prec,
            sinr=s,
            spectral_efficiency=np.log2(1.0 + s),
            wsr=1.0,
            constraint_slack=-1.0,
            power_budget=1.0,
        )
