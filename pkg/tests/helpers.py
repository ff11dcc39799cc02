"""Shared builders for the test suite: small random instances and auxiliaries."""

import numpy as np

from itsbeam import AuxVariables, ConstraintKind, PhaseConfig, Precoder, SystemInstance


def complex_normal(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def make_instance(
    rng,
    m=8,
    n=3,
    k=3,
    constraint=ConstraintKind.TRANSMITTED_POWER,
    noise_power=1e-2,
    power_budget=5.0,
    weights=None,
):
    """Random dense instance at a scale where every solver runs in milliseconds."""
    if weights is None:
        weights = 0.5 + rng.uniform(0.0, 1.0, size=k)
    return SystemInstance(
        transfer=complex_normal(rng, m, n) / np.sqrt(m),
        channel=complex_normal(rng, k, m),
        noise_power=noise_power,
        power_budget=power_budget,
        weights=np.asarray(weights, dtype=float),
        constraint=constraint,
    )


def random_phases(rng, m):
    return PhaseConfig(rng.uniform(0.0, 2.0 * np.pi, size=m))


def random_precoder(rng, n, k, scale=1.0):
    return Precoder(scale * complex_normal(rng, n, k))


def random_aux(rng, k):
    return AuxVariables(gamma=rng.uniform(0.1, 3.0, size=k), y=complex_normal(rng, k))
