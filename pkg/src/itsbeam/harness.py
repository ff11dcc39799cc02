"""Monte Carlo experiment harness: sweeps, trials, CSV output, plot scripts.

A sweep evaluates every (grid value, trial, method, illumination) combination
of an :class:`ExperimentSpec`.  Within a trial, every method and illumination
sees the same user drop and surface channel (common random numbers): the
channel stream is derived only from ``(base_seed, trial_index)``, while the
no-surface channel and the random-phase draw use independent child streams so
they never perturb the shared draws.

Determinism contract: with ``record_timing`` False (the default) the emitted
CSV is a pure function of the spec and base seed, byte-identical across runs
and worker counts.  Enabling timing fills ``wall_time_ms`` with measured
values and intentionally gives up byte-stable output.

The no-surface baseline (``Method.NO_ITS``) is a conventional N-antenna
digital WMMSE system: the surface and its transfer matrix are replaced by
identities, the channel comes from :func:`itsbeam.channel.sample_direct_channel`,
and the power constraint is always TRANSMITTED_POWER since without a surface
the two constraint kinds coincide at the array port.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .channel import ChannelParams, sample_channel, sample_direct_channel, sample_user_drop
from .errors import SolverError
from .geometry import (
    GeometryConfig,
    IlluminationMode,
    build_layout,
    build_transfer_matrix,
    characteristic_distance,
)
from .model import (
    ConstraintKind,
    PhaseConfig,
    Precoder,
    Solution,
    SystemInstance,
    constraint_value,
    effective_channel,
    sinr,
)
from .wmmse import SolverSettings, bcd_solve
from .zfwf import zf_directions, zfwf_solve

__all__ = [
    "Method",
    "SweepKind",
    "ExperimentSpec",
    "ResultRecord",
    "SPEED_OF_LIGHT",
    "CSV_HEADER",
    "default_experiment_spec",
    "dbm_to_watts",
    "trial_seed",
    "build_trial_instance",
    "run_trial",
    "run_sweep",
    "write_results",
    "write_summary",
    "emit_plot_script",
]

SPEED_OF_LIGHT = 299792458.0

CSV_HEADER = (
    "sweep,sweep_value,trial,method,illumination,constraint,"
    "wsr,iterations,wall_time_ms,seed"
)

SUMMARY_HEADER = (
    "sweep,sweep_value,method,illumination,constraint,mean_wsr,std_wsr,trials,failed"
)


class Method(Enum):
    """Solvers the harness can run on a trial."""

    WMMSE_BCD = "wmmse_bcd"
    ZF_WF = "zf_wf"
    RANDOM_PHASES = "random_phases"
    NO_ITS = "no_its"


class SweepKind(Enum):
    """What the grid values mean: dBm budget, separation in R0 units, or dB loss."""

    POWER = "power"
    DISTANCE = "distance"
    LOSS = "loss"


@dataclass(frozen=True)
class ExperimentSpec:
    """Complete, self-contained description of one sweep experiment."""

    sweep: SweepKind
    grid: tuple
    trials: int
    base_seed: int
    methods: tuple
    illuminations: tuple
    constraint: ConstraintKind
    n_users: int
    weights: tuple
    noise_power: float
    power_budget_dbm: float
    geometry: GeometryConfig
    channel: ChannelParams
    solver: SolverSettings
    record_timing: bool = False

    def __post_init__(self):
        if len(self.grid) == 0:
            raise SolverError("sweep grid must not be empty")
        if self.trials < 1:
            raise SolverError("trials must be >= 1")
        if self.n_users < 1:
            raise SolverError("n_users must be >= 1")
        if len(self.weights) != self.n_users:
            raise SolverError("weights length must equal n_users")
        if self.noise_power <= 0:
            raise SolverError("noise_power must be positive")
        if self.sweep is SweepKind.LOSS and min(self.grid) < 0:
            raise SolverError("loss grid values are dB losses and must be >= 0")
        if self.sweep is SweepKind.DISTANCE and min(self.grid) <= 0:
            raise SolverError("distance grid values are R0 multiples and must be > 0")
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "illuminations", tuple(self.illuminations))


@dataclass(frozen=True)
class ResultRecord:
    """One CSV detail row; ``wsr`` is NaN when the solver failed."""

    sweep: str
    sweep_value: float
    trial: int
    method: str
    illumination: str
    constraint: str
    wsr: float
    iterations: int
    wall_time_ms: int
    seed: int

    def to_csv_row(self) -> str:
        return ",".join(
            [
                self.sweep,
                repr(float(self.sweep_value)),
                str(self.trial),
                self.method,
                self.illumination,
                self.constraint,
                repr(float(self.wsr)),
                str(self.iterations),
                str(self.wall_time_ms),
                str(self.seed),
            ]
        )


_DEFAULT_GRIDS = {
    SweepKind.POWER: (10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0),
    SweepKind.DISTANCE: (1.0, 2.0, 5.0, 10.0, 20.0, 50.0),
    SweepKind.LOSS: (0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0),
}

_DEFAULT_METHODS = {
    SweepKind.POWER: (Method.WMMSE_BCD, Method.ZF_WF, Method.RANDOM_PHASES),
    SweepKind.DISTANCE: (Method.WMMSE_BCD, Method.ZF_WF, Method.RANDOM_PHASES),
    SweepKind.LOSS: (Method.WMMSE_BCD, Method.RANDOM_PHASES, Method.NO_ITS),
}


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def default_experiment_spec(
    sweep: SweepKind = SweepKind.POWER,
    constraint: ConstraintKind = ConstraintKind.RADIATED_POWER,
) -> ExperimentSpec:
    """Reference configuration: 4 chains, 16x8 surface, 4 users at 28 GHz.

    Defaults: kappa = 49 feed horns on a one-wavelength ring, separation
    10 R0, surface efficiency -3.5 dB, noise power 1e-7 W, unit weights,
    30 dBm budget (swept for the power sweep), 1000 trials.
    """
    wavelength = SPEED_OF_LIGHT / 28e9
    r0 = characteristic_distance(128, 4, wavelength)
    geometry = GeometryConfig(
        n_active=4,
        n_elements=128,
        wavelength=wavelength,
        active_radius=wavelength,
        separation=10.0 * r0,
        kappa=49.0,
        surface_efficiency=10.0 ** (-3.5 / 10.0),
        illumination=IlluminationMode.FULL,
        grid_shape=(16, 8),
    )
    return ExperimentSpec(
        sweep=sweep,
        grid=_DEFAULT_GRIDS[sweep],
        trials=1000,
        base_seed=0,
        methods=_DEFAULT_METHODS[sweep],
        illuminations=(IlluminationMode.FULL,),
        constraint=constraint,
        n_users=4,
        weights=(1.0, 1.0, 1.0, 1.0),
        noise_power=1e-7,
        power_budget_dbm=30.0,
        geometry=geometry,
        channel=ChannelParams(),
        solver=SolverSettings(),
    )


def trial_seed(base_seed: int, trial_index: int) -> int:
    """Deterministic per-trial seed recorded in the CSV."""
    return int(np.random.SeedSequence([int(base_seed), int(trial_index)]).generate_state(1)[0])


def _trial_streams(base_seed: int, trial_index: int):
    """Independent generators: (shared channel, no-surface channel, random phases)."""
    root = np.random.SeedSequence([int(base_seed), int(trial_index)])
    children = root.spawn(3)
    return tuple(np.random.default_rng(child) for child in children)


def _resolve_sweep(spec: ExperimentSpec, sweep_value: float):
    """Apply one grid value, returning (geometry, power_budget_watts)."""
    geometry = spec.geometry
    budget = dbm_to_watts(spec.power_budget_dbm)
    if spec.sweep is SweepKind.POWER:
        budget = dbm_to_watts(sweep_value)
    elif spec.sweep is SweepKind.DISTANCE:
        r0 = characteristic_distance(
            geometry.n_elements, geometry.n_active, geometry.wavelength
        )
        geometry = replace(geometry, separation=sweep_value * r0)
    elif spec.sweep is SweepKind.LOSS:
        geometry = replace(geometry, surface_efficiency=10.0 ** (-sweep_value / 10.0))
    return geometry, budget


def build_trial_instance(
    spec: ExperimentSpec,
    sweep_value: float,
    trial_index: int,
    illumination: IlluminationMode,
    rng_channel: np.random.Generator,
):
    """Shared per-trial objects: (instance, layout, drop) for surface methods."""
    geometry, budget = _resolve_sweep(spec, sweep_value)
    geometry = replace(geometry, illumination=illumination)
    layout = build_layout(geometry)
    transfer = build_transfer_matrix(geometry, layout)
    drop = sample_user_drop(spec.channel, spec.n_users, rng_channel)
    channel = sample_channel(layout, drop, spec.channel, rng_channel)
    inst = SystemInstance(
        transfer=transfer,
        channel=channel,
        noise_power=spec.noise_power,
        power_budget=budget,
        weights=np.asarray(spec.weights),
        constraint=spec.constraint,
    )
    return inst, layout, drop


_REVIVAL_BLEND = 1e-2


def _bcd_init(inst, phases=None):
    """Zero-forcing start for the BCD solver, nudged so every user has power.

    Water-filling can shut off a user whose zero-forcing direction is costly,
    and a user entering BCD at exactly zero power stays silent forever (zero
    signal makes y_k = 0 a fixed point of the coordinate updates).  When that
    happens, a small slice of the budget is shifted toward the equal-power
    allocation along the same directions; the total stays exactly on budget.
    """
    sol = zfwf_solve(inst, phases=phases)
    powers = np.asarray(sol.detail["powers"], dtype=float)
    if np.all(powers > 0.0):
        return sol
    costs = np.asarray(sol.detail["chain_costs"], dtype=float)
    equal = inst.power_budget / (inst.n_users * costs)
    blended = (1.0 - _REVIVAL_BLEND) * powers + _REVIVAL_BLEND * equal
    directions = zf_directions(effective_channel(inst, sol.phases))
    precoder = Precoder(directions * np.sqrt(blended)[np.newaxis, :])
    s = sinr(inst, sol.phases, precoder)
    se = np.log2(1.0 + s)
    value = float(inst.weights @ se)
    return Solution(
        phases=sol.phases,
        precoder=precoder,
        sinr=s,
        spectral_efficiency=se,
        wsr=value,
        constraint_slack=inst.power_budget - constraint_value(inst, sol.phases, precoder),
        power_budget=inst.power_budget,
        trace=((0, value),),
        detail=dict(sol.detail, powers=blended.tolist(), revived=True),
    )


def _solve_for_method(spec, sweep_value, method, illumination, streams):
    rng_channel, rng_direct, rng_phases = streams
    if method is Method.NO_ITS:
        geometry, budget = _resolve_sweep(spec, sweep_value)
        layout = build_layout(replace(geometry, illumination=IlluminationMode.FULL))
        drop = sample_user_drop(spec.channel, spec.n_users, rng_channel)
        direct = sample_direct_channel(layout, drop, spec.channel, rng_direct)
        inst = SystemInstance(
            transfer=np.eye(geometry.n_active, dtype=complex),
            channel=direct,
            noise_power=spec.noise_power,
            power_budget=budget,
            weights=np.asarray(spec.weights),
            constraint=ConstraintKind.TRANSMITTED_POWER,
        )
        init = _bcd_init(inst, phases=PhaseConfig(np.zeros(geometry.n_active)))
        settings = replace(spec.solver, freeze_phases=True)
        return bcd_solve(inst, settings, init), ConstraintKind.TRANSMITTED_POWER

    effective_illumination = (
        IlluminationMode.FULL if method is Method.RANDOM_PHASES else illumination
    )
    inst, layout, _ = build_trial_instance(
        spec, sweep_value, 0, effective_illumination, rng_channel
    )
    if method is Method.ZF_WF:
        return zfwf_solve(inst), spec.constraint
    if method is Method.WMMSE_BCD:
        init = _bcd_init(inst)
        return bcd_solve(inst, spec.solver, init), spec.constraint
    if method is Method.RANDOM_PHASES:
        phases = PhaseConfig(rng_phases.uniform(0.0, 2.0 * np.pi, layout.n_elements))
        init = _bcd_init(inst, phases=phases)
        settings = replace(spec.solver, freeze_phases=True)
        return bcd_solve(inst, settings, init), spec.constraint
    raise SolverError(f"unknown method {method!r}")


def run_trial(
    spec: ExperimentSpec,
    sweep_value: float,
    trial_index: int,
    method: Method,
    illumination: IlluminationMode,
) -> ResultRecord:
    """Run one (grid value, trial, method, illumination) cell.

    Solver failures become records with NaN wsr rather than exceptions, so a
    long sweep cannot be lost to a single bad trial.
    """
    streams = _trial_streams(spec.base_seed, trial_index)
    start = time.perf_counter()
    try:
        solution, applied_constraint = _solve_for_method(
            spec, sweep_value, method, illumination, streams
        )
        value = solution.wsr
        iterations = int(solution.trace[-1][0])
    except SolverError:
        value = math.nan
        iterations = 0
        applied_constraint = (
            ConstraintKind.TRANSMITTED_POWER if method is Method.NO_ITS else spec.constraint
        )
    elapsed_ms = int(round(1000.0 * (time.perf_counter() - start))) if spec.record_timing else 0
    return ResultRecord(
        sweep=spec.sweep.value,
        sweep_value=float(sweep_value),
        trial=trial_index,
        method=method.value,
        illumination=illumination.value,
        constraint=applied_constraint.value,
        wsr=value,
        iterations=iterations,
        wall_time_ms=elapsed_ms,
        seed=trial_seed(spec.base_seed, trial_index),
    )


def _task_record(args) -> ResultRecord:
    spec, sweep_value, trial_index, method, illumination = args
    return run_trial(spec, sweep_value, trial_index, method, illumination)


def run_sweep(spec: ExperimentSpec, workers: int = 1) -> list:
    """Run the full cross product grid x trials x methods x illuminations.

    Record order is deterministic (grid-major, then trial, then method, then
    illumination) regardless of ``workers``; trials are independent work units.
    """
    tasks = [
        (spec, value, trial, method, illumination)
        for value in spec.grid
        for trial in range(spec.trials)
        for method in spec.methods
        for illumination in spec.illuminations
    ]
    if workers <= 1:
        return [_task_record(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (8 * workers))
        return list(pool.map(_task_record, tasks, chunksize=chunk))


def write_results(records, path) -> None:
    """Write detail records as CSV with the fixed 10-column header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for record in records:
            fh.write(record.to_csv_row() + "\n")


def _summary_groups(records):
    groups = {}
    order = []
    for record in records:
        key = (
            record.sweep,
            record.sweep_value,
            record.method,
            record.illumination,
            record.constraint,
        )
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(record.wsr)
    return order, groups


def write_summary(records, path) -> None:
    """Aggregate mean/std WSR per (grid value, method, illumination, constraint).

    Failed trials (NaN wsr) are excluded from the statistics and counted in
    the ``failed`` column; ``std_wsr`` uses ddof = 1.
    """
    order, groups = _summary_groups(records)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SUMMARY_HEADER + "\n")
        for key in order:
            values = np.asarray(groups[key], dtype=float)
            ok = values[np.isfinite(values)]
            failed = values.size - ok.size
            mean = float(np.mean(ok)) if ok.size else math.nan
            std = float(np.std(ok, ddof=1)) if ok.size > 1 else math.nan
            sweep, value, method, illumination, constraint = key
            fh.write(
                ",".join(
                    [
                        sweep,
                        repr(float(value)),
                        method,
                        illumination,
                        constraint,
                        repr(mean),
                        repr(std),
                        str(ok.size),
                        str(failed),
                    ]
                )
                + "\n"
            )


_SWEEP_LABELS = {
    "power": "transmit power budget (dBm)",
    "distance": "array separation (multiples of R0)",
    "loss": "surface loss (dB)",
}

_PLOT_TEMPLATE = '''"""Auto-generated plot script: mean weighted sum rate per method/illumination."""

import csv
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}
OUT_PATH = {png_path!r}
XLABEL = {xlabel!r}

series = defaultdict(lambda: defaultdict(list))
with open(CSV_PATH, newline="") as fh:
    for row in csv.DictReader(fh):
        wsr = float(row["wsr"])
        if wsr != wsr:  # skip failed trials
            continue
        label = row["method"] + " / " + row["illumination"]
        series[label][float(row["sweep_value"])].append(wsr)

fig, ax = plt.subplots(figsize=(6.0, 4.2))
for label in sorted(series):
    points = sorted(series[label].items())
    xs = [x for x, _ in points]
    ys = [sum(v) / len(v) for _, v in points]
    ax.plot(xs, ys, marker="o", label=label)
ax.set_xlabel(XLABEL)
ax.set_ylabel("mean weighted sum rate (bits/s/Hz)")
ax.grid(True, alpha=0.4)
ax.legend()
fig.tight_layout()
fig.savefig(OUT_PATH, dpi=150)
print("wrote", OUT_PATH)
'''


def emit_plot_script(spec: ExperimentSpec, csv_path: str, script_path: str) -> None:
    """Write a standalone matplotlib script that charts the sweep CSV."""
    png_path = str(csv_path) + ".png"
    body = _PLOT_TEMPLATE.format(
        csv_path=str(csv_path),
        png_path=png_path,
        xlabel=_SWEEP_LABELS[spec.sweep.value],
    )
    with open(script_path, "w", encoding="utf-8") as fh:
        fh.write(body)
