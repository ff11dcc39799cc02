"""
How lossy can the surface get before it stops paying off
========================================================

Sweeps the surface insertion loss at a fixed 30 dBm transmitted-power
budget and compares against the no-surface baseline (the four feed
antennas serving the users directly).  The baseline does not involve
the surface at all, so its curve is flat by construction; the question
is where the optimized-surface curve crosses it.
"""

from dataclasses import replace

import numpy as np

from itsbeam import (
    ConstraintKind,
    IlluminationMode,
    Method,
    SweepKind,
    default_experiment_spec,
    run_sweep,
)

spec = default_experiment_spec(
    sweep=SweepKind.LOSS, constraint=ConstraintKind.TRANSMITTED_POWER
)
spec = replace(
    spec,
    grid=(0.0, 5.0, 10.0, 15.0),
    trials=4,
    methods=(Method.WMMSE_BCD, Method.RANDOM_PHASES, Method.NO_ITS),
    illuminations=(IlluminationMode.FULL,),
)

records = run_sweep(spec)

cells = {}
for r in records:
    cells.setdefault((r.sweep_value, r.method), []).append(r.wsr)

print("mean weighted sum rate over", spec.trials, "paired trials")
print(f"{'loss dB':>8s}  {'optimized':>10s}  {'random':>10s}  {'no surface':>10s}")
for loss in spec.grid:
    bcd = np.mean(cells[(loss, "wmmse_bcd")])
    rnd = np.mean(cells[(loss, "random_phases")])
    bare = np.mean(cells[(loss, "no_its")])
    mark = "  <- surface still ahead" if bcd > bare else ""
    print(f"{loss:8.1f}  {bcd:10.3f}  {rnd:10.3f}  {bare:10.3f}{mark}")

print()
baseline = [np.mean(cells[(loss, "no_its")]) for loss in spec.grid]
print(f"baseline spread across the grid: {np.ptp(baseline):.2e} (flat, as it must be)")
print()
print("note: the baseline always runs under the transmitted-power constraint,")
print("so the comparison is one fixed radio budget spent two different ways.")
print("random phases sit below the baseline even with a lossless surface;")
print("optimized phases keep shrinking toward it as the loss grows.  where")
print("the curves cross depends on the draw, so use more trials for a verdict.")
