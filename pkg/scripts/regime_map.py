"""Regime label and first crossing time over a (delta_t, p0) grid.

    python scripts/regime_map.py --out regime_map.csv --n-dt 25 --p0 0,0.5,1,2
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from zeno_shuffling import MeasurementSchedule, PhysicalParams, derive_scales
from zeno_shuffling import shuffling as sh


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("regime_map.csv"))
    parser.add_argument("--dt-min", type=float, default=1e-3)
    parser.add_argument("--dt-max", type=float, default=1.0)
    parser.add_argument("--n-dt", type=int, default=25)
    parser.add_argument("--p0", default="0,0.5,1,2")
    parser.add_argument("--total-time", type=float, default=20.0)
    args = parser.parse_args()

    deltas = np.geomspace(args.dt_min, args.dt_max, args.n_dt)
    rows = []
    for p0 in (float(v) for v in args.p0.split(",")):
        params = PhysicalParams(p0=p0)
        scales = derive_scales(params)
        for dt in deltas:
            schedule = MeasurementSchedule(dt, total_time=max(args.total_time, dt), sample_dt=min(1e-3, dt))
            label = sh.classify_regime(scales, dt).label.value
            crossing = sh.crossing_time(params, schedule)
            rows.append((p0, dt, dt / scales.tau_zeno, label, "" if crossing is None else crossing))

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["p0", "delta_t", "delta_t_over_tau_zeno", "regime", "crossing_time"])
        writer.writerows(rows)
    counts = {}
    for row in rows:
        counts[row[3]] = counts.get(row[3], 0) + 1
    print(args.out, counts)


if __name__ == "__main__":
    main()
