"""Wall-clock comparison of the compiled and pure-Python integration backends.

Usage: python3 benchmarks/bench_integrator.py [--repeat N] [--format csv|json]

Each workload is integrated with both backends; the table reports the best
of N timings, the speedup and the largest state difference between them.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from avdlab.dynamics import make_spec
from avdlab.integrator import IntegratorConfig, compiled_available, integrate
from avdlab.problems import builtin_problem
from avdlab.schedules import parse_schedule

QUAD = builtin_problem("quadratic", (1, 2, 1, 0, 1))
ZERO = builtin_problem("zero")

# (label, spec, x0, v0, horizon, integrator config)
WORKLOADS = [
    ("case1 alpha=3, log_inv, t<=1e4, step 0.5",
     make_spec("AVD_alpha_eps", ZERO, parse_schedule("log_inv"), alpha=3), [1.0], [0.0], 1e4,
     IntegratorConfig(sample_times=tuple(np.arange(1.5, 1e4, 0.5)))),
    ("case2 alpha=3, power:1, t<=1e5",
     make_spec("AVD_alpha_eps", ZERO, parse_schedule("power:1"), alpha=3), [1.0], [0.0], 1e5,
     IntegratorConfig(samples_per_decade=4000)),
    ("case4 alpha=4, power:3, t<=1e4",
     make_spec("AVD_alpha_eps", ZERO, parse_schedule("power:3"), alpha=4), [1.0], [0.0], 1e4,
     IntegratorConfig()),
    ("quadratic alpha=4, power:3, t<=1e4",
     make_spec("AVD_alpha_eps", QUAD, parse_schedule("power:3"), alpha=4), [0.0, 1.0], [0.0, 0.0], 1e4,
     IntegratorConfig()),
    ("hbf gamma=3, power:1, t<=100",
     make_spec("HBF_eps", ZERO, parse_schedule("power:1"), gamma=3.0), [1.0], [0.0], 100.0,
     IntegratorConfig()),
]


def _best(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--format", choices=("csv", "json"), default="csv")
    args = ap.parse_args(argv)
    if not compiled_available():
        print("compiled backend not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    rows = []
    for label, spec, x0, v0, T, cfg in WORKLOADS:
        tc, rc = _best(lambda: integrate(spec, x0, v0, T, cfg, backend="compiled"), args.repeat)
        tp, rp = _best(lambda: integrate(spec, x0, v0, T, cfg, backend="python"), args.repeat)
        diff = float(np.max(np.abs(rc.xs - rp.xs)))
        rows.append({"workload": label, "steps": rc.step_stats.accepted, "compiled_s": tc,
                     "python_s": tp, "speedup": tp / tc, "max_state_diff": diff})
    if args.format == "json":
        print(json.dumps(rows, indent=2))
    else:
        print(f"{'workload':40s} {'steps':>8s} {'compiled s':>11s} {'python s':>10s} {'speedup':>8s} {'max diff':>9s}")
        for r in rows:
            print(f"{r['workload']:40s} {r['steps']:8d} {r['compiled_s']:11.4f} {r['python_s']:10.3f} "
                  f"{r['speedup']:8.0f} {r['max_state_diff']:9.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
