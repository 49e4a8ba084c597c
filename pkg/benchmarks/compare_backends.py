"""Compare the compiled kernel against the pure-Python samplers.

Both backends consume the same bits, so each pair of runs must agree on every
meter; the script checks that and reports wall-clock per output step.

    python3 benchmarks/compare_backends.py --length 20000 --trials 20
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from pathsampler import engine
from pathsampler.randomness import BitSource

DEFAULT_SAMPLERS = ("motzkin-positive", "motzkin-excursion", "colored-positive",
                    "schroeder-positive", "schroeder-excursion", "little-positive",
                    "florentine-motzkin")


def time_backend(name, n, trials, seed, backend, c):
    stats = []
    t0 = time.perf_counter()
    for t in range(trials):
        stats.append(engine.run_stats(name, n, BitSource(seed, trial=t), c, backend=backend))
    return time.perf_counter() - t0, stats


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", "-n", type=int, default=20000)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--samplers", nargs="*", default=list(DEFAULT_SAMPLERS))
    ap.add_argument("--json", action="store_true", help="print one JSON object instead of a table")
    args = ap.parse_args(argv)

    if "cython" not in engine.available_backends():
        print("compiled core not built; nothing to compare", file=sys.stderr)
        return 1

    rows = []
    for name in args.samplers:
        c = 2 if engine.get_spec(name).colored else None
        tp, sp = time_backend(name, args.length, args.trials, args.seed, "python", c)
        tc, sc = time_backend(name, args.length, args.trials, args.seed, "cython", c)
        same = all(vars(a) == vars(b) for a, b in zip(sp, sc))
        steps = sum(s.steps for s in sp)
        rows.append({
            "sampler": name,
            "python_ns_per_step": 1e9 * tp / steps,
            "cython_ns_per_step": 1e9 * tc / steps,
            "speedup": tp / tc,
            "identical_meters": same,
        })

    if args.json:
        print(json.dumps({"n": args.length, "trials": args.trials, "rows": rows}, indent=2))
    else:
        print(f"n={args.length} trials={args.trials}")
        print(f"{'sampler':22s} {'python ns/step':>15s} {'cython ns/step':>15s} {'speedup':>8s}  same")
        for r in rows:
            print(f"{r['sampler']:22s} {r['python_ns_per_step']:15.1f} {r['cython_ns_per_step']:15.1f} "
                  f"{r['speedup']:8.1f}  {r['identical_meters']}")
    return 0 if all(r["identical_meters"] for r in rows) else 2


if __name__ == "__main__":
    sys.exit(main())
