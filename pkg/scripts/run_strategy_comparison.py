#!/usr/bin/env python3
"""Solver-strategy comparison on the 3D benchmark at a configurable scale.

Runs the full-accuracy and one-shot strategies with and without the reduced
surrogates, writes one CSV per strategy, and prints a comparison table of
final objective, linear-solver wall time, speedup against the first strategy,
and surrogate usage counts.
"""

import argparse
import os

from heatopt.config import preset_config
from heatopt.driver import run_optimization
from heatopt.io import append_log

STRATEGIES = ("mgcg", "mor_mgcg", "mgcg1", "mor_mgcg1")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells", type=int, default=48, help="cells per side")
    parser.add_argument("--iterations", type=int, default=250)
    parser.add_argument("--r-max", type=int, default=2, help="surrogate window size")
    parser.add_argument("--strategies", nargs="+", default=list(STRATEGIES),
                        choices=STRATEGIES)
    parser.add_argument("--out", default="out/strategy-comparison")
    args = parser.parse_args()

    base = preset_config("paper-3d").with_updates(
        dims=(args.cells,) * 3,
        max_iterations=args.iterations,
        r_max_forward=args.r_max,
        r_max_adjoint=args.r_max,
    )

    os.makedirs(args.out, exist_ok=True)
    rows = []
    for name in args.strategies:
        cfg = base.with_updates(strategy_name=name)
        log_path = os.path.join(args.out, f"{name}.csv")
        if os.path.exists(log_path):
            os.remove(log_path)
        print(f"running {name} at {args.cells}^3, {args.iterations} iterations ...")
        result = run_optimization(cfg, log_sink=lambda rec: append_log(rec, log_path))
        solver_time = sum(
            rec.forward.solve_time + rec.adjoint.solve_time for rec in result.history
        )
        rows.append(
            (name, result.final_objective, solver_time,
             result.forward_reductions, result.adjoint_reductions)
        )

    reference_time = rows[0][2]
    print(f"\n{'strategy':<12} {'objective':>14} {'solver time [s]':>16} "
          f"{'speedup':>8} {'fwd red':>8} {'adj red':>8}")
    for name, obj, t_solve, red_f, red_a in rows:
        print(f"{name:<12} {obj:>14.2f} {t_solve:>16.2f} "
              f"{reference_time / t_solve:>8.2f} {red_f:>8d} {red_a:>8d}")
    print(f"\nlogs written to {args.out}/<strategy>.csv")


if __name__ == "__main__":
    main()
