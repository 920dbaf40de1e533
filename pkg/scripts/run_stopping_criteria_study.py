#!/usr/bin/env python3
"""Stopping-criterion study on the 2D benchmark.

Runs the surrogate-accelerated strategy twice, once per residual measure
(relative residual vs normwise backward error), and reports how often the
forward and adjoint surrogates were accepted. Writes one CSV log per run so
the report tool can plot the surrogate measures against their threshold.
"""

import argparse
import os

from heatopt.config import preset_config
from heatopt.driver import run_optimization
from heatopt.io import append_log, format_summary
from heatopt.krylov import MOR


def acceptance_rate(history, equation):
    used = sum(1 for rec in history if getattr(rec, equation).solver_kind == MOR)
    return used / max(len(history), 1)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cells", type=int, default=90, help="cells per side")
    parser.add_argument("--iterations", type=int, default=250)
    parser.add_argument("--out", default="out/stopping-criteria")
    args = parser.parse_args()

    base = preset_config("paper-2d").with_updates(
        dims=(args.cells, args.cells),
        max_iterations=args.iterations,
        strategy_name="mor_mgcg",
    )
    cases = {
        "w1": base.with_updates(criterion="w1", tau_mor=5e-3, max_cg_iters=400),
        "w2": base.with_updates(criterion="w2", tau_mor=1e-6),
    }

    os.makedirs(args.out, exist_ok=True)
    for name, cfg in cases.items():
        log_path = os.path.join(args.out, f"{name}.csv")
        if os.path.exists(log_path):
            os.remove(log_path)
        result = run_optimization(cfg, log_sink=lambda rec: append_log(rec, log_path))
        print(f"--- criterion {name} (tau_mor = {cfg.tau_mor:g}) ---")
        print(format_summary(result, cfg.label, cfg.strategy_name))
        print(
            f"surrogate acceptance: forward {acceptance_rate(result.history, 'forward'):.1%}, "
            f"adjoint {acceptance_rate(result.history, 'adjoint'):.1%}"
        )
        print(f"log written to {log_path}\n")


if __name__ == "__main__":
    main()
