"""Recompute the shipped warm-start schedules from the benchmark suite.

Runs the exhaustive level-2 grid search on the first --count suite
instances for each mixer and rewrites both the packaged warmup defaults
and the warmup block of the packaged default config.  Run after changing
the benchmark set, the objective defaults, or the grid resolution.
"""

import argparse
import json
import time
from pathlib import Path

from rnaqaoa.instances import load_benchmark
from rnaqaoa.qaoa import warmup_parameters
from rnaqaoa.qubo import QuboParams

DATA = Path(__file__).resolve().parents[1] / "src/rnaqaoa/data"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=20)
    parser.add_argument("--grid-points", type=int, default=16)
    args = parser.parse_args()

    instances = load_benchmark("regular")[: args.count]
    print(f"calibrating on {len(instances)} instances, grid {args.grid_points}^4")
    warmup = {}
    for mixer in ("x", "parity_xy"):
        t0 = time.time()
        schedule = warmup_parameters(
            instances, QuboParams(), mixer, grid_points=args.grid_points
        )
        warmup[mixer] = {
            "betas": list(schedule.betas),
            "gammas": list(schedule.gammas),
        }
        print(f"{mixer}: {warmup[mixer]} ({time.time() - t0:.0f}s)")

    defaults_path = DATA / "warmup_defaults.json"
    defaults_path.write_text(json.dumps(warmup, indent=2) + "\n")
    config_path = DATA / "default_config.json"
    config = json.loads(config_path.read_text())
    config["warmup"] = warmup
    config_path.write_text(json.dumps(config, indent=2) + "\n")
    print(f"updated {defaults_path} and {config_path}")


if __name__ == "__main__":
    main()
