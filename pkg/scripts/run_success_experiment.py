#!/usr/bin/env python3
"""Run the success-probability experiment and write CSV + plot script.

Examples:
    python scripts/run_success_experiment.py --out runs/desk
    python scripts/run_success_experiment.py --preset full --threads 8 --out runs/full
    python scripts/run_success_experiment.py --config my_config.json --out runs/custom
"""

import argparse
import json
import sys
import time
from pathlib import Path

from structcs.bench import (
    ExperimentConfig,
    desk_preset,
    full_preset,
    success_curve,
    write_plot_script,
)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--preset", choices=["desk", "full"], default="desk")
    parser.add_argument("--config", help="experiment config JSON file")
    parser.add_argument("--out", required=True)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--master-seed", type=int, default=0)
    parser.add_argument("--trials", type=int)
    args = parser.parse_args(argv)

    if args.config:
        config = ExperimentConfig(**json.loads(Path(args.config).read_text()))
    else:
        preset = full_preset if args.preset == "full" else desk_preset
        overrides = {"master_seed": args.master_seed}
        if args.trials:
            overrides["trials"] = args.trials
        config = preset(**overrides)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.time()
    curve = success_curve(
        config,
        threads=args.threads,
        cache_path=out / "cache.json",
        progress=lambda kind, n, s: print(
            f"  {kind:>16s} n={n:<4d} {s}/{config.trials}", flush=True
        ),
    )
    curve.write_csv(out / "curve.csv")
    (out / "config-echo.json").write_text(
        json.dumps(config.__dict__, indent=2, sort_keys=True, default=list) + "\n"
    )
    write_plot_script(out / "plot.gp", kinds=config.kinds)
    print(f"done in {time.time() - start:.0f}s -> {out / 'curve.csv'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
