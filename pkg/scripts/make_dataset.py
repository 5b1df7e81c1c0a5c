"""
Synthetic Dataset Writer
Writes a simulated CSV (covariates x0..x{p-1} plus response y) for trying `fit`,
and prints the true parameter so `diagnose --theta0` can be run on it.
"""
import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "app"))

from core.simulate import gen_design, gen_response, gen_theta0  # noqa: E402
from families import get_family  # noqa: E402
from models.data import Dataset  # noqa: E402
from models.schemas import Hyperparams, SimConfig  # noqa: E402
from services.datasets import save_dataset  # noqa: E402

# Defaults
N = 200
P = 20
S0 = 3
SIGNAL = 1.0


def main():
    parser = argparse.ArgumentParser(description="Write a simulated GLM dataset as CSV")
    parser.add_argument("output", help="CSV path")
    parser.add_argument("--family", default="logistic", choices=["logistic", "poisson"])
    parser.add_argument("--n", type=int, default=N)
    parser.add_argument("--p", type=int, default=P)
    parser.add_argument("--s0", type=int, default=S0)
    parser.add_argument("--signal", type=float, default=SIGNAL, help="magnitude of every true coefficient")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    cfg = SimConfig(
        family=args.family, n=args.n, p=args.p, s0=args.s0,
        signal_values=[args.signal] * args.s0,
        hyperparams=Hyperparams(s_max=max(args.s0, 1)),
    )
    rng = np.random.default_rng(args.seed)
    x = gen_design(cfg, rng)
    theta0, truth = gen_theta0(cfg, rng)
    y = gen_response(get_family(args.family), x, theta0, rng)
    save_dataset(args.output, Dataset(x, y))

    print(f"true support: {truth}")
    print("theta0: " + ",".join(repr(float(v)) for v in theta0))


if __name__ == "__main__":
    main()
