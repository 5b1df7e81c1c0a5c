"""
oracle: cross-check the approximations against independent computations
on a synthetic instance.

Checks:
  laplace_mc[S]     Laplace log-marginal vs slab importance sampling
  detailed_balance  pi(S) q(S'|S) a(S,S') == pi(S') q(S|S') a(S',S) on every neighbor pair
  chain_vs_exact    total variation between chain frequencies and enumeration
  c_dev             grid evaluation of the deviation constant vs the family value
"""
import logging
import math
from itertools import combinations
from typing import List

import numpy as np

from commands._common import add_family, add_seed, add_threads
from core.cache import FitCache
from core.config import get_settings
from core.glm import empirical_c_dev
from core.marginal import log_laplace_marginal, log_marginal_mc, log_posterior_weight
from core.sampler import (
    enumerate_exact, log_acceptance, neighborhood_size, sample_chain, total_variation,
)
from core.simulate import gen_design, gen_response, gen_theta0
from families import get_family
from models.data import Dataset, ModelSupport
from models.schemas import Hyperparams, OracleCheck, OracleReport, SimConfig
from services.reports import write_report

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("oracle", help="Laplace-vs-MC and chain-vs-enumeration checks")
    add_family(parser)
    parser.add_argument("--n", type=int, default=300, help="observations in the synthetic instance")
    parser.add_argument("--p", type=int, default=8, help="covariates in the synthetic instance")
    parser.add_argument("--s-max", dest="s_max", type=int, default=3, help="largest model size")
    parser.add_argument("--draws", type=int, default=None, help="Monte-Carlo draws (default GLMSEL_MC_DRAWS)")
    parser.add_argument("--mc-lambda", dest="mc_lambda", type=float, default=1.0,
                        help="slab scale for the Monte-Carlo check")
    parser.add_argument("--iters", type=int, default=200_000, help="chain iterations")
    parser.add_argument("--tv-tol", dest="tv_tol", type=float, default=0.05, help="total-variation tolerance")
    add_seed(parser)
    add_threads(parser)
    parser.add_argument("--output", "-o", default=None, help="optional JSON report path")


def synthetic_instance(family, n: int, p: int, s_max: int, seed) -> Dataset:
    s0 = min(2, s_max, p)
    cfg = SimConfig(
        family=family.name, n=n, p=p, s0=s0, signal_values=[1.0] * s0,
        hyperparams=Hyperparams(s_max=s_max),
    )
    rng = np.random.default_rng(seed)
    x = gen_design(cfg, rng)
    theta0, truth = gen_theta0(cfg, rng)
    logger.info(f"Synthetic instance: truth {truth}, theta0 {np.round(theta0[list(truth.indices)], 3).tolist()}")
    return Dataset(x, gen_response(family, x, theta0, rng))


def laplace_checks(data, family, cache, h, draws, rng) -> List[OracleCheck]:
    checks = []
    candidates = [ModelSupport.of([0]), ModelSupport.of([0, 1]), ModelSupport.of([0, 1, data.p - 1])]
    for s in candidates:
        s = ModelSupport.of(j for j in s if j < data.p)
        if s.size > h.s_max:
            continue
        fit = cache.fit(s)
        if not fit.converged:
            logger.warning(f"Skipping Laplace check for {s}: fit {fit.status.value}")
            continue
        estimate, std_err = log_marginal_mc(family, data, s, fit, h, draws, rng)
        gap = abs(log_laplace_marginal(fit, h) - estimate)
        tol = 3.0 * std_err + 0.05
        checks.append(OracleCheck(name=f"laplace_mc{s}", value=gap, tolerance=tol, passed=gap <= tol))
    return checks


def adjacent(s: ModelSupport, t: ModelSupport) -> bool:
    """One add, delete or swap apart."""
    diff = len(set(s.indices) ^ set(t.indices))
    return diff == 1 or (diff == 2 and s.size == t.size)


def detailed_balance_check(data, family, cache, h) -> OracleCheck:
    weights = {}
    for size in range(h.s_max + 1):
        for combo in combinations(range(data.p), size):
            s = ModelSupport(combo)
            weights[s] = log_posterior_weight(s, data, family, h, cache)

    worst = 0.0
    for s, w in weights.items():
        if not w.is_valid:
            continue
        log_q_s = -math.log(neighborhood_size(s, data.p, h.s_max))
        for t, v in weights.items():
            if t <= s or not v.is_valid or not adjacent(s, t):
                continue
            log_q_t = -math.log(neighborhood_size(t, data.p, h.s_max))
            forward = w.value + log_q_s + log_acceptance(w, v, log_q_s, log_q_t)
            backward = v.value + log_q_t + log_acceptance(v, w, log_q_t, log_q_s)
            worst = max(worst, abs(forward - backward))
    return OracleCheck(name="detailed_balance", value=worst, tolerance=1e-12, passed=worst <= 1e-12)


def run(args) -> int:
    family = get_family(args.family or "logistic")
    seed = args.seed or 0
    data_seed, mc_seed, chain_seed = np.random.SeedSequence(seed).spawn(3)
    data = synthetic_instance(family, args.n, args.p, args.s_max, data_seed)
    cache = FitCache(data, family)
    h = Hyperparams(s_max=args.s_max)

    checks = laplace_checks(
        data, family, cache, Hyperparams(s_max=args.s_max, lam=args.mc_lambda),
        args.draws or get_settings().mc_draws, np.random.default_rng(mc_seed),
    )
    checks.append(detailed_balance_check(data, family, cache, h))

    exact = enumerate_exact(data, family, h, cache)
    chain = sample_chain(data, family, h, args.iters, seed=chain_seed, cache=cache)
    tv = total_variation(chain.frequencies(), exact)
    checks.append(OracleCheck(name="chain_vs_exact", value=tv, tolerance=args.tv_tol, passed=tv <= args.tv_tol))

    c_dev = empirical_c_dev(family)
    checks.append(OracleCheck(name="c_dev", value=c_dev, tolerance=family.c_dev, passed=c_dev <= family.c_dev * (1.0 + 1e-9)))

    report = OracleReport(family=family.name, seed=seed, checks=checks)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.6g} (tolerance {c.tolerance:.6g})")
    if args.output:
        write_report(report, args.output)
    return 0 if report.passed else 1
