"""
fit: posterior model search on a CSV dataset.
"""
import logging

from pydantic import ValidationError

from commands._common import (
    add_family, add_hyperparams, add_seed, add_threads, hyperparam_overrides, load_document,
    resolve_threads,
)
from core.cache import FitCache
from core.config import get_settings
from core.exceptions import ConfigError, DataValidationError
from core.prior import check_hyperparams
from core.sampler import run_chains
from families import get_family
from models.schemas import FitReport, RunConfig
from services.datasets import load_dataset, parse_support
from services.reports import write_report

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("fit", help="sample the model posterior for a dataset")
    parser.add_argument("--config", help="JSON run configuration (flags override it)")
    parser.add_argument("--data", help="CSV file with a header row")
    parser.add_argument("--response", help="name of the response column")
    add_family(parser)
    add_hyperparams(parser)
    parser.add_argument("--iters", type=int, help="iterations per chain")
    parser.add_argument("--burnin", type=int, help="burn-in iterations per chain (default iters // 10)")
    parser.add_argument("--chains", type=int, help="number of independent chains")
    parser.add_argument("--init", help="starting support, e.g. '0,4,9' (default empty)")
    parser.add_argument("--top-k", dest="top_k", type=int, help="models listed in the report")
    add_seed(parser)
    add_threads(parser)
    parser.add_argument("--output", "-o", help=f"report path (default {get_settings().report_path})")


def build_config(args) -> RunConfig:
    cfg = load_document(args.config, RunConfig) if args.config else RunConfig()
    doc = cfg.model_dump()
    for key in ("data", "response", "family", "output", "threads"):
        if getattr(args, key, None) is not None:
            doc[key] = getattr(args, key)
    doc["hyperparams"].update(hyperparam_overrides(args))
    chain_flags = {"n_iter": args.iters, "n_burnin": args.burnin, "n_chains": args.chains,
                   "seed": args.seed, "top_k": args.top_k}
    doc["chain"].update({k: v for k, v in chain_flags.items() if v is not None})
    if args.init is not None:
        doc["chain"]["init"] = list(parse_support(args.init).indices)
    try:
        cfg = RunConfig.model_validate(doc)
    except ValidationError as e:
        raise ConfigError(str(e)) from e
    if not cfg.data or not cfg.response:
        raise ConfigError("both --data and --response are required (flag or config)")
    return cfg


def run(args) -> int:
    cfg = build_config(args)
    family = get_family(cfg.family)
    data = load_dataset(cfg.data, cfg.response, family)
    try:
        h = cfg.hyperparams.validate_for(data.n, data.p)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    if cfg.chain.init and cfg.chain.init[-1] >= data.p:
        raise DataValidationError(f"--init index {cfg.chain.init[-1]} out of range for p={data.p}")

    check = check_hyperparams(h, data.p, c_dev=h.c_dev or family.c_dev)
    threads = resolve_threads(args, cfg.threads)
    logger.info(
        f"Fitting {family.name} model: n={data.n}, p={data.p}, s_max={h.s_max}, "
        f"{cfg.chain.n_chains} chain(s) x {cfg.chain.n_iter} iterations, seed {cfg.chain.seed}"
    )

    cache = FitCache(data, family)
    summary, _, digests = run_chains(data, family, h, cfg.chain, cache, threads)
    report = FitReport(
        family=family.name,
        n=data.n,
        p=data.p,
        labels=list(data.labels),
        seed=cfg.chain.seed,
        config=cfg.model_dump(mode="json", by_alias=True, exclude={"threads"}),
        hyperparam_check=check,
        summary=summary,
        chains=digests,
    )
    path = write_report(report, cfg.output)
    print(f"report: {path}")
    return 0
