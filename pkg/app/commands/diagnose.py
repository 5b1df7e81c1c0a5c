"""
diagnose: theoretical quantities for a dataset, a true parameter and candidate supports.
"""
import logging

import numpy as np

from commands._common import add_family, add_seed
from core.diagnostics import build_report
from core.exceptions import DataValidationError
from families import get_family
from models.data import support_of
from services.datasets import load_dataset, parse_support, parse_vector
from services.reports import write_report

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("diagnose", help="compute diagnostics for supplied supports")
    parser.add_argument("--data", required=True, help="CSV file with a header row")
    parser.add_argument("--response", required=True, help="name of the response column")
    add_family(parser, required=True)
    parser.add_argument("--theta0", required=True, help="true parameter: comma-separated values or a file")
    parser.add_argument(
        "--support", action="append", default=[],
        help="candidate support, e.g. '0,3' (repeatable; default: the support of theta0)",
    )
    parser.add_argument("--s-level", dest="s_levels", type=int, action="append", default=[],
                        help="sparsity level for compatibility numbers (repeatable)")
    parser.add_argument("--quad-directions", type=int, default=0,
                        help="random directions for the quadratic-expansion residual")
    add_seed(parser)
    parser.add_argument("--output", "-o", default="glmsel_diagnostics.json", help="report path")


def run(args) -> int:
    family = get_family(args.family)
    data = load_dataset(args.data, args.response, family)
    theta0 = parse_vector(args.theta0)
    if theta0.shape[0] != data.p:
        raise DataValidationError(f"theta0 has {theta0.shape[0]} entries, dataset has p={data.p}")

    supports = [parse_support(s).check_bounds(data.p) for s in args.support] or [support_of(theta0)]
    rng = np.random.default_rng(args.seed or 0)
    report = build_report(
        family, data, theta0, supports,
        s_levels=args.s_levels, rng=rng, quad_directions=args.quad_directions,
    )
    path = write_report(report, args.output)
    print(f"{len(report.supports)} support(s) diagnosed, report: {path}")
    return 0
