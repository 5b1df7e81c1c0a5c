"""Argument helpers shared by the subcommands."""
import json
from pathlib import Path
from typing import Type, TypeVar

from pydantic import BaseModel, ValidationError

from core.config import get_settings
from core.exceptions import ConfigError
from models.schemas import FamilyName

T = TypeVar("T", bound=BaseModel)


def add_family(parser, required: bool = False):
    parser.add_argument(
        "--family", choices=[f.value for f in FamilyName], required=required, help="GLM family",
    )


def add_seed(parser):
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 0)")


def add_threads(parser):
    parser.add_argument(
        "--threads", type=int, default=None,
        help=f"worker threads (default GLMSEL_THREADS={get_settings().threads})",
    )


def add_hyperparams(parser):
    group = parser.add_argument_group("hyperparameters")
    group.add_argument("--s-max", dest="s_max", type=int, help="largest model size")
    group.add_argument("--alpha", type=float, help="likelihood fraction in (0, 1]")
    group.add_argument("--lambda", dest="lam", type=float, help="slab precision scale")
    group.add_argument("--a4", type=float, help="size-penalty strength")
    group.add_argument("--a7", type=float, help="exponent in lambda = A6 * p^-A7 (constraint check only)")
    group.add_argument("--c-dev", dest="c_dev", type=float, help="override the family's C_dev")


def hyperparam_overrides(args) -> dict:
    keys = ("s_max", "alpha", "lam", "a4", "a7", "c_dev")
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def load_document(path: str, model: Type[T]) -> T:
    """Read a JSON config document and validate it against `model`."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        return model.model_validate(json.loads(text))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def resolve_threads(args, configured=None) -> int:
    return args.threads or configured or get_settings().threads
