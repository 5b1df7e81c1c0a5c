"""
Report Service
Deterministic JSON serialization of report models.
"""
import logging
from pathlib import Path
from typing import Optional, Union

from pydantic import BaseModel

from core.config import get_settings

logger = logging.getLogger(__name__)


def render(report: BaseModel) -> str:
    """Stable JSON text: aliases, fixed key order, shortest round-trip floats."""
    return report.model_dump_json(by_alias=True, indent=2) + "\n"


def write_report(report: BaseModel, path: Optional[Union[str, Path]] = None) -> Path:
    path = Path(path or get_settings().report_path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render(report), encoding="utf-8")
    logger.info(f"Report written to {path}")
    return path
