"""
Commands Package
Automatically discovers and registers every subcommand module in this directory.

To add a subcommand:
  1. Create a new .py file in this folder.
  2. Define `register(subparsers)` adding its parser, and `run(args) -> int`.
  3. It is picked up automatically by main.py.
"""
import importlib
import logging
import pkgutil
import traceback
from pathlib import Path
from types import ModuleType
from typing import Dict

logger = logging.getLogger(__name__)

COMMAND_REGISTRY: Dict[str, ModuleType] = {}

for _, module_name, _ in pkgutil.iter_modules([str(Path(__file__).parent)]):
    if module_name.startswith("_"):
        continue
    try:
        module = importlib.import_module(f".{module_name}", package=__name__)
        if hasattr(module, "register") and hasattr(module, "run"):
            COMMAND_REGISTRY[module_name] = module
            logger.debug(f"Registered command: {module_name}")
        else:
            logger.warning(f"Command module '{module_name}' lacks register()/run(), skipped")
    except Exception as e:
        logger.error(f"Failed to load command module '{module_name}': {e}\n{traceback.format_exc()}")

if not COMMAND_REGISTRY:
    logger.error("No commands were registered! Check for import errors in the commands/ package.")
