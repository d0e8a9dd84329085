"""Capability registry, discovered from the plugin directories under capabilities/.

A plugin directory holds `contract.v1.json` (whose `name` is the capability
id) and an `__init__.py` naming the entry point. Entry points are imported on
first call, so `agm fmt` never loads the interpreter and `agm check` never
loads the testkit.
"""
from __future__ import annotations

import importlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

logger = logging.getLogger(__name__)

CAPABILITIES_DIR = Path(__file__).resolve().parents[1] / "capabilities"
CONTRACT_FILE = "contract.v1.json"


@dataclass
class Plugin:
    capability_id: str
    directory: Path
    entry_module: str
    entry_attr: str
    contract: Dict[str, Any]
    _entry: Optional[Callable[..., Any]] = field(default=None, repr=False)

    def __call__(self, **kwargs: Any) -> Any:
        if self._entry is None:
            self._entry = getattr(importlib.import_module(self.entry_module), self.entry_attr)
        return self._entry(**kwargs)


def _load(child: Path) -> Optional[Plugin]:
    contract_path = child / CONTRACT_FILE
    if not contract_path.is_file() or not (child / "__init__.py").is_file():
        return None
    contract = json.loads(contract_path.read_text(encoding="utf-8"))
    capability_id = contract.get("name")
    if not capability_id:
        logger.warning("%s: contract has no name; skipped", child.name)
        return None
    try:
        declaration = importlib.import_module(f"capabilities.{child.name}")
    except Exception:
        logger.warning("%s: plugin declaration failed to import; skipped", child.name, exc_info=True)
        return None
    declared = getattr(declaration, "CAPABILITY_ID", capability_id)
    if declared != capability_id:
        logger.warning("%s: CAPABILITY_ID %r does not match contract %r; skipped", child.name, declared, capability_id)
        return None
    module = getattr(declaration, "ENTRY_POINT_MODULE", None)
    attr = getattr(declaration, "ENTRY_POINT_ATTR", None)
    if not module or not attr:
        logger.warning("%s: no entry point declared; skipped", child.name)
        return None
    return Plugin(capability_id, child, module, attr, contract)


def discover(directory: Path = CAPABILITIES_DIR) -> List[Plugin]:
    """Plugins in directory order; helper modules and incomplete directories are ignored."""
    if not directory.is_dir():
        return []
    plugins = [p for p in (_load(child) for child in sorted(directory.iterdir()) if child.is_dir()) if p]
    logger.debug("discovered %d capability plugin(s)", len(plugins))
    return plugins


PLUGINS = {plugin.capability_id: plugin for plugin in discover()}
REGISTRY: Dict[str, Callable[..., Any]] = dict(PLUGINS)
CONTRACTS: Dict[str, Dict[str, Any]] = {cid: plugin.contract for cid, plugin in PLUGINS.items()}
