import logging
import os
from collections import namedtuple

from ..config import SCENARIO_KINDS, load_config
from ..utils.errors import ConfigError
from ..utils.file_io import PathManager

__all__ = ["ScenarioEntry", "ScenarioCatalog", "default_config_root"]

logger = logging.getLogger(__name__)

ScenarioEntry = namedtuple("ScenarioEntry", ["name", "kind", "topic", "anchor", "expect", "path"])


def default_config_root() -> str:
    """``configs/`` next to the package."""
    return os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))), "configs")


def _scan(root):
    for entry in sorted(PathManager.ls(root)):
        path = os.path.join(root, entry)
        if PathManager.isdir(path):
            yield from _scan(path)
        elif entry.endswith((".yaml", ".yml", ".json")) and not entry.startswith("Base-"):
            yield path


class ScenarioCatalog:
    """
    The bundled scenario configs under a root directory, ordered by kind and
    then by name. ``Base-*`` files only carry shared defaults and are skipped.
    """

    def __init__(self, root=None):
        self._root = root or default_config_root()
        self._entries = None

    @property
    def root(self):
        return self._root

    def _load(self):
        entries = []
        for path in _scan(self._root):
            try:
                cfg = load_config(path)
            except ConfigError as e:
                logger.warning(f"skipping {path}: {e}")
                continue
            entries.append(
                ScenarioEntry(
                    cfg.SCENARIO.NAME,
                    cfg.SCENARIO.KIND,
                    cfg.SCENARIO.TOPIC,
                    cfg.SCENARIO.ANCHOR,
                    cfg.SCENARIO.EXPECT,
                    path,
                )
            )
        order = {kind: i for i, kind in enumerate(SCENARIO_KINDS)}
        entries.sort(key=lambda e: (order.get(e.kind, len(order)), e.name))
        return entries

    @property
    def entries(self):
        if self._entries is None:
            self._entries = self._load()
        return self._entries

    def names(self):
        return [e.name for e in self.entries]

    def get(self, name) -> ScenarioEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(f"no bundled scenario named {name!r} under {self._root}")

    def paths(self):
        return [e.path for e in self.entries]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)
