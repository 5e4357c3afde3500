"""On-disk cache of computed series documents."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

from src import __version__
from src.models import TargetModel

logger = logging.getLogger(__name__)


class SeriesCache:
    """
    Stores rendered JSON documents under content-addressed file names.

    The key covers the resolved target, the command, the truncation, the
    insertion slice and the package version, so any change produces a miss.
    """

    def __init__(self, directory: Union[str, Path]):
        self.directory = Path(directory)

    def key(
        self,
        target: TargetModel,
        command: str,
        D: Any,
        T: int,
        insertions: Sequence[int] = (),
        extra: Optional[Mapping[str, Any]] = None,
    ) -> str:
        payload = {
            "target": target.spec_hash(),
            "command": command,
            "D": str(D),
            "T": T,
            "slice": list(insertions),
            "version": __version__,
            "extra": dict(extra or {}),
        }
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, key: str) -> Optional[str]:
        path = self._path(key)
        if not path.is_file():
            logger.debug("cache miss %s", key[:12])
            return None
        logger.debug("cache hit %s", key[:12])
        return path.read_text(encoding="utf-8")

    def put(self, key: str, text: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(path)
        logger.debug("cached %s", path)
        return path
