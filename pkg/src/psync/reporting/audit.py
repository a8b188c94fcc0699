"""Append-only JSONL run log, one line per CLI invocation."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Mapping, Union


def utc_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


def audit_file(log_dir: Union[str, Path], command: str) -> Path:
    return Path(log_dir).expanduser() / f"psync.{command}.jsonl"


def write_audit_line(path: Path, payload: Mapping[str, Any]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(dict(payload), ensure_ascii=False) + "\n")


def read_audit_lines(path: Path) -> list[dict]:
    if not path.exists():
        return []
    rows = []
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows
