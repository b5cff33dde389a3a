# app/services/reports.py
"""
Report serialization for the command line: JSON with an embedded run
manifest, aligned text tables and CSV.

The manifest timestamp honours SOURCE_DATE_EPOCH so that reruns can be made
byte-identical.
"""
import csv
import hashlib
import io
import json
import math
import os
from datetime import datetime, timezone
from typing import Any, Dict, List, Mapping, Optional, Sequence

from pydantic import BaseModel

from app.core.config import settings
from app.schemas.reports import RunManifest


def digest(content: bytes) -> str:
    return "sha256:" + hashlib.sha256(content).hexdigest()


def run_timestamp() -> datetime:
    """SOURCE_DATE_EPOCH when set, else the configured epoch; never the wall clock"""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    seconds = int(epoch) if epoch else settings.MANIFEST_EPOCH
    return datetime.fromtimestamp(seconds, tz=timezone.utc)


def build_manifest(
    argv: Sequence[str],
    seed: Optional[int] = None,
    inputs: Optional[Mapping[str, bytes]] = None,
) -> RunManifest:
    return RunManifest(
        command=" ".join(argv),
        seed=seed,
        version=settings.VERSION,
        timestamp=run_timestamp(),
        input_digests={name: digest(content) for name, content in sorted((inputs or {}).items())},
    )


def _plain(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    if isinstance(payload, list):
        return [_plain(item) for item in payload]
    return payload


def to_json(payload: Any, manifest: Optional[RunManifest] = None) -> str:
    """Full-precision JSON; infinities are written as Infinity"""
    document: Dict[str, Any] = {"report": _plain(payload)}
    if manifest is not None:
        document["manifest"] = manifest.model_dump(mode="json")
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def json_line(payload: BaseModel) -> str:
    return json.dumps(payload.model_dump(mode="json"), sort_keys=True)


def manifest_line(manifest: RunManifest) -> str:
    return json.dumps({"manifest": manifest.model_dump(mode="json")}, sort_keys=True)


def probability(value: Optional[float]) -> str:
    return "" if value is None else f"{value:.4f}"


def events(value: Optional[float]) -> str:
    """Expected events as whole events, rounded up"""
    if value is None:
        return ""
    if math.isinf(value):
        return "inf"
    return str(math.ceil(value - 1e-9))


def number(value: Optional[float]) -> str:
    return "" if value is None else f"{value:g}"


def ratio(value: float) -> str:
    """Thresholds below one print as 1/k"""
    if 0 < value < 1:
        return f"1/{1.0 / value:g}"
    return f"{value:g}"


def to_table(headers: List[str], rows: List[List[str]], manifest: Optional[RunManifest] = None) -> str:
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = []
    if manifest is not None:
        lines.append(f"# {manifest.command}")
        lines.append(f"# version {manifest.version} seed {manifest.seed} at {manifest.timestamp.isoformat()}")
        for name, value in manifest.input_digests.items():
            lines.append(f"# {name} {value}")
    lines.append("  ".join(h.rjust(w) for h, w in zip(headers, widths)))
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def to_csv(headers: List[str], rows: List[List[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(headers)
    writer.writerows(rows)
    return buffer.getvalue()
