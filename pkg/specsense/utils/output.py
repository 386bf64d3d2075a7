"""CSV/JSON rendering and run manifests."""

import csv
import hashlib
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from pydantic import BaseModel, Field, field_validator

from specsense.__version__ import __version__

MANIFEST_SUFFIX = ".manifest.json"


class RunManifest(BaseModel):
    """Everything needed to rerun a command and check its outputs."""

    command: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: Optional[int] = None
    results: Dict[str, Any] = Field(default_factory=dict)
    artifact_version: str = __version__
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    outputs: Dict[str, str] = Field(default_factory=dict)

    @field_validator("command")
    def validate_command(cls, v: str) -> str:
        """Validate command name is present."""
        if not v.strip():
            raise ValueError("Manifest command cannot be empty")
        return v


def format_float(value: float) -> str:
    """Round-trip safe decimal text (17 significant digits)."""
    return format(float(value), ".17g")


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as CSV text with a fixed header and ``\\n`` line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"Row has {len(row)} cells, header has {len(header)}")
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def render_csv_comments(values: Dict[str, Any]) -> str:
    """Render scalars as ``# name,value`` lines to follow a CSV table."""
    return "".join(f"# {name},{_cell(value)}\n" for name, value in values.items())


def render_json(payload: Dict[str, Any]) -> str:
    """Render a JSON document with stable key order."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def sha256_text(text: str) -> str:
    """Hex SHA-256 of UTF-8 text."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_text(text: str, path: Optional[str] = None) -> None:
    """Write text to ``path``, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8", newline="") as f:
        f.write(text)


def manifest_path_for(output_path: str) -> Path:
    """Sidecar path next to an output file."""
    return Path(f"{output_path}{MANIFEST_SUFFIX}")


def write_manifest_sidecar(manifest: RunManifest, output_path: str) -> Path:
    """Write ``<output>.manifest.json`` and return its path."""
    path = manifest_path_for(output_path)
    write_text(render_json(manifest.model_dump(mode="json")), str(path))
    return path


def rows_to_records(header: Sequence[str], rows: List[Sequence[Any]]) -> List[Dict[str, Any]]:
    """Zip rows with a header for JSON output."""
    return [dict(zip(header, row)) for row in rows]
