"""Run manifests and report emission (CSV and structured text).

Every emitted file embeds the manifest of the run that produced it. CSV
files carry it as leading '#' comment lines, minus the timestamp so that
repeated runs with identical inputs stay byte-identical; the timestamp
appears in text reports and in the per-run manifest.json.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


@dataclass(frozen=True)
class RunManifest:
    command: str
    spec_path: str | None = None
    overrides: dict = field(default_factory=dict)
    out_dir: str | None = None
    seed: int | None = None
    version: str = __version__
    timestamp: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def stable_items(self) -> list[tuple[str, str]]:
        items = [("command", self.command)]
        if self.spec_path is not None:
            items.append(("spec", self.spec_path))
        if self.overrides:
            items.append(("overrides", json.dumps(self.overrides, sort_keys=True)))
        if self.out_dir is not None:
            items.append(("out", self.out_dir))
        if self.seed is not None:
            items.append(("seed", str(self.seed)))
        items.append(("version", self.version))
        return items

    def comment_lines(self) -> list[str]:
        return [f"# {k}: {v}" for k, v in self.stable_items()]

    def text_header(self) -> list[str]:
        lines = [f"{k}: {v}" for k, v in self.stable_items()]
        lines.append(f"timestamp: {self.timestamp}")
        return lines

    def to_json(self) -> str:
        payload = dict(self.stable_items())
        payload["timestamp"] = self.timestamp
        return json.dumps(payload, indent=2) + "\n"


def fmt(value) -> str:
    """Shortest round-trip decimal for reals; str() for the rest."""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, manifest: RunManifest, header: list[str],
              rows: list[tuple]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as fh:
        for line in manifest.comment_lines():
            fh.write(line + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_text(path: Path, manifest: RunManifest, title: str,
               body: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [title, "=" * len(title), ""]
    lines += manifest.text_header()
    lines.append("")
    lines += body
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(out_dir: Path, manifest: RunManifest) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
