"""Audio file manifests and directory ingestion."""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

from augnorm.core.audio_io import read_wav
from augnorm.core.errors import AudioFormatError, ConfigError, EmptyCorpusError

logger = logging.getLogger(__name__)

SourceKind = Literal["speech", "noise"]

MANIFEST_FORMAT_VERSION = 1
_CSV_FIELDS = ("utterance_id", "path", "kind", "duration_s", "sample_rate_hz")


@dataclass(frozen=True, slots=True)
class ManifestEntry:
    """One decodable source file."""

    utterance_id: str
    path: str
    kind: SourceKind
    duration_s: float
    sample_rate_hz: int

    def __post_init__(self) -> None:
        if not self.utterance_id:
            raise ValueError("utterance_id cannot be empty")
        if self.kind not in ("speech", "noise"):
            raise ValueError(f"kind must be speech or noise: {self.kind}")
        if self.duration_s <= 0:
            raise ValueError(f"duration_s must be positive: {self.duration_s}")
        if self.sample_rate_hz <= 0:
            raise ValueError(f"sample_rate_hz must be positive: {self.sample_rate_hz}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "utterance_id": self.utterance_id,
            "path": self.path,
            "kind": self.kind,
            "duration_s": self.duration_s,
            "sample_rate_hz": self.sample_rate_hz,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ManifestEntry:
        kind = str(data["kind"])
        if kind not in ("speech", "noise"):
            raise ValueError(f"kind must be speech or noise: {kind}")
        return cls(
            utterance_id=str(data["utterance_id"]),
            path=str(data["path"]),
            kind="speech" if kind == "speech" else "noise",
            duration_s=float(data["duration_s"]),
            sample_rate_hz=int(data["sample_rate_hz"]),
        )


@dataclass(frozen=True, slots=True)
class RejectedFile:
    """A file ingestion could not use, with the reason."""

    path: str
    reason: str


@dataclass(frozen=True, slots=True)
class Manifest:
    """Validated list of source files with unique ids and one sample rate.

    Attributes:
        entries: Source files in ingestion order.
        format_version: On-disk format version.
        rejected: Files skipped during ingestion (not persisted).
    """

    entries: tuple[ManifestEntry, ...]
    format_version: int = MANIFEST_FORMAT_VERSION
    rejected: tuple[RejectedFile, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        ids = [e.utterance_id for e in self.entries]
        if len(ids) != len(set(ids)):
            raise ValueError("Manifest utterance ids must be unique")
        rates = {e.sample_rate_hz for e in self.entries}
        if len(rates) > 1:
            raise ValueError(f"Manifest mixes sample rates: {sorted(rates)}")

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ManifestEntry]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> ManifestEntry:
        return self.entries[index]

    @property
    def sample_rate_hz(self) -> int | None:
        return self.entries[0].sample_rate_hz if self.entries else None

    @property
    def total_duration_s(self) -> float:
        return sum(e.duration_s for e in self.entries)

    def save(self, path: Path | str) -> Path:
        """Write as JSON lines (header line first) or CSV, chosen by suffix.

        Raises:
            ConfigError: If the suffix is unsupported or the write fails.
        """
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            if path.suffix == ".jsonl":
                with open(path, "w", encoding="utf-8") as f:
                    header = {"format_version": self.format_version, "count": len(self.entries)}
                    f.write(json.dumps(header, separators=(",", ":")) + "\n")
                    for entry in self.entries:
                        f.write(json.dumps(entry.to_dict(), separators=(",", ":")) + "\n")
            elif path.suffix == ".csv":
                with open(path, "w", encoding="utf-8", newline="") as f:
                    writer = csv.DictWriter(f, fieldnames=_CSV_FIELDS)
                    writer.writeheader()
                    for entry in self.entries:
                        writer.writerow(entry.to_dict())
            else:
                raise ConfigError(f"Unsupported manifest extension: {path.suffix}")
        except OSError as e:
            raise ConfigError(f"Failed to write manifest {path}: {e}") from e
        return path

    @classmethod
    def load(cls, path: Path | str) -> Manifest:
        """Read a manifest written by :meth:`save`.

        Raises:
            ConfigError: If the file is missing, malformed, or of another version.
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Manifest not found: {path}")
        try:
            if path.suffix == ".jsonl":
                with open(path, encoding="utf-8") as f:
                    lines = [line for line in f.read().splitlines() if line.strip()]
                if not lines:
                    raise ConfigError(f"Manifest {path} is empty")
                header = json.loads(lines[0])
                version = int(header.get("format_version", 0))
                if version != MANIFEST_FORMAT_VERSION:
                    raise ConfigError(f"Unsupported manifest version {version} in {path}")
                entries = tuple(ManifestEntry.from_dict(json.loads(line)) for line in lines[1:])
            elif path.suffix == ".csv":
                with open(path, encoding="utf-8", newline="") as f:
                    entries = tuple(ManifestEntry.from_dict(row) for row in csv.DictReader(f))
            else:
                raise ConfigError(f"Unsupported manifest extension: {path.suffix}")
            return cls(entries)
        except ConfigError:
            raise
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Failed to read manifest {path}: {e}") from e


def _candidate_files(paths: Iterable[Path | str]) -> list[Path]:
    files: list[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            files.extend(sorted(p for p in path.rglob("*") if p.suffix.lower() == ".wav"))
        else:
            files.append(path)
    return files


def ingest(
    paths: Iterable[Path | str],
    kind: SourceKind = "speech",
    sample_rate_hz: int = 16000,
) -> Manifest:
    """Build a manifest from WAV files and directories (searched recursively).

    Every file is decoded once. Undecodable, multichannel or wrong-rate files
    are collected in ``Manifest.rejected`` with a reason; repeated ids keep
    the first occurrence.

    Args:
        paths: Files and/or directories.
        kind: Role of every ingested file.
        sample_rate_hz: Required sample rate.

    Returns:
        The validated manifest.

    Raises:
        EmptyCorpusError: If no usable file was found.
    """
    entries: list[ManifestEntry] = []
    rejected: list[RejectedFile] = []
    seen: dict[str, Path] = {}

    for path in _candidate_files(paths):
        utterance_id = path.stem
        resolved = path.resolve()
        if utterance_id in seen:
            if seen[utterance_id] == resolved:
                logger.warning(f"Duplicate file {path} listed more than once; keeping one entry")
            else:
                logger.warning(
                    f"Duplicate id {utterance_id!r}: {path} ignored, keeping {seen[utterance_id]}"
                )
            continue
        try:
            w = read_wav(path, sample_rate_hz)
        except AudioFormatError as e:
            logger.warning(f"Skipping {path}: {e}")
            rejected.append(RejectedFile(str(path), str(e)))
            continue
        if len(w) == 0:
            logger.warning(f"Skipping {path}: no samples")
            rejected.append(RejectedFile(str(path), "no samples"))
            continue
        seen[utterance_id] = resolved
        entries.append(
            ManifestEntry(utterance_id, str(resolved), kind, w.duration_s, w.sample_rate_hz)
        )

    if not entries:
        raise EmptyCorpusError(
            f"No usable {kind} audio found ({len(rejected)} file(s) rejected)"
        )
    return Manifest(tuple(entries), rejected=tuple(rejected))
