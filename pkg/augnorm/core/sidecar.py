"""Per-pair JSON sidecars that make synthesized examples reproducible.

A sidecar records every random decision of an example (both filters, SNR,
level, noise crop offset, seed) rather than only the seed, together with the
VAD and framing used and the source file paths.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from augnorm.core.audio_io import read_wav, write_wav
from augnorm.core.augment import AugmentSpec, ExampleProvenance, MixedExample, synthesize_example
from augnorm.core.config import FrameConfig, VadConfig
from augnorm.core.errors import AugnormError

logger = logging.getLogger(__name__)

SIDECAR_SCHEMA_VERSION = 1


@dataclass(frozen=True, slots=True)
class SidecarRecord:
    """Everything needed to regenerate one mixture/target pair."""

    epoch: int
    index: int
    speech_id: str
    noise_id: str
    speech_path: str
    noise_path: str
    spec: AugmentSpec
    vad_threshold_db: float
    frame: FrameConfig
    sigma_s: float
    clipped_samples: int
    mixture_file: str
    target_file: str
    schema_version: int = SIDECAR_SCHEMA_VERSION

    def __post_init__(self) -> None:
        if self.spec.noise_offset is None:
            raise ValueError("Sidecar spec must carry a resolved noise offset")

    @property
    def vad(self) -> VadConfig:
        return VadConfig(threshold_db=self.vad_threshold_db, frame=self.frame)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": self.schema_version,
            "epoch": self.epoch,
            "index": self.index,
            "speech_id": self.speech_id,
            "noise_id": self.noise_id,
            "speech_path": self.speech_path,
            "noise_path": self.noise_path,
            "augment": self.spec.to_dict(),
            "vad_threshold_db": self.vad_threshold_db,
            "frame": self.frame.model_dump(),
            "sigma_s": self.sigma_s,
            "clipped_samples": self.clipped_samples,
            "mixture_file": self.mixture_file,
            "target_file": self.target_file,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SidecarRecord:
        version = int(data.get("schema_version", 0))
        if version != SIDECAR_SCHEMA_VERSION:
            raise ValueError(f"Unsupported sidecar schema version: {version}")
        return cls(
            epoch=int(data["epoch"]),
            index=int(data["index"]),
            speech_id=str(data["speech_id"]),
            noise_id=str(data["noise_id"]),
            speech_path=str(data["speech_path"]),
            noise_path=str(data["noise_path"]),
            spec=AugmentSpec.from_dict(data["augment"]),
            vad_threshold_db=float(data["vad_threshold_db"]),
            frame=FrameConfig.model_validate(data["frame"]),
            sigma_s=float(data["sigma_s"]),
            clipped_samples=int(data["clipped_samples"]),
            mixture_file=str(data["mixture_file"]),
            target_file=str(data["target_file"]),
            schema_version=version,
        )

    @classmethod
    def from_example(
        cls, example: MixedExample, vad: VadConfig, mixture_file: str, target_file: str
    ) -> SidecarRecord:
        """Describe a generated example.

        Raises:
            ValueError: If the example carries no provenance.
        """
        prov = example.provenance
        if prov is None:
            raise ValueError("Example has no provenance; cannot write a sidecar")
        return cls(
            epoch=prov.epoch,
            index=prov.index,
            speech_id=prov.speech_id,
            noise_id=prov.noise_id,
            speech_path=prov.speech_path,
            noise_path=prov.noise_path,
            spec=example.spec,
            vad_threshold_db=vad.threshold_db,
            frame=vad.frame,
            sigma_s=example.sigma_s,
            clipped_samples=example.clipped_samples,
            mixture_file=mixture_file,
            target_file=target_file,
        )

    def save(self, path: Path | str) -> Path:
        """Write the sidecar as indented, key-sorted JSON.

        Raises:
            AugnormError: If the write fails.
        """
        path = Path(path)
        try:
            path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        except OSError as e:
            raise AugnormError(f"Failed to write sidecar {path}: {e}") from e
        return path

    @classmethod
    def load(cls, path: Path | str) -> SidecarRecord:
        """Read a sidecar file.

        Raises:
            AugnormError: If the file is missing or malformed.
        """
        path = Path(path)
        try:
            return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise AugnormError(f"Failed to read sidecar {path}: {e}") from e


def example_stem(epoch: int, index: int) -> str:
    return f"e{epoch:03d}_{index:06d}"


def write_example(out_dir: Path | str, example: MixedExample, vad: VadConfig) -> SidecarRecord:
    """Write ``<stem>_mixture.wav``, ``<stem>_target.wav`` and ``<stem>.json``.

    Returns:
        The sidecar that was written.

    Raises:
        AudioFormatError: If a WAV cannot be written.
        AugnormError: If the sidecar cannot be written.
    """
    out_dir = Path(out_dir)
    prov = example.provenance
    stem = example_stem(prov.epoch, prov.index) if prov is not None else "example"
    mixture_file = f"{stem}_mixture.wav"
    target_file = f"{stem}_target.wav"
    write_wav(out_dir / mixture_file, example.mixture)
    write_wav(out_dir / target_file, example.target)
    record = SidecarRecord.from_example(example, vad, mixture_file, target_file)
    record.save(out_dir / f"{stem}.json")
    return record


def regenerate_from_sidecar(path: Path | str) -> MixedExample:
    """Rebuild a pair from its sidecar and the recorded source files.

    The result is bit-identical to the original example because the
    recorded decisions are replayed, not re-sampled.

    Raises:
        AugnormError: If the sidecar is unreadable or the sources are
            missing or cannot be decoded.
    """
    record = SidecarRecord.load(path)
    vad = record.vad
    speech = read_wav(record.speech_path, record.frame.sample_rate_hz)
    noise = read_wav(record.noise_path, record.frame.sample_rate_hz)
    provenance = ExampleProvenance(
        epoch=record.epoch,
        index=record.index,
        speech_id=record.speech_id,
        noise_id=record.noise_id,
        speech_path=record.speech_path,
        noise_path=record.noise_path,
    )
    example = synthesize_example(speech, noise, record.spec, vad, provenance)
    if example.sigma_s != record.sigma_s:
        logger.warning(
            f"Regenerated sigma_s {example.sigma_s!r} differs from recorded {record.sigma_s!r}"
        )
    return example
