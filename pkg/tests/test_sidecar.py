import json
from pathlib import Path

import pytest

from augnorm.core.config import BatchPlan, VadConfig
from augnorm.core.corpus import BatchGenerator, write_synthetic_corpus
from augnorm.core.errors import AugnormError
from augnorm.core.sidecar import (
    SIDECAR_SCHEMA_VERSION,
    SidecarRecord,
    example_stem,
    regenerate_from_sidecar,
    write_example,
)


def _generator(root: Path) -> BatchGenerator:
    corpus = write_synthetic_corpus(root / "corpus", n_speech=2, n_noise=2)
    return BatchGenerator(corpus.speech, corpus.noise, BatchPlan(global_seed=5, examples_per_epoch=2))


def test_sidecar_records_every_decision(tmp_path: Path) -> None:
    example = _generator(tmp_path).example(epoch=2, index=1)
    record = write_example(tmp_path / "out", example, VadConfig())
    sidecar = tmp_path / "out" / f"{example_stem(2, 1)}.json"
    data = json.loads(sidecar.read_text(encoding="utf-8"))
    assert data["schema_version"] == SIDECAR_SCHEMA_VERSION
    assert data["augment"]["noise_offset"] == example.spec.noise_offset
    assert set(data["augment"]["speech_filter"]) == {"r1", "r2", "r3", "r4"}
    assert data["mixture_file"] == "e002_000001_mixture.wav"
    assert SidecarRecord.load(sidecar) == record


def test_regeneration_is_bit_identical(tmp_path: Path) -> None:
    example = _generator(tmp_path).example(epoch=0, index=0)
    write_example(tmp_path / "out", example, VadConfig())
    again = regenerate_from_sidecar(tmp_path / "out" / "e000_000000.json")
    assert again.mixture.samples.tobytes() == example.mixture.samples.tobytes()
    assert again.target.samples.tobytes() == example.target.samples.tobytes()
    assert again.sigma_s == example.sigma_s


def test_sidecar_load_errors(tmp_path: Path) -> None:
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema_version": 99}', encoding="utf-8")
    with pytest.raises(AugnormError):
        SidecarRecord.load(bad)
    with pytest.raises(AugnormError):
        regenerate_from_sidecar(tmp_path / "missing.json")
