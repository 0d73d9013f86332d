import csv
import json
from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from augnorm.cli import app
from augnorm.core.audio_io import read_wav, write_wav
from augnorm.core.dsp import Waveform
from augnorm.core.manifest import Manifest
from augnorm.core.vad import active_level
from tests.helpers import speech, white, write_corpus

runner = CliRunner()


def _manifests(root: Path) -> tuple[Path, Path]:
    write_corpus(root / "audio")
    speech_manifest = root / "speech.jsonl"
    noise_manifest = root / "noise.jsonl"
    for kind, target in (("speech", speech_manifest), ("noise", noise_manifest)):
        result = runner.invoke(
            app, ["ingest", str(root / "audio" / kind), "--kind", kind, "-o", str(target)]
        )
        assert result.exit_code == 0, result.output
    return speech_manifest, noise_manifest


def _tree(root: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(root.iterdir())}


def test_init_config(tmp_path: Path) -> None:
    path = tmp_path / "augnorm.toml"
    assert runner.invoke(app, ["init-config", str(path)]).exit_code == 0
    assert path.exists()
    assert runner.invoke(app, ["init-config", str(path)]).exit_code == 2


def test_ingest_writes_manifest(tmp_path: Path) -> None:
    speech_manifest, _ = _manifests(tmp_path)
    assert len(Manifest.load(speech_manifest)) == 3


def test_synthesize_is_reproducible(tmp_path: Path) -> None:
    speech_manifest, noise_manifest = _manifests(tmp_path)
    outputs = []
    for name, jobs in (("a", "1"), ("b", "1"), ("c", "2")):
        out = tmp_path / name
        result = runner.invoke(
            app,
            [
                "synthesize",
                "--speech", str(speech_manifest),
                "--noise", str(noise_manifest),
                "--count", "4",
                "--seed", "7",
                "--jobs", jobs,
                "--out-dir", str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        outputs.append(_tree(out))
    assert len(outputs[0]) == 12
    assert outputs[0] == outputs[1] == outputs[2]


def test_synthesize_preset_without_level(tmp_path: Path) -> None:
    speech_manifest, noise_manifest = _manifests(tmp_path)
    out = tmp_path / "out"
    result = runner.invoke(
        app,
        [
            "synthesize",
            "--speech", str(speech_manifest),
            "--noise", str(noise_manifest),
            "--count", "2",
            "--preset", "snr_spec",
            "--out-dir", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    for sidecar in out.glob("*.json"):
        assert json.loads(sidecar.read_text(encoding="utf-8"))["augment"]["level_dbfs"] == -28.0


def test_augment_single_file(tmp_path: Path) -> None:
    source = write_wav(tmp_path / "in.wav", speech(1.0, seed=1))
    target = tmp_path / "out.wav"
    result = runner.invoke(
        app,
        [
            "augment", str(source), str(target),
            "--filter", "0.1,-0.2,0.3,0.1",
            "--level-dbfs", "-20",
        ],
    )
    assert result.exit_code == 0, result.output
    assert active_level(read_wav(target)).dbfs == pytest.approx(-20.0, abs=0.01)

    filtered_only = tmp_path / "filtered.wav"
    result = runner.invoke(
        app, ["augment", str(source), str(filtered_only), "--filter", "0,0,0,0", "--stage", "filter"]
    )
    assert result.exit_code == 0, result.output
    np.testing.assert_array_equal(read_wav(filtered_only).samples, read_wav(source).samples)


def test_augment_rejects_bad_filter(tmp_path: Path) -> None:
    source = write_wav(tmp_path / "in.wav", speech(1.0))
    result = runner.invoke(app, ["augment", str(source), str(tmp_path / "o.wav"), "--filter", "1,2"])
    assert result.exit_code == 2


def test_evaluate_writes_rows(tmp_path: Path) -> None:
    refs, ests, noisy = tmp_path / "ref", tmp_path / "est", tmp_path / "noisy"
    for i in range(2):
        s = speech(1.0, seed=i)
        n = white(1.0, seed=10 + i, std=0.01)
        write_wav(refs / f"u{i}.wav", s)
        write_wav(noisy / f"u{i}.wav", Waveform(s.samples + n.samples))
        write_wav(ests / f"u{i}.wav", Waveform(s.samples + 0.1 * n.samples))
    report = tmp_path / "metrics.csv"
    result = runner.invoke(
        app, ["evaluate", str(refs), str(ests), "--noisy-dir", str(noisy), "-o", str(report)]
    )
    assert result.exit_code == 0, result.output
    with open(report, encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4
    assert {r["condition"] for r in rows} == {"noisy", "enhanced"}
    by_key = {(r["utterance_id"], r["condition"]): float(r["si_sdr"]) for r in rows}
    assert by_key[("u0", "enhanced")] > by_key[("u0", "noisy")]


def test_train_toy_on_synthetic_corpus(tmp_path: Path) -> None:
    config = tmp_path / "small.toml"
    config.write_text(
        "[train]\nepochs = 2\nbatch_size = 2\nexamples_per_epoch = 2\nvalidation_examples = 2\n",
        encoding="utf-8",
    )
    out = tmp_path / "run"
    result = runner.invoke(
        app, ["train-toy", "--config", str(config), "--out-dir", str(out), "--compare"]
    )
    assert result.exit_code == 0, result.output
    assert (out / "checkpoint_snr_spec_level+normalized.json").exists()
    with open(out / "curves.csv", encoding="utf-8", newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 10
    assert {r["condition"] for r in rows} == {
        "none+standard",
        "snr+standard",
        "snr_spec+standard",
        "snr_spec_level+standard",
        "snr_spec_level+normalized",
    }
    assert list(rows[0]) == ["condition", "epoch", "loss", "val_si_sdr"]


def test_error_json_for_missing_manifest(tmp_path: Path) -> None:
    result = runner.invoke(
        app,
        [
            "synthesize",
            "--speech", str(tmp_path / "nope.jsonl"),
            "--noise", str(tmp_path / "nope.jsonl"),
            "--error-json",
        ],
    )
    assert result.exit_code == 2
    line = next(ln for ln in result.stdout.splitlines() if ln.startswith("{"))
    assert json.loads(line)["error"] == "config_error"


def test_train_toy_rejects_unknown_loss(tmp_path: Path) -> None:
    result = runner.invoke(app, ["train-toy", "--loss", "fancy", "--out-dir", str(tmp_path)])
    assert result.exit_code == 2


def test_train_toy_with_preset(tmp_path: Path) -> None:
    config = tmp_path / "small.toml"
    config.write_text(
        "[train]\nepochs = 1\nbatch_size = 2\nexamples_per_epoch = 2\nvalidation_examples = 2\n",
        encoding="utf-8",
    )
    out = tmp_path / "run"
    args = ["train-toy", "--config", str(config), "--out-dir", str(out), "--loss", "standard"]
    result = runner.invoke(app, [*args, "--preset", "snr"])
    assert result.exit_code == 0, result.output
    assert (out / "checkpoint_snr+standard.json").exists()
    assert (out / "trace_snr+standard.csv").exists()

    assert runner.invoke(app, [*args, "--preset", "snr", "--level-aug", "on"]).exit_code == 2
    assert runner.invoke(app, [*args, "--preset", "bogus"]).exit_code == 2
