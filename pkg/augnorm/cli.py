"""Command-line interface for augnorm using Typer.

Commands:
- init-config: Write a default configuration file
- ingest: Build a manifest from WAV files and directories
- synthesize: Write augmented mixture/target pairs with sidecars
- augment: Apply explicit augmentation stages to one WAV
- evaluate: Score estimate WAVs against references
- train-toy: Train the toy mask estimator (optionally all comparison conditions)
"""

from __future__ import annotations

import json
import os
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Annotated, cast, get_args

import typer
from rich.console import Console
from rich.table import Table

from augnorm import __version__
from augnorm.core.audio_io import read_wav, write_wav
from augnorm.core.augment import AugmentSpec
from augnorm.core.biquad import BiquadCoeffs, apply_biquad
from augnorm.core.config import (
    AugmentPreset,
    Config,
    create_default_config,
    load_config_or_default,
)
from augnorm.core.corpus import BatchGenerator, synthesize_corpus, write_synthetic_corpus
from augnorm.core.errors import AugnormError, ConfigError
from augnorm.core.experiment import ToyRun, compare_conditions, run_toy_condition
from augnorm.core.logging_setup import resolve_verbosity, setup_logging
from augnorm.core.manifest import Manifest, ingest
from augnorm.core.metrics import MetricReport, evaluate_pair, summarize_reports
from augnorm.core.sink import write_report
from augnorm.core.vad import active_level

console = Console(stderr=True)

OUT_DIR_ENV = "AUGNORM_OUT_DIR"
JOBS_ENV = "AUGNORM_JOBS"


def _apply_runtime_env_overrides(config: Config) -> None:
    """Apply optional runtime overrides from environment."""
    out_dir = os.getenv(OUT_DIR_ENV)
    if out_dir is not None and out_dir.strip():
        config.runtime.out_dir = out_dir.strip()

    jobs = os.getenv(JOBS_ENV)
    if jobs is not None and jobs.strip():
        try:
            value = int(jobs.strip())
        except ValueError as e:
            raise ConfigError(f"{JOBS_ENV} must be an integer, got {jobs!r}") from e
        if value < 1:
            raise ConfigError(f"{JOBS_ENV} must be >= 1, got {value}")
        config.runtime.jobs = value


app = typer.Typer(
    name="augnorm",
    help="augnorm - augmentation and level-normalized loss toolkit for speech enhancement",
    add_completion=False,
)

# Typer option metadata constants to avoid function calls in annotations/defaults
CONFIG_OPTION = typer.Option("--config", "-c", help="Path to configuration file")
SEED_OPTION = typer.Option("--seed", help="Override the global seed")
OUT_DIR_OPTION = typer.Option("--out-dir", help="Override the output directory")
JOBS_OPTION = typer.Option("--jobs", help="Worker threads for example synthesis")
VERBOSITY_OPTION = typer.Option("--verbosity", help="Log level (debug|info|warning|error)")
ERROR_JSON_OPTION = typer.Option("--error-json", help="Print errors as a JSON object on stdout")
SPEECH_OPTION = typer.Option("--speech", help="Speech manifest (.jsonl or .csv)")
NOISE_OPTION = typer.Option("--noise", help="Noise manifest (.jsonl or .csv)")


def _load(
    config_path: Path | None,
    seed: int | None,
    out_dir: Path | None,
    jobs: int | None,
    verbosity: str | None,
) -> Config:
    """Load config, apply env then CLI overrides, and configure logging."""
    config = load_config_or_default(config_path)
    _apply_runtime_env_overrides(config)
    if seed is not None:
        config.runtime.seed = seed
    if out_dir is not None:
        config.runtime.out_dir = str(out_dir)
    if jobs is not None:
        if jobs < 1:
            raise ConfigError(f"--jobs must be >= 1, got {jobs}")
        config.runtime.jobs = jobs
    setup_logging(resolve_verbosity(verbosity, config.runtime.console_verbosity))
    return config


def _run(action: Callable[[], None], error_json: bool) -> None:
    """Run a command body and map errors to exit codes (config 2, domain 3, other 1)."""
    try:
        action()
    except ConfigError as e:
        _report_error(e.code, f"Configuration error: {e}", error_json)
        sys.exit(2)
    except AugnormError as e:
        _report_error(e.code, str(e), error_json)
        sys.exit(3)
    except (OSError, RuntimeError, TypeError, ValueError) as e:
        _report_error("unexpected_error", f"Unexpected error: {e}", error_json)
        sys.exit(1)


def _report_error(code: str, message: str, error_json: bool) -> None:
    if error_json:
        print(json.dumps({"error": code, "message": message}, separators=(",", ":")))
    else:
        console.print(f"[red]{message}[/red]", markup=True, highlight=False)


def _out_dir(config: Config) -> Path:
    path = Path(config.runtime.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


@app.command(name="init-config")
def init_config(
    path: Annotated[Path, typer.Argument(help="Config file to create (.toml/.yaml)")] = Path(
        "augnorm.toml"
    ),
    error_json: Annotated[bool, ERROR_JSON_OPTION] = False,
) -> None:
    """Write a default configuration file."""

    def action() -> None:
        create_default_config(path)
        console.print(f"[green]Wrote default configuration to {path}[/green]")

    _run(action, error_json)


@app.command(name="ingest")
def ingest_command(
    paths: Annotated[list[Path], typer.Argument(help="WAV files or directories")],
    kind: Annotated[str, typer.Option("--kind", help="speech or noise")] = "speech",
    output: Annotated[Path | None, typer.Option("--output", "-o", help="Manifest path")] = None,
    config_path: Annotated[Path | None, CONFIG_OPTION] = None,
    seed: Annotated[int | None, SEED_OPTION] = None,
    out_dir: Annotated[Path | None, OUT_DIR_OPTION] = None,
    jobs: Annotated[int | None, JOBS_OPTION] = None,
    verbosity: Annotated[str | None, VERBOSITY_OPTION] = None,
    error_json: Annotated[bool, ERROR_JSON_OPTION] = False,
) -> None:
    """Build a manifest from WAV files and directories."""

    def action() -> None:
        config = _load(config_path, seed, out_dir, jobs, verbosity)
        if kind not in ("speech", "noise"):
            raise ConfigError(f"--kind must be speech or noise, got {kind!r}")
        manifest = ingest(
            paths, "speech" if kind == "speech" else "noise", config.frame.sample_rate_hz
        )
        target = output or _out_dir(config) / f"{kind}.jsonl"
        manifest.save(target)
        console.print(
            f"[green]{len(manifest)} {kind} file(s), {manifest.total_duration_s:.1f} s "
            f"-> {target}[/green]"
        )
        for rejected in manifest.rejected:
            console.print(f"[yellow]rejected {rejected.path}: {rejected.reason}[/yellow]")

    _run(action, error_json)


@app.command()
def synthesize(
    speech: Annotated[Path, SPEECH_OPTION],
    noise: Annotated[Path, NOISE_OPTION],
    epoch: Annotated[int, typer.Option("--epoch", help="Epoch to synthesize")] = 0,
    count: Annotated[int | None, typer.Option("--count", help="Number of examples")] = None,
    preset: Annotated[str | None, typer.Option("--preset", help="Augmentation preset")] = None,
    config_path: Annotated[Path | None, CONFIG_OPTION] = None,
    seed: Annotated[int | None, SEED_OPTION] = None,
    out_dir: Annotated[Path | None, OUT_DIR_OPTION] = None,
    jobs: Annotated[int | None, JOBS_OPTION] = None,
    verbosity: Annotated[str | None, VERBOSITY_OPTION] = None,
    error_json: Annotated[bool, ERROR_JSON_OPTION] = False,
) -> None:
    """Write augmented mixture/target WAV pairs, one JSON sidecar per pair."""

    def action() -> None:
        config = _load(config_path, seed, out_dir, jobs, verbosity)
        augment = config.augment
        if preset is not None:
            augment = augment.with_preset(_check_preset(preset))
        plan = config.batch.model_copy(update={"global_seed": config.runtime.seed})
        generator = BatchGenerator(
            Manifest.load(speech),
            Manifest.load(noise),
            plan,
            augment,
            config.vad,
            config.runtime.jobs,
        )
        summary = synthesize_corpus(generator, _out_dir(config), epoch, count)
        console.print(
            f"[green]Wrote {len(summary.written)} pair(s) to {summary.out_dir}"
            f" ({summary.skipped} skipped)[/green]"
        )

    _run(action, error_json)


def _check_preset(name: str) -> AugmentPreset:
    if name not in get_args(AugmentPreset):
        raise ConfigError(f"Unknown augmentation preset: {name}")
    return cast(AugmentPreset, name)


@app.command()
def augment(
    input_path: Annotated[Path, typer.Argument(help="Input WAV")],
    output_path: Annotated[Path, typer.Argument(help="Output WAV")],
    spec_path: Annotated[
        Path | None, typer.Option("--spec", help="AugmentSpec JSON (speech filter and level)")
    ] = None,
    coeffs: Annotated[
        str | None, typer.Option("--filter", help="Biquad coefficients r1,r2,r3,r4")
    ] = None,
    level_dbfs: Annotated[
        float | None, typer.Option("--level-dbfs", help="Target active level")
    ] = None,
    stage: Annotated[str, typer.Option("--stage", help="filter, level or both")] = "both",
    config_path: Annotated[Path | None, CONFIG_OPTION] = None,
    seed: Annotated[int | None, SEED_OPTION] = None,
    out_dir: Annotated[Path | None, OUT_DIR_OPTION] = None,
    jobs: Annotated[int | None, JOBS_OPTION] = None,
    verbosity: Annotated[str | None, VERBOSITY_OPTION] = None,
    error_json: Annotated[bool, ERROR_JSON_OPTION] = False,
) -> None:
    """Apply the speech filter and/or level scaling of an explicit spec to one WAV."""

    def action() -> None:
        config = _load(config_path, seed, out_dir, jobs, verbosity)
        if stage not in ("filter", "level", "both"):
            raise ConfigError(f"--stage must be filter, level or both, got {stage!r}")
        speech_filter, level = _explicit_stages(spec_path, coeffs, level_dbfs, config)

        w = read_wav(input_path, config.frame.sample_rate_hz)
        if stage in ("filter", "both"):
            w = apply_biquad(w, speech_filter)
        if stage in ("level", "both"):
            w = w.scaled(10.0 ** (level / 20.0) / active_level(w, config.vad).sigma)
        write_wav(output_path, w)
        console.print(
            f"[green]{stage}: filter {speech_filter.to_dict()}, level {level:.2f} dBFS "
            f"-> {output_path}[/green]"
        )

    _run(action, error_json)


def _explicit_stages(
    spec_path: Path | None, coeffs: str | None, level_dbfs: float | None, config: Config
) -> tuple[BiquadCoeffs, float]:
    """Speech filter and level from a spec file, overridden by explicit options."""
    speech_filter = BiquadCoeffs.identity()
    level = config.augment.level_mean_dbfs
    if spec_path is not None:
        try:
            spec = AugmentSpec.from_dict(json.loads(spec_path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid AugmentSpec file {spec_path}: {e}") from e
        speech_filter = spec.speech_filter
        level = spec.level_dbfs
    if coeffs is not None:
        parts = [p.strip() for p in coeffs.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"--filter needs four comma-separated values, got {coeffs!r}")
        try:
            r1, r2, r3, r4 = (float(p) for p in parts)
        except ValueError as e:
            raise ConfigError(f"--filter values must be numbers: {coeffs!r}") from e
        speech_filter = BiquadCoeffs(r1, r2, r3, r4)
    if level_dbfs is not None:
        level = level_dbfs
    return speech_filter, level


@app.command()
def evaluate(
    reference_dir: Annotated[Path, typer.Argument(help="Directory of clean references")],
    estimate_dir: Annotated[Path, typer.Argument(help="Directory of estimates (same names)")],
    noisy_dir: Annotated[
        Path | None, typer.Option("--noisy-dir", help="Unprocessed mixtures, scored as 'noisy'")
    ] = None,
    condition: Annotated[str, typer.Option("--condition", help="Label of the estimates")] = "enhanced",
    output: Annotated[Path | None, typer.Option("--output", "-o", help="Report path")] = None,
    config_path: Annotated[Path | None, CONFIG_OPTION] = None,
    seed: Annotated[int | None, SEED_OPTION] = None,
    out_dir: Annotated[Path | None, OUT_DIR_OPTION] = None,
    jobs: Annotated[int | None, JOBS_OPTION] = None,
    verbosity: Annotated[str | None, VERBOSITY_OPTION] = None,
    error_json: Annotated[bool, ERROR_JSON_OPTION] = False,
) -> None:
    """Score estimates against references and write a metrics report."""

    def action() -> None:
        config = _load(config_path, seed, out_dir, jobs, verbosity)
        references = sorted(reference_dir.glob("*.wav"))
        if not references:
            raise ConfigError(f"No reference WAV files in {reference_dir}")

        reports: list[MetricReport] = []
        sources = [(estimate_dir, condition)]
        if noisy_dir is not None:
            sources.insert(0, (noisy_dir, "noisy"))
        for ref_path in references:
            reference = read_wav(ref_path, config.frame.sample_rate_hz)
            for directory, label in sources:
                candidate = directory / ref_path.name
                if not candidate.exists():
                    console.print(f"[yellow]missing {label} file {candidate}[/yellow]")
                    continue
                estimate = read_wav(candidate, config.frame.sample_rate_hz)
                reports.append(
                    evaluate_pair(reference, estimate, config.metrics, ref_path.stem, label)
                )

        target = output or _out_dir(config) / "metrics.csv"
        write_report((r.to_row() for r in reports), target)
        _print_summary(summarize_reports(reports))
        console.print(f"[green]{len(reports)} row(s) -> {target}[/green]")

    _run(action, error_json)


def _print_summary(summary: dict[str, dict[str, float]]) -> None:
    table = Table(title="Mean scores")
    for column in ("condition", "n", "SI-SDR", "fwSegSNR", "CD", "segSNR"):
        table.add_column(column)
    for name, stats in summary.items():
        table.add_row(
            name,
            f"{stats['count']:.0f}",
            f"{stats['si_sdr_db']:.2f}",
            f"{stats['fw_seg_snr_db']:.2f}",
            f"{stats['cepstral_distance']:.3f}",
            f"{stats['seg_snr_db']:.2f}",
        )
    console.print(table)


@app.command(name="train-toy")
def train_toy(
    speech: Annotated[Path | None, SPEECH_OPTION] = None,
    noise: Annotated[Path | None, NOISE_OPTION] = None,
    loss: Annotated[str, typer.Option("--loss", help="standard or normalized")] = "normalized",
    level_aug: Annotated[
        str | None, typer.Option("--level-aug", help="on (snr_spec_level) or off (snr_spec)")
    ] = None,
    preset: Annotated[
        str | None, typer.Option("--preset", help="Augmentation preset of the training batches")
    ] = None,
    compare: Annotated[
        bool, typer.Option("--compare", help="Train all comparison conditions")
    ] = False,
    epochs: Annotated[int | None, typer.Option("--epochs", help="Override epochs")] = None,
    config_path: Annotated[Path | None, CONFIG_OPTION] = None,
    seed: Annotated[int | None, SEED_OPTION] = None,
    out_dir: Annotated[Path | None, OUT_DIR_OPTION] = None,
    jobs: Annotated[int | None, JOBS_OPTION] = None,
    verbosity: Annotated[str | None, VERBOSITY_OPTION] = None,
    error_json: Annotated[bool, ERROR_JSON_OPTION] = False,
) -> None:
    """Train the toy mask estimator; writes checkpoint, trace and curve files.

    Without manifests a synthetic speech-like/noise corpus is generated
    under the output directory first.
    """

    def action() -> None:
        config = _load(config_path, seed, out_dir, jobs, verbosity)
        if loss not in ("standard", "normalized"):
            raise ConfigError(f"--loss must be standard or normalized, got {loss!r}")
        if level_aug not in (None, "on", "off"):
            raise ConfigError(f"--level-aug must be on or off, got {level_aug!r}")
        if preset is not None and level_aug is not None:
            raise ConfigError("--preset and --level-aug are mutually exclusive")
        train_preset: AugmentPreset
        if preset is not None:
            train_preset = _check_preset(preset)
        else:
            train_preset = "snr_spec" if level_aug == "off" else "snr_spec_level"
        if epochs is not None:
            config.train.epochs = epochs
        root = _out_dir(config)
        run_seed = config.runtime.seed

        if speech is None or noise is None:
            corpus = write_synthetic_corpus(
                root / "corpus",
                duration_s=config.train.example_duration_s,
                seed=run_seed,
                sample_rate_hz=config.frame.sample_rate_hz,
            )
            m_speech, m_noise = corpus.speech, corpus.noise
        else:
            m_speech, m_noise = Manifest.load(speech), Manifest.load(noise)

        if compare:
            runs = compare_conditions(m_speech, m_noise, config, run_seed, config.runtime.jobs)
        else:
            runs = [
                run_toy_condition(
                    m_speech,
                    m_noise,
                    config,
                    train_preset,
                    loss == "normalized",
                    run_seed,
                    config.runtime.jobs,
                )
            ]

        curves: list[dict[str, object]] = []
        for run in runs:
            run.model.save(root / f"checkpoint_{run.condition}.json")
            write_report(run.trace.to_rows(), root / f"trace_{run.condition}.csv")
            curves.extend(run.curve_rows())
        write_report(curves, root / "curves.csv")
        _print_runs(runs)

    _run(action, error_json)


def _print_runs(runs: list[ToyRun]) -> None:
    table = Table(title="Toy training")
    for column in ("condition", "epochs", "final loss", "val SI-SDR (dB)", "params"):
        table.add_column(column)
    for run in runs:
        losses = run.trace.losses
        table.add_row(
            run.condition,
            str(len(losses)),
            f"{losses[-1]:.6g}" if losses else "-",
            f"{run.trace.final_val_si_sdr:.2f}",
            str(run.model.parameter_count),
        )
    console.print(table)


@app.command()
def version() -> None:
    """Print the package version."""
    print(__version__)


def main() -> None:
    """Entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
