"""Batch command-line interface.

Exit codes: 0 success, 2 usage errors, 3 chain-validation errors,
4 processing failures.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .chain import ChainError, Severity, chain_from_json, validate_chain
from .config import ServiceConfig
from .ingest import ColumnMapping, IngestError
from .pool import decode_input, pool_size, run_local_batch
from .series import average_pupil, build_envelope

EXIT_VALIDATION = 3
EXIT_PROCESSING = 4


def _load_chain(path: str):
    try:
        return chain_from_json(Path(path).read_text())
    except (OSError, ChainError) as e:
        click.echo(f"error: cannot load chain: {e}", err=True)
        sys.exit(EXIT_VALIDATION)


def _load_mapping(path: str | None) -> ColumnMapping | None:
    if path is None:
        return None
    try:
        return ColumnMapping.from_json(Path(path).read_text())
    except (OSError, IngestError, ValueError) as e:
        click.echo(f"error: cannot load column mapping: {e}", err=True)
        sys.exit(EXIT_VALIDATION)


@click.group()
def main():
    """Clean, inspect and serve pupillary time series."""


@main.command()
@click.argument("inputs", nargs=-1, required=True,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--chain", "chain_path", required=True, type=click.Path(exists=True),
              help="Chain configuration (JSON).")
@click.option("--mapping", "mapping_path", type=click.Path(exists=True),
              help="Column mapping for TSV inputs (JSON).")
@click.option("--sample-rate", default=300.0, show_default=True,
              help="Nominal sampling rate for TSV inputs (Hz).")
@click.option("--output-dir", required=True, type=click.Path(file_okay=False))
@click.option("--workers", type=int, default=None,
              help="Worker count override (default: cores - 1).")
def clean(inputs, chain_path, mapping_path, sample_rate, output_dir, workers):
    """Clean INPUTS (TSV or compressed series files) with a filter chain."""
    chain = _load_chain(chain_path)
    findings = validate_chain(chain)
    for f in findings:
        click.echo(f"{f.severity.value}: {f.message} (positions {list(f.positions)})",
                   err=True)
    if any(f.severity is Severity.ERROR for f in findings):
        sys.exit(EXIT_VALIDATION)
    mapping = _load_mapping(mapping_path)

    results = run_local_batch(list(inputs), chain, output_dir, mapping,
                              sample_rate, max_workers=workers)
    failed = 0
    click.echo("input\toutput\tsamples_removed\tsamples_interpolated\twall_ms")
    for r in results:
        if r.error is not None:
            failed += 1
            click.echo(f"error: {r.input_path}: {r.error}", err=True)
            continue
        removed = sum(rep["removed"] for rep in r.report)
        interpolated = sum(rep["interpolated"] for rep in r.report)
        wall = sum(rep["wall_ms"] for rep in r.report)
        click.echo(f"{r.input_path}\t{r.output_path}\t{removed}\t{interpolated}"
                   f"\t{wall:.1f}")
    if failed:
        click.echo(f"{failed} of {len(results)} files failed", err=True)
        sys.exit(EXIT_PROCESSING)


@main.command("validate-chain")
@click.argument("chain_path", type=click.Path(exists=True, dir_okay=False))
def validate_chain_cmd(chain_path):
    """List warnings/errors for a chain configuration."""
    chain = _load_chain(chain_path)
    findings = validate_chain(chain)
    for f in findings:
        click.echo(f"{f.severity.value}: {f.message} (positions {list(f.positions)})")
    if not findings:
        click.echo("ok: no findings")
    if any(f.severity is Severity.ERROR for f in findings):
        sys.exit(EXIT_VALIDATION)


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", default="both", show_default=True,
              type=click.Choice(["both", "left", "right"]))
@click.option("--mapping", "mapping_path", type=click.Path(exists=True))
@click.option("--sample-rate", default=300.0, show_default=True)
def average(input_path, mode, mapping_path, sample_rate):
    """Print the average pupil size of a file in mm."""
    mapping = _load_mapping(mapping_path)
    try:
        recording = decode_input(Path(input_path).read_bytes(), mapping, sample_rate)
        click.echo(f"{average_pupil(recording, mode):.6f}")
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_PROCESSING)


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--channel", default="pupil_left", show_default=True)
@click.option("--from-ms", "from_ms", type=float, default=None)
@click.option("--to-ms", "to_ms", type=float, default=None)
@click.option("--points", default=2000, show_default=True)
@click.option("--mapping", "mapping_path", type=click.Path(exists=True))
@click.option("--sample-rate", default=300.0, show_default=True)
def inspect(input_path, channel, from_ms, to_ms, points, mapping_path, sample_rate):
    """Write a min/max envelope of a series as tab-separated text."""
    mapping = _load_mapping(mapping_path)
    try:
        recording = decode_input(Path(input_path).read_bytes(), mapping, sample_rate)
        envelope = build_envelope(recording, channel, from_ms, to_ms, points)
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_PROCESSING)
    click.echo("start_ms\tend_ms\tmin\tmax")
    for b in envelope.buckets:
        if b.empty:
            click.echo(f"{b.start_ms:.3f}\t{b.end_ms:.3f}\t\t")
        else:
            click.echo(f"{b.start_ms:.3f}\t{b.end_ms:.3f}\t{b.min:.6f}\t{b.max:.6f}")


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="Service configuration (JSON); environment overrides apply.")
def serve(config_path):
    """Run the HTTP series service."""
    from . import service

    service.run(ServiceConfig.load(config_path))


@main.command("pool-size")
@click.option("--cores", type=int, default=None, help="Override detected core count.")
def pool_size_cmd(cores):
    """Print the worker count for this machine."""
    click.echo(pool_size(cores))


if __name__ == "__main__":
    main()
