"""Command line interface.

Exit codes: 0 success, 1 configuration error, 2 data error.
"""

from __future__ import annotations

import json
import sys

import click

from . import chem
from .chem.errors import SmilesParseError
from .evaluation import evaluate
from .pipeline import ConfigError, PipelineConfig, StageFailure
from .pipeline import run as run_pipeline


@click.group()
def main():
    """Dataset construction and evaluation for drug-development LLMs."""


@main.command("run")
@click.argument("config_path", type=click.Path())
def run_cmd(config_path):
    """Run the pipeline described by a YAML config file."""
    try:
        config = PipelineConfig.load(config_path)
        manifest = run_pipeline(config)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except StageFailure as exc:
        click.echo(f"stage failure: {exc}", err=True)
        sys.exit(2)
    click.echo(json.dumps(manifest.to_json_dict(), indent=2, sort_keys=True))


@main.group("inspect")
def inspect_cmd():
    """Developer helpers over single inputs."""


def _parse_or_exit(smiles: str):
    try:
        mol = chem.parse_smiles(smiles)
    except SmilesParseError as exc:
        click.echo(f"{type(exc).__name__}: {exc}", err=True)
        sys.exit(2)
    report = chem.validate_valence(mol)
    if not report.valid:
        click.echo(f"InvalidValence: {report.violations[0].message}", err=True)
        sys.exit(2)
    return mol


@inspect_cmd.group("chem")
def inspect_chem():
    """SMILES-level inspection."""


@inspect_chem.command("canon")
@click.argument("smiles", nargs=-1, required=True)
def canon_cmd(smiles):
    """Canonical form, one line per input."""
    for s in smiles:
        click.echo(chem.canonical_smiles(_parse_or_exit(s)))


@inspect_chem.command("descriptors")
@click.argument("smiles", nargs=-1, required=True)
def descriptors_cmd(smiles):
    """Structural descriptor table, one line per input."""
    for s in smiles:
        mol = _parse_or_exit(s)
        values = chem.all_descriptors(mol)
        rendered = " ".join(f"{k}={v}" for k, v in values.items())
        click.echo(f"{s}\t{rendered}")


@inspect_chem.command("fp")
@click.argument("smiles", nargs=-1, required=True)
@click.option("--radius", default=chem.DEFAULT_RADIUS, show_default=True)
@click.option("--width", default=chem.DEFAULT_WIDTH, show_default=True)
def fp_cmd(smiles, radius, width):
    """Morgan fingerprint popcount, one line per input."""
    for s in smiles:
        fp = chem.morgan_fingerprint(_parse_or_exit(s), radius, width)
        click.echo(f"{s}\tradius={fp.radius} width={fp.width} popcount={fp.popcount()}")


@main.command("eval")
@click.argument("predictions", type=click.Path())
@click.argument("queries", type=click.Path())
@click.option("--output", type=click.Path(), default=None,
              help="Write the JSON report here instead of stdout.")
@click.option("--fp-radius", default=chem.DEFAULT_RADIUS, show_default=True)
@click.option("--fp-width", default=chem.DEFAULT_WIDTH, show_default=True)
def eval_cmd(predictions, queries, output, fp_radius, fp_width):
    """Score predictions JSONL against queries JSONL."""
    try:
        preds = _read_jsonl(predictions)
        qs = _read_jsonl(queries)
    except FileNotFoundError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except json.JSONDecodeError as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    try:
        report = evaluate(preds, qs, fp_radius=fp_radius, fp_width=fp_width)
    except Exception as exc:
        click.echo(f"data error: {exc}", err=True)
        sys.exit(2)
    payload = json.dumps(report.to_json_dict(), indent=2, sort_keys=True)
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(payload + "\n")
        click.echo(report.table())
    else:
        click.echo(payload)


def _read_jsonl(path):
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records


if __name__ == "__main__":
    main()
