"""Command-line interface: serve, ingest, export, and stats reports."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import load_config
from .errors import MaptagError
from .geo import parse_control_point_file
from .service import create_app
from .stats import (
    chi_square_result,
    cumulative_evolution,
    friedman_result,
    load_contingency_table,
    load_rank_counts,
    mean_tags_per_condition,
    tag_frequency,
)
from .store import AnnotationStore


def _open_store(config_path: str | None) -> AnnotationStore:
    cfg = load_config(config_path)
    if not cfg.data_dir:
        raise click.UsageError("this command needs a data directory; set data_dir in the config or MAPTAG_DATA_DIR")
    return AnnotationStore(data_dir=cfg.data_dir, base_uri=cfg.resolved_base_uri, suggestion_cap=cfg.suggestion_cap)


@click.group()
def main():
    """Collaborative map-annotation engine."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="JSON config file; MAPTAG_* environment variables override its fields.")
def serve(config_path):
    """Run the HTTP service."""
    import uvicorn

    cfg = load_config(config_path)
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")


@main.command("ingest-maps")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def ingest_maps(file, config_path):
    """Load map records (JSON array or JSON lines) into the data directory."""
    store = _open_store(config_path)
    text = Path(file).read_text(encoding="utf-8").strip()
    if text.startswith("["):
        records = json.loads(text)
    else:
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
    try:
        for record in records:
            store.add_map(record)
    except MaptagError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"ingested {len(records)} maps")


@main.command("ingest-control-points")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def ingest_control_points(file, config_path):
    """Load control points (lines of map_id,px,py,lon,lat[,label])."""
    store = _open_store(config_path)
    with open(file, encoding="utf-8") as fh:
        records = parse_control_point_file(fh)
    by_map: dict[str, list] = {}
    for map_id, cp in records:
        by_map.setdefault(map_id, []).append(cp)
    try:
        for map_id, points in by_map.items():
            store.add_control_points(map_id, points)
    except MaptagError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"added {len(records)} control points to {len(by_map)} maps")


@main.command("export-judgments")
@click.argument("path", type=click.Path(writable=True, dir_okay=False, allow_dash=True))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def export_judgments(path, config_path):
    """Write relevance judgments as tab-separated (tag, target, +1/-1) rows."""
    store = _open_store(config_path)
    rows = store.graph.relevance_judgments()
    lines = [f"{tag}\t{target}\t{sign:+d}" for tag, target, sign in rows]
    if path == "-":
        for line in lines:
            click.echo(line)
    else:
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
        click.echo(f"wrote {len(rows)} judgments to {path}")


@main.command()
@click.argument("report", type=click.Choice(["chi-square", "friedman", "frequencies", "means", "evolution"]))
@click.argument("table_file", type=click.Path(exists=True, dir_okay=False), required=False)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None)
def stats(report, table_file, config_path):
    """Run a statistics report.

    chi-square and friedman read a delimited table file; the other reports
    aggregate annotations from the configured data directory.
    """
    if report in ("chi-square", "friedman"):
        if not table_file:
            raise click.UsageError(f"{report} needs a table file")
        lines = Path(table_file).read_text(encoding="utf-8").splitlines()
        try:
            if report == "chi-square":
                result = chi_square_result(load_contingency_table(lines))
            else:
                result = friedman_result(load_rank_counts(lines))
        except MaptagError as exc:
            raise click.ClickException(str(exc))
        click.echo(json.dumps(result.__dict__, indent=2))
        return

    store = _open_store(config_path)
    if report == "frequencies":
        payload = {"name": report, "frequencies": tag_frequency(store.accepted_tag_labels())}
    elif report == "means":
        means = mean_tags_per_condition(store.annotation_tag_tallies())
        payload = {
            "name": report,
            "means": {c: {"accepted": a, "rejected": r} for c, (a, r) in sorted(means.items())},
        }
    else:
        payload = {"name": report, "series": cumulative_evolution(store.evolution_records())}
    click.echo(json.dumps(payload, indent=2))


if __name__ == "__main__":
    main()
