"""Command-line interface for the tissue microenvironment simulator."""

import asyncio
from pathlib import Path
from typing import List, NoReturn, Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn
from rich.table import Table

from tme_simulator.config import (
    PresetScale,
    get_preset,
    load_config,
    serialize_config,
    settings,
)
from tme_simulator.exceptions import ConfigError, SimulatorError
from tme_simulator.models import DatasetManifest, ImageRecord, SimulationConfig
from tme_simulator.pipeline import generate_cohort, recompute_statistics
from tme_simulator.utils import setup_logging

# Command output goes to stdout, diagnostics to stderr
console = Console()
error_console = Console(stderr=True)

app = typer.Typer(
    name="tme-sim",
    help="Synthetic multiplexed tissue images with ground-truth masks",
    no_args_is_help=True,
)


@app.callback()
def main() -> None:
    """Configure logging before any command runs."""
    setup_logging()


def parse_seeds(text: str) -> List[int]:
    """``"1,2, 3"`` -> ``[1, 2, 3]``; an empty string gives no seeds."""
    seeds = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            seed = int(part)
        except ValueError:
            raise typer.BadParameter(f"{part!r} is not an integer seed") from None
        if not 0 <= seed < 2**64:
            raise typer.BadParameter(f"seed {seed} is not a 64-bit unsigned integer")
        seeds.append(seed)
    return seeds


def fail(error: Exception) -> NoReturn:
    """Print a diagnostic and exit with status 1."""
    error_console.print(f"[bold red]Error:[/bold red] {escape(str(error))}")
    raise typer.Exit(1)


@app.command()
def generate(
    config: Path = typer.Option(..., "--config", help="Simulation config (JSON)"),
    seeds: Optional[str] = typer.Option(
        None, "--seeds", help="Comma-separated seeds (defaults to the config seed)"
    ),
    out: Path = typer.Option(
        Path(settings.output_dir), "--out", help="Output directory for the cohort"
    ),
    telemetry: bool = typer.Option(
        False, "--telemetry", help="Also write per-iteration telemetry CSVs"
    ),
    workers: Optional[int] = typer.Option(
        None, "--workers", min=1, help="Worker processes (overrides settings)"
    ),
) -> None:
    """Generate one synthetic image per seed."""
    try:
        cfg = load_config(config)
        seed_list = parse_seeds(seeds) if seeds is not None else [cfg.seed]
        manifest = asyncio.run(
            run_generation(cfg, seed_list, out, telemetry, workers)
        )
    except SimulatorError as e:
        fail(e)

    show_manifest(manifest, out)


async def run_generation(
    cfg: SimulationConfig,
    seeds: List[int],
    out: Path,
    telemetry: bool,
    workers: Optional[int],
) -> DatasetManifest:
    """Generate the cohort behind a progress bar."""
    with Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        console=error_console,
        transient=True,
    ) as progress:
        task = progress.add_task("Simulating images...", total=len(seeds))

        def advance(record: ImageRecord) -> None:
            progress.update(
                task, advance=1, description=f"Finished seed {record.seed}"
            )

        return await generate_cohort(
            cfg,
            seeds,
            out,
            telemetry=telemetry,
            workers=workers,
            on_image=advance,
        )


def show_manifest(manifest: DatasetManifest, out: Path) -> None:
    table = Table(title=f"Cohort written to {out}")
    table.add_column("Image", style="cyan")
    table.add_column("Seed", justify="right")
    table.add_column("Cells", justify="right")
    table.add_column("Nb steps", justify="right")
    table.add_column("Ph steps", justify="right")
    for image in manifest.images:
        table.add_row(
            image.directory,
            str(image.seed),
            str(image.num_cells),
            str(image.neighborhood_iterations),
            str(image.phenotype_iterations),
        )
    console.print(table)


@app.command()
def stats(
    manifest: Path = typer.Option(..., "--manifest", help="Cohort manifest.json"),
    out: Path = typer.Option(..., "--out", help="Output directory for metrics"),
) -> None:
    """Recompute metrics from a stored cohort."""
    try:
        reports = asyncio.run(recompute_statistics(manifest, out))
    except SimulatorError as e:
        fail(e)
    console.print(f"[green]Recomputed metrics for {len(reports)} image(s) in {out}")


@app.command()
def preset(
    name: str = typer.Option("fig4", "--name", help="Preset name"),
    scale: PresetScale = typer.Option(
        PresetScale.DESK, "--scale", case_sensitive=False, help="Image scale"
    ),
    out: Optional[Path] = typer.Option(
        None, "--out", help="Write the config here instead of stdout"
    ),
) -> None:
    """Emit a built-in config."""
    try:
        cfg = get_preset(name, scale)
    except KeyError as e:
        fail(ConfigError(str(e.args[0])))

    document = serialize_config(cfg) + "\n"
    if out is None:
        typer.echo(document, nl=False)
        return
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(document, encoding="utf-8")
    except OSError as e:
        fail(e)
    error_console.print(f"Wrote {name} ({scale.value}) to {out}")


@app.command()
def validate(
    config: Path = typer.Option(..., "--config", help="Simulation config (JSON)"),
) -> None:
    """Check a config and list every violated invariant."""
    try:
        cfg = load_config(config)
    except ConfigError as e:
        fail(e)

    console.print(
        f"[green]OK[/green] {cfg.width}x{cfg.height}, "
        f"{cfg.num_neighborhoods} neighborhoods, {cfg.num_phenotypes} phenotypes, "
        f"{cfg.num_markers} markers"
    )


if __name__ == "__main__":
    app()
