"""Cohort generation: simulate, render, measure and write every seed."""

import asyncio
import hashlib
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError

from tme_simulator.analysis import cell_table, compute_metrics
from tme_simulator.config import settings
from tme_simulator.exceptions import CohortError, FormatError, SimulatorError
from tme_simulator.exporters import (
    INSTANCE_MAXVAL,
    MASK_MAXVAL,
    decode_cell_coverage,
    encode_csv,
    encode_multiplex,
    encode_pgm,
    read_bytes,
    read_label_mask,
    read_multiplex,
    telemetry_frame,
    write_bytes,
    write_report,
)
from tme_simulator.models import (
    DatasetManifest,
    FileRecord,
    ImageRecord,
    MetricsReport,
    MultiplexImage,
    NeighborhoodMask,
    PhenotypeState,
    SimulationConfig,
    TelemetrySeries,
)
from tme_simulator.rendering import render_multiplex
from tme_simulator.simulation import run_neighborhood_model, run_phenotype_model
from tme_simulator.utils import LoggerMixin, RandomStream, setup_logging

PathLike = Union[str, Path]
MANIFEST_NAME = "manifest.json"


@dataclass
class SimulationResult:
    """Everything generated for one seed."""

    seed: int
    neighborhoods: NeighborhoodMask
    neighborhood_telemetry: TelemetrySeries
    phenotypes: PhenotypeState
    phenotype_telemetry: TelemetrySeries
    image: MultiplexImage
    report: MetricsReport


def simulate_image(
    cfg: SimulationConfig, seed: int, max_iterations: Optional[int] = None
) -> SimulationResult:
    """Run the full per-image pipeline for ``seed``.

    Each stage draws from its own substream, so the result depends only on
    ``(cfg, seed)``.
    """
    stream = RandomStream(seed)
    nb, nb_telemetry = run_neighborhood_model(
        cfg, stream.generator("neighborhoods"), max_iterations
    )
    state, ph_telemetry = run_phenotype_model(
        cfg, nb, stream.generator("phenotypes"), max_iterations
    )
    image = render_multiplex(state, cfg, stream)
    report = compute_metrics(cfg, nb, state, image)
    return SimulationResult(seed, nb, nb_telemetry, state, ph_telemetry, image, report)


def image_directory(index: int, seed: int) -> str:
    return f"image_{index:03d}_seed_{seed}"


def _record(root: Path, path: Path, data: bytes) -> FileRecord:
    return FileRecord(
        path=path.relative_to(root).as_posix(),
        bytes=len(data),
        sha256=hashlib.sha256(data).hexdigest(),
    )


class CohortGenerator(LoggerMixin):
    """Generates a cohort of images for a list of seeds.

    Seeds are simulated in worker processes when more than one worker is
    configured; files of each image are written as soon as it is ready and
    the manifest is written last.
    """

    def __init__(
        self,
        cfg: SimulationConfig,
        workers: Optional[int] = None,
        telemetry: bool = False,
    ) -> None:
        self.cfg = cfg
        self.workers = workers or settings.worker_processes
        self.telemetry = telemetry
        self._executor: Optional[Executor] = None
        self._slots: Optional[asyncio.Semaphore] = None

    async def __aenter__(self) -> "CohortGenerator":
        """Async context manager entry."""
        if self.workers > 1:
            self._executor = ProcessPoolExecutor(
                max_workers=self.workers, initializer=setup_logging
            )
        self._slots = asyncio.Semaphore(self.workers)
        return self

    async def __aexit__(self, exc_type: Any, exc_val: Any, exc_tb: Any) -> None:
        """Async context manager exit."""
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    async def generate(
        self,
        seeds: Sequence[int],
        out_dir: PathLike,
        on_image: Optional[Callable[[ImageRecord], None]] = None,
    ) -> DatasetManifest:
        """Simulate every seed and write the cohort under ``out_dir``."""
        root = Path(out_dir)
        context = self.log_operation(
            "generate_cohort",
            seeds=list(seeds),
            out_dir=str(root),
            workers=self.workers,
        )
        try:
            try:
                root.mkdir(parents=True, exist_ok=True)
            except OSError as e:
                raise FormatError(
                    f"cannot create output directory {root}: {e.strerror or e}"
                ) from e
            records = await asyncio.gather(
                *(
                    self._generate_image(index, seed, root, on_image)
                    for index, seed in enumerate(seeds)
                )
            )
            manifest = DatasetManifest(
                config=self.cfg, seeds=list(seeds), images=list(records)
            )
            try:
                await write_bytes(
                    root / MANIFEST_NAME,
                    (manifest.model_dump_json(indent=2) + "\n").encode("utf-8"),
                )
            except OSError as e:
                raise FormatError(
                    f"cannot write manifest {root / MANIFEST_NAME}: {e.strerror or e}"
                ) from e
            self.log_success(context, images=len(records))
            return manifest
        except Exception as e:
            self.log_error(context, e)
            raise

    async def _generate_image(
        self,
        index: int,
        seed: int,
        root: Path,
        on_image: Optional[Callable[[ImageRecord], None]],
    ) -> ImageRecord:
        if self._slots is None:
            raise RuntimeError("CohortGenerator used outside its context manager")
        loop = asyncio.get_running_loop()
        try:
            async with self._slots:
                result = await loop.run_in_executor(
                    self._executor, simulate_image, self.cfg, seed
                )
            record = await self._write_image(index, result, root)
        except (SimulatorError, OSError) as e:
            raise CohortError(seed, e) from e

        self.logger.info(
            "Image generated",
            seed=seed,
            directory=record.directory,
            cells=record.num_cells,
        )
        if on_image is not None:
            on_image(record)
        return record

    async def _write_image(
        self, index: int, result: SimulationResult, root: Path
    ) -> ImageRecord:
        directory = root / image_directory(index, result.seed)
        files: Dict[str, FileRecord] = {}

        async def emit(role: str, name: str, data: bytes) -> None:
            path = directory / name
            await write_bytes(path, data)
            files[role] = _record(root, path, data)

        await emit(
            "neighborhoods",
            "neighborhoods.pgm",
            encode_pgm(result.neighborhoods.labels, MASK_MAXVAL),
        )
        await emit(
            "phenotypes",
            "phenotypes.pgm",
            encode_pgm(result.phenotypes.labels, MASK_MAXVAL),
        )
        await emit(
            "instances",
            "instances.pgm",
            encode_pgm(result.phenotypes.instance_ids, INSTANCE_MAXVAL),
        )
        payload, sidecar = encode_multiplex(result.image)
        await emit("multiplex", "multiplex.raw", payload)
        await emit("multiplex_sidecar", "multiplex.json", sidecar)
        await emit("cells", "cells.csv", encode_csv(cell_table(result.phenotypes)))

        if self.telemetry:
            await emit(
                "telemetry_neighborhoods",
                "telemetry_neighborhoods.csv",
                encode_csv(telemetry_frame(result.neighborhood_telemetry)),
            )
            await emit(
                "telemetry_phenotypes",
                "telemetry_phenotypes.csv",
                encode_csv(telemetry_frame(result.phenotype_telemetry)),
            )

        written = await write_report(result.report, self.cfg, directory / "metrics")
        for name, data in written.items():
            files[f"metrics/{name}"] = _record(root, directory / "metrics" / name, data)

        return ImageRecord(
            index=index,
            seed=result.seed,
            directory=directory.relative_to(root).as_posix(),
            neighborhood_iterations=len(result.neighborhood_telemetry),
            phenotype_iterations=len(result.phenotype_telemetry),
            num_cells=result.phenotypes.num_cells,
            files=files,
        )


async def generate_cohort(
    cfg: SimulationConfig,
    seeds: Sequence[int],
    out_dir: PathLike,
    telemetry: bool = False,
    workers: Optional[int] = None,
    on_image: Optional[Callable[[ImageRecord], None]] = None,
) -> DatasetManifest:
    """Generate one image per seed and return the written manifest."""
    async with CohortGenerator(cfg, workers=workers, telemetry=telemetry) as generator:
        return await generator.generate(seeds, out_dir, on_image=on_image)


def load_manifest(path: PathLike) -> DatasetManifest:
    try:
        return DatasetManifest.model_validate_json(Path(path).read_bytes())
    except OSError as e:
        raise FormatError(f"cannot read manifest {path}: {e.strerror or e}") from e
    except ValidationError as e:
        raise FormatError(f"malformed manifest {path}: {e}") from e


def verify_manifest(manifest: DatasetManifest, root: PathLike) -> List[str]:
    """Problems found re-hashing every file listed in ``manifest``."""
    root = Path(root)
    problems: List[str] = []
    for image in manifest.images:
        for role, record in sorted(image.files.items()):
            path = root / record.path
            if not path.is_file():
                problems.append(f"{record.path}: missing")
                continue
            data = path.read_bytes()
            if len(data) != record.bytes:
                problems.append(
                    f"{record.path}: {len(data)} bytes, expected {record.bytes}"
                )
            elif hashlib.sha256(data).hexdigest() != record.sha256:
                problems.append(f"{record.path}: checksum mismatch")
    return problems


async def load_image(
    image: ImageRecord, root: Path
) -> Tuple[NeighborhoodMask, PhenotypeState, MultiplexImage]:
    """Masks, cell state and multiplex volume of a stored image."""
    labels = await read_label_mask(root / image.files["neighborhoods"].path)
    phenotypes = await read_label_mask(root / image.files["phenotypes"].path)
    instances = await read_label_mask(root / image.files["instances"].path)
    multiplex = await read_multiplex(root / image.files["multiplex"].path)
    coverage = decode_cell_coverage(await read_bytes(root / image.files["cells"].path))

    nb = NeighborhoodMask(labels, np.zeros(labels.shape, dtype=bool))
    state = PhenotypeState(
        labels=phenotypes,
        unassigned=np.zeros(phenotypes.shape, dtype=bool),
        instance_ids=instances,
        stamp_coverage=coverage,
    )
    return nb, state, multiplex


async def recompute_statistics(
    manifest_path: PathLike, out_dir: PathLike
) -> List[MetricsReport]:
    """Recompute the metrics of a stored cohort from its files.

    Reports are written under ``out_dir`` with the same relative layout as
    the cohort's ``metrics`` directories.
    """
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    manifest = load_manifest(manifest_path)
    problems = verify_manifest(manifest, root)
    if problems:
        raise FormatError(
            "manifest does not match files on disk: " + "; ".join(problems)
        )

    reports = []
    for image in manifest.images:
        nb, state, multiplex = await load_image(image, root)
        report = compute_metrics(manifest.config, nb, state, multiplex)
        await write_report(
            report, manifest.config, Path(out_dir) / image.directory / "metrics"
        )
        reports.append(report)
    return reports
