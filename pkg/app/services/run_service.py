import hashlib
import logging
from typing import Dict, Iterable, List, Optional, Tuple

from sqlalchemy import select
from sqlalchemy.orm import Session, selectinload

from app.config import get_settings
from app.database import get_db, init_db
from app.exceptions import ManifestError
from app.models.run import RunMetric, RunRecord
from app.schemas.graph import SizeReport
from app.schemas.run import RunListItem, RunManifest
from app.schemas.training import TrainConfig
from app.services.graph_service import utf8_lines

logger = logging.getLogger(__name__)

MetricRow = Tuple[str, Optional[int], float]

GRAPH_OPTIONS = ("undirected", "typed")


def file_digest(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _flatten_config(cfg: TrainConfig) -> Dict[str, str]:
    flat = {}
    for key, value in cfg.model_dump(mode="json").items():
        if value is None:
            flat[key] = ""
        elif isinstance(value, list):
            flat[key] = ",".join(str(v) for v in value)
        else:
            flat[key] = str(value)
    return flat


class RunService:

    @staticmethod
    def build_manifest(cfg: TrainConfig, inputs: Dict[str, str], duration_seconds: float,
                       size_report: Optional[SizeReport] = None,
                       graph_options: Optional[Dict[str, bool]] = None) -> RunManifest:
        config = _flatten_config(cfg)
        for key, value in (graph_options or {}).items():
            config[key] = str(bool(value))
        return RunManifest(
            command="train",
            config=config,
            inputs=dict(inputs),
            digests={role: file_digest(path) for role, path in inputs.items()},
            seed=cfg.seed,
            duration_seconds=duration_seconds,
            size_report=size_report,
        )

    @staticmethod
    def manifest_lines(manifest: RunManifest) -> List[str]:
        lines = [
            f"command={manifest.command}",
            f"seed={manifest.seed}",
            f"duration_seconds={manifest.duration_seconds:.6f}",
        ]
        lines += [f"config.{key}={value}" for key, value in manifest.config.items()]
        for role, path in manifest.inputs.items():
            lines.append(f"input.{role}={path}")
            if role in manifest.digests:
                lines.append(f"input.{role}.sha256={manifest.digests[role]}")
        if manifest.size_report is not None:
            lines += [f"size.{key}={value}" for key, value in manifest.size_report.model_dump().items()]
        return lines

    @staticmethod
    def write_manifest(path, manifest: RunManifest) -> None:
        with open(path, "w", encoding="utf-8") as out:
            out.write("\n".join(RunService.manifest_lines(manifest)) + "\n")

    @staticmethod
    def read_manifest(path) -> RunManifest:
        fields: Dict[str, str] = {}
        try:
            lines = utf8_lines(path, lambda n, detail: ManifestError(f"{path}: line {n}: {detail}"))
            for line_number, line in enumerate(lines, start=1):
                line = line.rstrip("\r\n")
                if not line.strip():
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise ManifestError(f"{path}: line {line_number} is not key=value")
                fields[key.strip()] = value
        except OSError as e:
            raise ManifestError(f"Cannot read manifest {path}: {e}") from None

        config = {k[len("config."):]: v for k, v in fields.items() if k.startswith("config.")}
        inputs, digests = {}, {}
        for key, value in fields.items():
            if not key.startswith("input."):
                continue
            role = key[len("input."):]
            if role.endswith(".sha256"):
                digests[role[:-len(".sha256")]] = value
            else:
                inputs[role] = value
        size = {k[len("size."):]: int(v) for k, v in fields.items() if k.startswith("size.")}
        try:
            return RunManifest(
                command=fields.get("command", "train"),
                config=config,
                inputs=inputs,
                digests=digests,
                seed=int(fields["seed"]),
                duration_seconds=float(fields.get("duration_seconds", 0.0)),
                size_report=SizeReport(**size) if size else None,
            )
        except (KeyError, ValueError) as e:
            raise ManifestError(f"{path}: incomplete manifest ({e})") from None

    @staticmethod
    def config_overrides(manifest: RunManifest) -> Dict[str, object]:
        """Manifest config values as TrainConfig keyword arguments."""
        overrides: Dict[str, object] = {}
        for key, value in manifest.config.items():
            if key in GRAPH_OPTIONS:
                continue
            if key not in TrainConfig.model_fields:
                logger.warning(f"Ignoring unknown manifest key config.{key}")
                continue
            if key == "walklets_offsets":
                overrides[key] = [int(v) for v in value.split(",")] if value else None
            else:
                overrides[key] = value
        return overrides

    @staticmethod
    def record_run(db: Session, command: str, model: Optional[str] = None, output_path: Optional[str] = None,
                   seed: Optional[int] = None, duration_seconds: Optional[float] = None,
                   manifest: Optional[RunManifest] = None, metrics: Iterable[MetricRow] = ()) -> RunRecord:
        record = RunRecord(
            command=command,
            model=model,
            output_path=output_path,
            seed=seed,
            duration_seconds=duration_seconds,
            manifest="\n".join(RunService.manifest_lines(manifest)) if manifest else None,
        )
        for name, k, value in metrics:
            record.metrics.append(RunMetric(name=name, k=k, value=value))
        db.add(record)
        db.commit()
        db.refresh(record)
        logger.info(f"Recorded {command} run {record.id}")
        return record

    @staticmethod
    def list_runs(db: Session, limit: int = 20) -> List[RunListItem]:
        stmt = (
            select(RunRecord)
            .options(selectinload(RunRecord.metrics))
            .order_by(RunRecord.created_at.desc())
            .limit(limit)
        )
        items = []
        for record in db.execute(stmt).scalars().all():
            metrics = {
                (f"{m.name}@{m.k}" if m.k is not None else m.name): m.value
                for m in record.metrics
            }
            items.append(RunListItem(
                id=record.id,
                command=record.command,
                model=record.model,
                output_path=record.output_path,
                seed=record.seed,
                duration_seconds=record.duration_seconds,
                metrics=metrics,
            ))
        return items

    @staticmethod
    def record_if_enabled(**kwargs) -> Optional[RunRecord]:
        if not get_settings().RECORD_RUNS:
            return None
        init_db()
        with get_db() as db:
            return RunService.record_run(db, **kwargs)
