"""Shared plumbing for subcommands: config loading, output bookkeeping and the run manifest."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, TypeVar

from config.settings import get_settings
from core.config_parser import parse_config
from core.errors import ConfigError
from core.params import ChannelParams, TolerancePolicy
from models.run import RunManifest, RunOptions
from services import export

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

MANIFEST_NAME = "manifest.json"


@dataclass
class RunContext:
    name: str
    params: ChannelParams
    policy: TolerancePolicy
    options: RunOptions
    config_sha256: str
    out_dir: Path
    outputs: list[str] = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def write_csv(self, filename: str, header: list[str], rows: Iterable[Iterable]) -> Path:
        path = export.write_csv(self.out_dir / filename, header, rows)
        self.outputs.append(filename)
        return path

    def write_json(self, filename: str, payload: dict[str, Any]) -> Path:
        path = export.write_json(self.out_dir / filename, payload)
        self.outputs.append(filename)
        return path

    def finish(self, section: str | None = None) -> RunManifest:
        parameters = {"params": self.params, "tol": self.policy}
        if section is not None:
            parameters[section] = getattr(self.options, section)
        manifest = RunManifest(subcommand=self.name, parameters=export.to_jsonable(parameters),
                               config_sha256=self.config_sha256, outputs=sorted(self.outputs),
                               wall_time_s=time.perf_counter() - self.started)
        export.write_json(self.out_dir / MANIFEST_NAME, manifest.model_dump())
        logger.info(f"{self.name}: wrote {len(self.outputs)} file(s) to {self.out_dir}")
        return manifest


def load_run(name: str, config_path: Path, out_dir: Path) -> RunContext:
    try:
        raw = Path(config_path).read_bytes()
        text = raw.decode("utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {config_path}: {e}") from None
    except UnicodeDecodeError as e:
        raise ConfigError(f"config {config_path} is not UTF-8: {e}") from None

    params, policy, options = parse_config(text)
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory {out_dir}: {e}") from None
    logger.info(f"{name}: nu={params.nu}, alpha={params.alpha}, L={params.L}")
    return RunContext(name=name, params=params, policy=policy, options=options,
                      config_sha256=export.sha256_bytes(raw), out_dir=out_dir)


def map_items(fn: Callable[[T], R], items: list[T]) -> list[R]:
    """Ordered map over independent work items, threaded when max_workers > 1."""
    workers = get_settings().max_workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
