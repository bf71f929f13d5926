"""CSV and JSON writers with a fixed, byte-stable layout."""
import csv
import hashlib
import json
import logging
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Iterable

import numpy as np
from pydantic import BaseModel

from models.adjoint import AdjointEigenfunction
from models.fattorini import AlphaZero
from models.galerkin import ModeSystem, Trajectory
from models.run import SCHEMA_VERSION
from models.spectral import MergedSpectrum

logger = logging.getLogger(__name__)


def format_float(value: float) -> str:
    return format(float(value), ".17g")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows: Iterable[Iterable]) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(value) for value in row])
    logger.debug(f"Wrote {path}")
    return path


def to_jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if isinstance(value, dict):
        return {str(key.value if isinstance(key, Enum) else key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(item) for item in value.tolist()]
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return value.as_posix()
    if isinstance(value, datetime):
        return value.isoformat()
    return value


def dump_json(payload: dict[str, Any]) -> str:
    document = {"schema_version": SCHEMA_VERSION, **to_jsonable(payload)}
    return json.dumps(document, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    with open(path, "w", newline="\n", encoding="utf-8") as handle:
        handle.write(dump_json(payload))
    logger.debug(f"Wrote {path}")
    return path


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


SPECTRUM_HEADER = ["branch", "k", "j", "lambda", "mu1_re", "mu1_im", "mu2_re", "mu2_im"]


def spectrum_rows(spectrum: MergedSpectrum, oracle: list[float] | None = None) -> list[list]:
    rows = []
    for point in spectrum.points:
        row = [point.branch.value, point.k, point.j, point.lam,
               point.mu1.real, point.mu1.imag, point.mu2.real, point.mu2.imag]
        if oracle is not None:
            stokes = point.branch.value == "stokes" and point.j <= len(oracle)
            row.append(oracle[point.j - 1] if stokes else "")
        rows.append(row)
    return rows


def eigenfunction_rows(eigenfunction: AdjointEigenfunction) -> list[list]:
    columns = [eigenfunction.xi, eigenfunction.dxi, eigenfunction.psi1, eigenfunction.psi2, eigenfunction.q]
    rows = []
    for i, x in enumerate(eigenfunction.x2):
        row = [x]
        for column in columns:
            row.extend([column[i].real, column[i].imag])
        rows.append(row)
    return rows


EIGENFUNCTION_HEADER = ["x2", "xi_re", "xi_im", "dxi_re", "dxi_im", "psi1_re", "psi1_im",
                        "psi2_re", "psi2_im", "q_re", "q_im"]

ZEROS_HEADER = ["k", "j", "alpha_zero", "residual", "bracket_lo", "bracket_hi", "confirmed", "tag"]


def zero_rows(zeros: list[AlphaZero]) -> list[list]:
    return [[z.k, z.j, z.alpha, z.residual, z.bracket[0], z.bracket[1], z.confirmed, z.tag] for z in zeros]


TRAJECTORY_HEADER = ["t", "stokes_energy", "heat_norm", "h_re", "h_im", "flux_re", "flux_im"]


def trajectory_rows(system: ModeSystem, trajectory: Trajectory) -> list[list]:
    rows = []
    for t, state, h in zip(trajectory.times, trajectory.states, trajectory.controls):
        flux = system.heat_flux(state, h)
        rows.append([t, system.stokes_energy(state), system.heat_norm(state), h.real, h.imag, flux.real, flux.imag])
    return rows


GRAMIAN_HEADER = ["index", "singular_value"]


def gramian_rows(singular_values: np.ndarray) -> list[list]:
    return [[i, s] for i, s in enumerate(singular_values, start=1)]
