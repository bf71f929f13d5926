import logging
from pathlib import Path

import numpy as np

from cli.common import load_run
from core.errors import AcceptanceError, ConfigError
from services import export
from services.galerkin import (assemble_mode_system, random_unit_state, simulate, synthesize_control, truncate,
                               zero_mode_obstruction)

logger = logging.getLogger(__name__)

NAME = "control"
HELP = "least-squares boundary control experiment for one Fourier mode"


def run(config: Path, out: Path) -> None:
    ctx = load_run(NAME, config, out)
    p, opts = ctx.params, ctx.options.control
    if opts.seed is None:
        raise ConfigError("missing key control.seed")
    rng = np.random.default_rng(opts.seed)

    system = assemble_mode_system(opts.k, p, opts.N, opts.dt, opts.T)
    if not opts.full_grid:
        system = truncate(system, opts.n_u, opts.n_theta)

    x0 = np.zeros(system.size, dtype=complex) if opts.x0 == "zero" else random_unit_state(system, rng)
    if opts.target == "free":
        target = simulate(system, x0).terminal
    else:
        target = random_unit_state(system, rng)

    experiment = synthesize_control(system, x0, target, opts.segments, opts.ridge)
    trajectory = simulate(system, x0, experiment.control)
    zero_mode = zero_mode_obstruction(p, opts.N, opts.segments, rng, opts.dt, opts.T) if opts.zero_mode else None

    segment_length = opts.T / opts.segments
    ctx.write_csv("trajectory.csv", export.TRAJECTORY_HEADER, export.trajectory_rows(system, trajectory))
    ctx.write_csv("gramian.csv", export.GRAMIAN_HEADER, export.gramian_rows(experiment.gramian_sv))
    ctx.write_csv("control_signal.csv", ["segment", "t_start", "h_re", "h_im"],
                  [[i, i * segment_length, h.real, h.imag] for i, h in enumerate(experiment.control.values)])
    ctx.write_json("control.json", {
        "k": opts.k,
        "truncation": [system.velocity_size, system.size - system.velocity_size],
        "achieved_eps": experiment.achieved_eps,
        "eps_bound": opts.eps_bound,
        "control_norm": experiment.control_norm,
        "sigma_min": experiment.sigma_min,
        "gramian_sv": experiment.gramian_sv,
        "control": experiment.control.values,
        "zero_mode": zero_mode,
    })
    ctx.finish(NAME)

    if experiment.achieved_eps > opts.eps_bound:
        raise AcceptanceError(f"achieved_eps={experiment.achieved_eps:.3e} exceeds eps_bound={opts.eps_bound:g}")
