import logging
from pathlib import Path

import numpy as np

from cli.common import load_run, map_items
from services import export
from services.spectra import fd_stokes_oracle, find_dispersion_roots, merge_spectrum, sample_dispersion

logger = logging.getLogger(__name__)

NAME = "spectra"
HELP = "merged Stokes and Dirichlet spectrum per Fourier mode"

DISPERSION_SAMPLES = 1001


def run(config: Path, out: Path) -> None:
    ctx = load_run(NAME, config, out)
    p, policy, opts = ctx.params, ctx.policy, ctx.options.spectra

    def compute(k: int):
        search = find_dispersion_roots(k, p.L, opts.count_stokes, policy, ceiling=opts.mu_ceiling)
        merged = merge_spectrum(k, p, opts.count_stokes, opts.count_dirichlet, policy, search=search)
        oracle = fd_stokes_oracle(k, p, opts.oracle_N, opts.count_stokes) if opts.oracle_N else None
        return merged, oracle

    results = map_items(compute, opts.k_list)

    header = export.SPECTRUM_HEADER + (["oracle_lambda"] if opts.oracle_N else [])
    rows = [row for merged, oracle in results for row in export.spectrum_rows(merged, oracle)]
    ctx.write_csv("spectrum.csv", header, rows)

    samples = []
    for merged, _ in results:
        grid = np.linspace(0.0, merged.search.ceiling, DISPERSION_SAMPLES)
        samples.extend(sample_dispersion(merged.k, p.L, grid))
    ctx.write_csv("dispersion.csv", ["k", "mu_tilde", "D_scaled"], [[s.k, s.mu_tilde, s.value] for s in samples])

    modes = []
    for merged, oracle in results:
        modes.append({"k": merged.k, "points": merged.points, "coincidences": merged.coincidences,
                      "search": merged.search, "oracle_lambda": oracle})
    ctx.write_json("spectrum.json", {"modes": modes})
    ctx.finish(NAME)
