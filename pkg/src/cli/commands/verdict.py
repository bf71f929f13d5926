import logging
from pathlib import Path

import numpy as np

from cli.common import load_run, map_items
from models.spectral import Branch
from services import export
from services.adjoint import solve_eigenfunction
from services.fattorini import det_r_large_alpha, ibp_boundary_identity, two_control_verdict, uc_verdict
from services.spectra import find_dispersion_roots, merge_spectrum

logger = logging.getLogger(__name__)

NAME = "verdict"
HELP = "unique-continuation verdict for every computed eigenvalue"

VERDICT_HEADER = ["branch", "k", "j", "lambda", "status", "det_r_normalized", "obs_abs", "two_control"]
IDENTITY_COEFFS = (1.0, 1.0, 1.0)
LARGE_ALPHA_DOUBLINGS = 12


def run(config: Path, out: Path) -> None:
    ctx = load_run(NAME, config, out)
    p, policy = ctx.params, ctx.policy
    spectra, opts = ctx.options.spectra, ctx.options.verdict

    def compute(k: int):
        search = find_dispersion_roots(k, p.L, spectra.count_stokes, policy, ceiling=spectra.mu_ceiling)
        merged = merge_spectrum(k, p, spectra.count_stokes, spectra.count_dirichlet, policy, search=search)
        results = []
        for point in merged.points:
            eigenfunction = solve_eigenfunction(point, p, policy, N=opts.grid)
            verdict = uc_verdict(point, p, policy, eigenfunction=eigenfunction)
            extra = {}
            if point.branch is Branch.STOKES:
                if opts.two_control:
                    extra["two_control"] = two_control_verdict(point, p, policy, eigenfunction=eigenfunction)
                extra["identity_defect"] = ibp_boundary_identity(eigenfunction, IDENTITY_COEFFS, p).defect
                if not p.proof_regime:
                    alphas = p.alpha * 2.0 ** np.arange(LARGE_ALPHA_DOUBLINGS)
                    extra["large_alpha"] = det_r_large_alpha(point, p, alphas)
            results.append((eigenfunction, verdict, extra))
        return results

    rows, table = [], []
    for results in map_items(compute, spectra.k_list):
        for eigenfunction, verdict, extra in results:
            two = extra.get("two_control")
            table.append([verdict.branch, verdict.k, verdict.j, verdict.lam, verdict.status,
                          verdict.det_r_normalized, verdict.obs_abs, two.status if two else None])
            rows.append({"verdict": verdict, **extra})
            if opts.eigenfunctions:
                name = f"eigenfunction_{verdict.branch}_k{verdict.k}_j{verdict.j}.csv"
                ctx.write_csv(name, export.EIGENFUNCTION_HEADER, export.eigenfunction_rows(eigenfunction))

    ctx.write_csv("verdicts.csv", VERDICT_HEADER, table)
    ctx.write_json("verdicts.json", {"rows": rows, "proof_regime": p.proof_regime})
    counts = {}
    for row in table:
        counts[row[4]] = counts.get(row[4], 0) + 1
    logger.info(f"verdict: {counts}")
    ctx.finish(NAME)
