import logging
from pathlib import Path

from cli.common import load_run, map_items
from core.errors import ConfigError
from services import export
from services.fattorini import merge_zeros, scan_alpha
from services.spectra import find_dispersion_roots

logger = logging.getLogger(__name__)

NAME = "scan-alpha"
HELP = "zeros of the multiplier determinant along the diffusivity"


def run(config: Path, out: Path) -> None:
    ctx = load_run(NAME, config, out)
    p, policy = ctx.params, ctx.policy
    scan, k_list = ctx.options.scan, ctx.options.spectra.k_list
    if scan.alpha_lo is None or scan.alpha_hi is None:
        raise ConfigError("scan.alpha_lo and scan.alpha_hi are required for scan-alpha")
    interval = (scan.alpha_lo, scan.alpha_hi)
    if not 0 < interval[0] < interval[1] < p.nu:
        raise ConfigError(f"scan interval {interval} must lie inside (0, nu={p.nu})")

    roots = {k: find_dispersion_roots(k, p.L, max(scan.j_list), policy).roots for k in k_list}
    items = [(k, j) for k in k_list for j in scan.j_list]

    def compute(item):
        k, j = item
        lam = -p.nu * (k * k + roots[k][j - 1] ** 2)
        return scan_alpha(k, j, p.nu, p.L, interval, scan.grid_step, policy, lam=lam)

    reports = map_items(compute, items)

    zeros = [zero for report in reports for zero in report.zeros]
    ctx.write_csv("alpha_zeros.csv", export.ZEROS_HEADER, export.zero_rows(zeros))
    ctx.write_json("alpha_scan.json", {"reports": reports, "exceptional_set": merge_zeros(reports)})
    logger.info(f"scan-alpha: {len(zeros)} zero(s) over {len(items)} (k, j) pairs")
    ctx.finish("scan")
