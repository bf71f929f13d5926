import logging
from pathlib import Path

from cli.common import load_run
from core.errors import AcceptanceError, ConfigError
from services.adjoint import determinant_check

logger = logging.getLogger(__name__)

NAME = "detcheck"
HELP = "randomized comparison of det M with its closed form"


def run(config: Path, out: Path) -> None:
    ctx = load_run(NAME, config, out)
    opts = ctx.options.detcheck
    if opts.seed is None:
        raise ConfigError("missing key detcheck.seed")

    report = determinant_check(opts.samples, opts.seed, threshold=opts.max_rel_err, floor_rel=opts.floor_rel,
                               inject_degenerate=opts.inject_degenerate)
    ctx.write_json("detcheck.json", {"report": report, "passed": report.passed})
    ctx.finish(NAME)

    if not report.passed:
        raise AcceptanceError(
            f"max relative error {report.max_rel_err:.3e} exceeds {report.threshold:g} (seed={report.seed})")
