import argparse
from pathlib import Path

from cli.commands import control, detcheck, scan_alpha, spectra, verdict

COMMANDS = (spectra, detcheck, scan_alpha, verdict, control)

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="channel-uc",
        description="Adjoint spectrum, unique-continuation verdicts and boundary control of the linearized Boussinesq channel"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for command in COMMANDS:
        sub = subparsers.add_parser(command.NAME, help=command.HELP)
        sub.add_argument("--config", type=Path, required=True, help="TOML run configuration")
        sub.add_argument("--out", type=Path, required=True, help="output directory")
        sub.set_defaults(handler=command.run)

    return parser
