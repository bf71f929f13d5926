import logging
import sys

from cli.router import build_parser
from core.errors import ToolkitError
from core.logging_setup import setup_logging

logger = logging.getLogger(__name__)

def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging()

    try:
        args.handler(args.config, args.out)
    except ToolkitError as e:
        logger.error(f"{args.command} failed: {e.detail}")
        return e.exit_code

    return 0

if __name__ == "__main__":
    sys.exit(main())
