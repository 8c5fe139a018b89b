"""Console entry point."""

import json
import logging
import sys

from tcadist.cli.v1 import build_parser
from tcadist.core.config import configure_logging
from tcadist.core.errors import EXIT_SEMANTIC, ErrorCode, TcaError, create_error_response

logger = logging.getLogger(__name__)


def _report_error(payload: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(payload), file=sys.stderr)
        return
    error = payload["error"]
    details = error["details"]
    where = ""
    if "line" in details and "column" in details:
        where = f" (line {details['line']}, column {details['column']})"
    print(f"error: {error['code']}: {error['message']}{where}", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    """
    Parse arguments, dispatch to the command and map errors to exit codes.

    Returns:
        0 on success, 1 on a semantic failure, 2 on usage, I/O or parse errors
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level.upper() if args.log_level else None)
    logger.info("command %s started", args.command)
    try:
        code = args.handler(args)
    except TcaError as exc:
        logger.info("command %s failed: %s", args.command, exc.code)
        _report_error(exc.to_payload(), args.json)
        return exc.exit_code
    except Exception as exc:
        logger.exception("command %s crashed", args.command)
        payload = create_error_response(
            ErrorCode.INTERNAL_ERROR, "Internal error", {"error": str(exc)}
        )
        _report_error(payload, args.json)
        return EXIT_SEMANTIC
    logger.info("command %s finished with exit code %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
