"""Run the sidecar: ``embedsim-sidecar --config sidecar.toml``."""

from __future__ import annotations

import argparse
import logging
import sys

import uvicorn

from .app import create_app
from .config import default_config, load_config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="embedsim-sidecar", description=__doc__)
    parser.add_argument(
        "--config", help="TOML config; without it, serves only the mock model"
    )
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    cfg = load_config(args.config) if args.config else default_config()
    if args.host:
        cfg.host = args.host
    if args.port is not None:
        cfg.port = args.port
    uvicorn.run(create_app(cfg), host=cfg.host, port=cfg.port, log_level="warning")
    return 0


if __name__ == "__main__":
    sys.exit(main())
