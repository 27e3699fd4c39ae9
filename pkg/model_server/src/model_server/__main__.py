"""Run the model server: ``python -m model_server [--config FILE] [--port N]``."""

import argparse

import uvicorn

from .app import create_app
from .config import ServerConfig


def main() -> None:
    parser = argparse.ArgumentParser(prog="model_server")
    parser.add_argument("--config", help="JSON server config file")
    parser.add_argument("--port", type=int, help="listen port (overrides config)")
    parser.add_argument("--host", default="127.0.0.1", help="bind address")
    args = parser.parse_args()
    config = ServerConfig.load(args.config, port=args.port)
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=config.port)


if __name__ == "__main__":
    main()
