"""Run the sidecar under uvicorn: `python -m embed_sidecar --port 8800`."""

import argparse

import uvicorn

from .app import create_app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="embed-sidecar",
                                     description="HTTP sentence-embedding service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8800)
    parser.add_argument("--model", help="encoder name (overrides EMBED_SIDECAR_MODEL)")
    args = parser.parse_args(argv)
    uvicorn.run(create_app(model_name=args.model), host=args.host, port=args.port,
                log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
