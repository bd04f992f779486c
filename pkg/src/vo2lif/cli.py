"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import loads_flat, parse_value
from .errors import ConfigError, InvalidInputError
from .output import emit_csv, fmt
from .scenarios import PresetName, RunArtifact, preset_document, run_document

log = logging.getLogger("vo2lif")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _overrides(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"expected key=value, got {pair!r}", key="--set")
        out[key.strip()] = parse_value(value.strip())
    return out


def _read(path: str) -> dict:
    return loads_flat(Path(path).read_text(encoding="utf-8"))


def _finish(artifact: RunArtifact, args) -> None:
    out = Path(args.out)
    emit_csv(artifact, out)
    if args.figures:
        from .plotting import render_figures
        render_figures(artifact, out)
    for key, value in artifact.summary.items():
        print(f"{key} = {fmt(value)}")
    log.info("wrote %s", out)


def cmd_simulate(args) -> RunArtifact:
    return run_document(_read(args.config), workers=args.workers)


def cmd_preset(args) -> RunArtifact:
    return run_document(preset_document(args.name, _overrides(args.set)), workers=args.workers)


def cmd_sweep(args) -> RunArtifact:
    doc = _read(args.config)
    doc.setdefault("scenario.name", "sweep")
    doc["scenario.dt_start_ns"] = parse_value(args.dt_start)
    doc["scenario.dt_end_ns"] = parse_value(args.dt_end)
    doc["scenario.dt_step_ns"] = parse_value(args.dt_step)
    if args.emitters:
        doc["scenario.emitters"] = args.emitters
    if args.target:
        doc["scenario.target"] = args.target
    return run_document(doc, workers=args.workers)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vo2lif", description="Thermally coupled VO2 neuron simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory (default: ./out)")
        p.add_argument("--figures", action="store_true", help="also render PNG figures")
        p.add_argument("--workers", type=int, default=None, help="processes for sweeps")

    p = sub.add_parser("simulate", help="run a configuration file")
    p.add_argument("config")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("preset", help="run a named preset")
    p.add_argument("name", choices=[n.value for n in PresetName])
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    common(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("sweep", help="sweep the delay between two emitter pulses")
    p.add_argument("config")
    p.add_argument("--dt-start", required=True, metavar="NS")
    p.add_argument("--dt-end", required=True, metavar="NS")
    p.add_argument("--dt-step", required=True, metavar="NS")
    p.add_argument("--emitters", metavar="ID1,ID2")
    p.add_argument("--target", metavar="ID")
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        artifact = args.func(args)
    except (ConfigError, InvalidInputError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        _finish(artifact, args)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
