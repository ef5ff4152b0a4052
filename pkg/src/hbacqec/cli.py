"""Command-line entry point: ``hbacqec <experiment> [options]``.

Options may also come from a JSON file given with ``--config``; keys are the
:class:`~hbacqec.experiments.ExperimentSpec` field names (dashes or
underscores) and command-line flags take precedence.

Exit status: 0 on success, 2 for an invalid specification, 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .experiments import EXPERIMENTS, ExperimentSpec, SpecError, emit, run_experiment

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3

log = logging.getLogger("hbacqec")


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _common(parser: argparse.ArgumentParser) -> None:
    s = argparse.SUPPRESS
    parser.add_argument("--config", default=s, help="JSON file with spec fields")
    parser.add_argument("--output", "-o", default=s, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=s)
    parser.add_argument("--b0", type=float, default=s, help="field in tesla")
    parser.add_argument("--gamma", type=float, default=s, help="gyromagnetic ratio in rad/s/T")
    parser.add_argument("--p-min", type=float, default=s)
    parser.add_argument("--p-max", type=float, default=s)
    parser.add_argument("--p-steps", type=int, default=s)
    parser.add_argument("--q", type=float, default=s, help="ancilla mixing parameter")
    parser.add_argument("--c", type=float, default=s, help="depolarizing gate error")
    parser.add_argument("--c-max", type=float, default=s)
    parser.add_argument("--c-steps", type=int, default=s)
    parser.add_argument("--temp-min", type=float, default=s, help="kelvin")
    parser.add_argument("--temp-max", type=float, default=s, help="kelvin")
    parser.add_argument("--temp-steps", type=int, default=s)
    parser.add_argument("--temperature", type=float, default=s, help="bath temperature in kelvin")
    parser.add_argument("--eps", type=float, default=s, help="bath polarization (overrides temperature)")
    parser.add_argument("--iters", type=int, default=s)
    parser.add_argument("--init-iters", type=int, default=s)
    parser.add_argument("--rounds", type=int, default=s)
    parser.add_argument("--n-qubits", type=int, default=s)
    parser.add_argument("--initial", choices=("mixed", "bath"), default=s)
    parser.add_argument("--protocol", choices=("four", "six"), default=s)
    parser.add_argument("--code", choices=("traditional", "optimal"), default=s)
    parser.add_argument("--theta", type=float, default=s)
    parser.add_argument("--phi", type=float, default=s)
    parser.add_argument("--dephase-during-refresh", type=_bool, default=s, metavar="{true|false}")
    parser.add_argument("--gate-fidelities", type=_floats, default=s, metavar="F1,F2,...")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hbacqec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        _common(sub.add_parser(name))
    return parser


_SPEC_FIELDS = {f.name for f in dataclasses.fields(ExperimentSpec)} - {"experiment"}


def _load_config(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise SpecError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in raw.items()}


def spec_from_args(args: argparse.Namespace) -> tuple[ExperimentSpec, str | None, str]:
    opts = vars(args).copy()
    experiment = opts.pop("experiment")
    opts.pop("verbose", None)
    merged = _load_config(opts.pop("config")) if "config" in opts else {}
    merged.update(opts)
    output = merged.pop("output", None)
    fmt = merged.pop("format", "csv")
    unknown = set(merged) - _SPEC_FIELDS
    if unknown:
        raise SpecError(f"unknown option(s): {', '.join(sorted(unknown))}")
    if "gate_fidelities" in merged:
        merged["gate_fidelities"] = tuple(merged["gate_fidelities"])
    try:
        spec = ExperimentSpec(experiment=experiment, **merged)
    except TypeError as exc:
        raise SpecError(str(exc)) from None
    return spec, output, fmt


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        spec, output, fmt = spec_from_args(args)
        if fmt not in ("csv", "json"):
            raise SpecError(f"unknown output format {fmt!r}")
    except OSError as exc:
        print(f"hbacqec: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpecError, ValueError, json.JSONDecodeError) as exc:
        print(f"hbacqec: invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID

    log.info("running %s", spec.experiment)
    try:
        table = run_experiment(spec)
    except ValueError as exc:
        print(f"hbacqec: invalid spec: {exc}", file=sys.stderr)
        return EXIT_INVALID

    if output is None:
        sys.stdout.write(table.to_csv() if fmt == "csv" else table.to_json())
        return EXIT_OK
    try:
        emit(table, fmt, output)
    except OSError as exc:
        print(f"hbacqec: cannot write {output}: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %d rows to %s", len(table.rows), output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
