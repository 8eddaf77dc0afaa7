"""Command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 channel not incoherent,
3 invalid channel (validation or numerical constraint failure).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .channel import BlochVector, QubitChannel, check_choi, choi, load_channel
from .classify import GALLERY_NAMES, gallery, is_sio_channel, report
from .complexmat import hermitian_eigen
from .decompose import decompose_io, io_membership
from .errors import ConstraintViolation, InvalidChannel, NotIncoherentChannel, NoValidRoot
from .sampler import SamplerConfig, achievable_region, chunk_rng, sample_io_params

EXIT_OK, EXIT_USAGE, EXIT_NOT_IO, EXIT_INVALID = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(text: str, path) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def _load(args, validate: bool = True) -> QubitChannel:
    if args.example:
        try:
            return gallery(args.example, args.theta, args.phi)
        except KeyError:
            raise CliError(EXIT_USAGE, f"unknown example {args.example!r}; available: {', '.join(GALLERY_NAMES)}")
    if not args.input:
        raise CliError(EXIT_USAGE, "no input channel (give a JSON path or --example NAME)")
    try:
        return load_channel(args.input, validate=validate)
    except InvalidChannel as exc:
        raise CliError(EXIT_INVALID, f"invalid channel: {exc}")
    except (OSError, ValueError) as exc:
        raise CliError(EXIT_USAGE, f"cannot read channel from {args.input}: {exc}")


def cmd_decompose(args) -> int:
    ch = _load(args)
    if ch.dim != 2:
        raise CliError(EXIT_USAGE, "decompose supports qubit channels only")
    m = choi(ch)
    try:
        sol = decompose_io(m, args.tolerance)
    except NotIncoherentChannel as exc:
        raise CliError(EXIT_NOT_IO, str(exc))
    except (ConstraintViolation, NoValidRoot) as exc:
        raise CliError(EXIT_INVALID, f"decomposition failed: {exc}")
    out = sol.to_json()
    out["dim"] = 2
    _emit(_dumps(out), args.output)
    return EXIT_OK


def cmd_classify(args) -> int:
    ch = _load(args)
    try:
        rep = report(ch, args.tolerance)
    except (ConstraintViolation, NoValidRoot) as exc:
        raise CliError(EXIT_INVALID, f"classification failed: {exc}")
    out = rep.to_json()
    if not args.full:
        out.pop("decomposition")
    _emit(_dumps(out), args.output)
    return EXIT_OK


def _short_exp(x: float) -> str:
    mant, exp = f"{x:.1e}".split("e")
    return f"{mant}e{int(exp)}"


def cmd_verify(args) -> int:
    ch = _load(args, validate=False)
    m = choi(ch)
    w, _ = hermitian_eigen(m)
    failures = []
    if ch.completeness_residual > 1e-8:
        failures.append(f"completeness residual {_short_exp(ch.completeness_residual)}")
    failures.extend(f"Choi matrix: {p}" for p in check_choi(m, 1e-8))
    out = {
        "dim": ch.dim,
        "num_operators": len(ch),
        "completeness_residual": ch.completeness_residual,
        "choi_min_eigenvalue": float(w[-1]),
        "valid": not failures,
        "failures": failures,
    }
    if ch.dim == 2:
        out["patterns"] = [p.value for p in ch.patterns(args.tolerance)]
        out["io_structure"] = io_membership(m, args.tolerance)
        out["sio_structure"] = out["io_structure"] and is_sio_channel(m, args.tolerance)
    _emit(_dumps(out), args.output)
    if failures:
        for f in failures:
            print(f, file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def _parse_initial(text: str) -> BlochVector:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise CliError(EXIT_USAGE, f"--initial must be three comma-separated numbers, got {text!r}")
    if len(parts) != 3:
        raise CliError(EXIT_USAGE, f"--initial must have three components, got {len(parts)}")
    try:
        return BlochVector(*parts)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, f"invalid initial Bloch vector: {exc}")


def cmd_region(args) -> int:
    initial = _parse_initial(args.initial)
    try:
        cfg = SamplerConfig(seed=args.seed, count=args.count)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc))
    result = achievable_region(cfg, initial, workers=args.workers)
    _emit(result.to_csv(), args.output)
    if args.svg:
        from .plotting import write_region_svg

        write_region_svg(result, args.svg)
    if args.figure:
        from .plotting import plot_region

        plot_region(result, args.figure)
    return EXIT_OK


def cmd_sample(args) -> int:
    try:
        cfg = SamplerConfig(seed=args.seed, count=args.count)
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc))
    r, alpha, beta = sample_io_params(chunk_rng(cfg.seed, 0), cfg.count)
    forms = [
        {"form": "io4", "r": float(r[i]), "alpha": alpha[i].tolist(), "beta": [[z.real, z.imag] for z in beta[i]]}
        for i in range(cfg.count)
    ]
    _emit(_dumps({"config": cfg.to_json(), "channels": forms}), args.output)
    return EXIT_OK


def cmd_examples(args) -> int:
    if args.name is None:
        _emit("\n".join(GALLERY_NAMES) + "\n", args.output)
        return EXIT_OK
    try:
        ch = gallery(args.name, args.theta, args.phi)
    except KeyError:
        raise CliError(EXIT_USAGE, f"unknown example {args.name!r}; available: {', '.join(GALLERY_NAMES)}")
    _emit(_dumps(ch.to_json()), args.output)
    return EXIT_OK


def _tolerance(text: str) -> float:
    val = float(text)
    if not 0 < val < 1e-3:
        raise argparse.ArgumentTypeError("tolerance must lie in (0, 1e-3)")
    return val


def _seed(text: str) -> int:
    val = int(text)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=_tolerance, default=1e-9, help="zero/structure tolerance (default 1e-9)")
    common.add_argument("--output", "-o", help="write the result here instead of stdout")
    common.add_argument("--theta", type=float, default=math.pi / 3, help="theta for the eq15 example")
    common.add_argument("--phi", type=float, default=0.0, help="phi for the eq15 example")

    channel_in = argparse.ArgumentParser(add_help=False)
    channel_in.add_argument("input", nargs="?", help="channel JSON file")
    channel_in.add_argument("--example", help=f"use a built-in channel: {', '.join(GALLERY_NAMES)}")

    parser = argparse.ArgumentParser(prog="qubitio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common, channel_in], help="four-operator incoherent decomposition")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("classify", parents=[common, channel_in], help="IO/SIO membership and ranks")
    p.add_argument("--full", action="store_true", help="include the decomposition in the report")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("verify", parents=[common, channel_in], help="validate a Kraus list")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("region", parents=[common], help="reachable-state cloud under random incoherent channels")
    p.add_argument("--initial", default="0.5,0,0.5", help="initial Bloch vector x,y,z")
    p.add_argument("--count", type=int, default=100000)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--svg", help="also write an SVG scatter of the x-z projection")
    p.add_argument("--figure", help="also render a matplotlib figure (PNG/PDF/SVG by suffix)")
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("sample", parents=[common], help="random four-operator canonical channels")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("examples", parents=[common], help="write a built-in channel as JSON")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except CliError as exc:
        print(f"qubitio {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"qubitio {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
