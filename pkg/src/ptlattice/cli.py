"""Command-line front end.

Every analysis is a subcommand that builds a request, sends it through the
service (in-process by default, or a remote instance via --server) and
renders the response as CSV or JSON.  Identical invocations produce
byte-identical artifacts.  Exit codes: 0 success, 1 configuration error,
2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import io
from .client import ClientConfigError, ClientError, ClientNumericError, ServiceClient

__all__ = ["main", "entrypoint"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2


class _ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with the documented exit code for usage errors."""

    def error(self, message: str) -> None:  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _parse_grid(spec: str, name: str) -> list[float]:
    """Inclusive 'lo:hi:step' grid; values never exceed hi."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise _ConfigError(f"{name} must look like lo:hi:step, got {spec!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
    except ValueError as exc:
        raise _ConfigError(f"{name}: {exc}") from exc
    if step <= 0:
        raise _ConfigError(f"{name}: step must be positive")
    values: list[float] = []
    eps = 1e-9 * max(1.0, abs(hi), step)
    k = 0
    while True:
        value = lo + k * step
        if value > hi + eps:
            break
        values.append(value)
        k += 1
    if not values:
        raise _ConfigError(f"{name}: empty grid from {spec!r}")
    return values


def _parse_bracket(spec: str) -> tuple[float, float]:
    parts = spec.split(":")
    if len(parts) != 2:
        raise _ConfigError(f"bracket must look like lo:hi, got {spec!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise _ConfigError(f"bracket: {exc}") from exc
    return lo, hi


def _model_payload(args: argparse.Namespace, g: float | None = None) -> dict:
    """Build the ModelSpec payload from --model/--delta/--g/--sites."""
    selector = args.model
    if selector == "a":
        if args.delta is None:
            raise _ConfigError("model 'a' requires --delta")
        if g is None:
            raise _ConfigError("model 'a' requires --g")
        return {"kind": "a", "delta": args.delta, "g": g, "half_width": args.sites}
    if selector == "b":
        if g is None:
            raise _ConfigError("model 'b' requires --g")
        return {"kind": "b", "g": g, "half_width": args.sites}
    if selector.startswith("custom:"):
        path = selector.split(":", 1)[1]
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise _ConfigError(f"cannot read custom lattice {path!r}: {exc}") from exc
        if not isinstance(payload, dict) or "half_width" not in payload:
            raise _ConfigError(f"{path!r} is not a custom lattice file")
        return {
            "kind": "custom",
            "half_width": payload.get("half_width"),
            "couplings": payload.get("couplings"),
            "potentials": payload.get("potentials"),
        }
    raise _ConfigError(f"unknown model selector {selector!r} (use a, b or custom:PATH)")


def _write(text: str, destination: str) -> None:
    if destination == "-":
        sys.stdout.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


def _add_common(parser: argparse.ArgumentParser, default_sites: int) -> None:
    parser.add_argument("--model", required=True, help="a, b, or custom:PATH")
    parser.add_argument("--delta", type=float, help="detuning of the defect pair (model a)")
    parser.add_argument("--sites", type=int, default=default_sites, metavar="N",
                        help=f"window half-width (default {default_sites})")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--output", default="-", help="artifact path, or - for stdout")
    parser.add_argument("--server", default=None, metavar="URL",
                        help="remote service base URL (default: run in-process)")


def build_parser() -> _Parser:
    parser = _Parser(prog="ptlattice", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="classified eigenvalue spectra, single g or a scan")
    _add_common(p, default_sites=200)
    p.add_argument("--g", type=float, help="single value of the control parameter")
    p.add_argument("--g-range", metavar="LO:HI:STEP",
                   help="inclusive scan grid (exclusive past HI)")
    p.add_argument("--threads", type=int, default=1,
                   help="scan parallelism (default 1 for reproducibility)")

    p = sub.add_parser("threshold", help="locate the PT breaking point (or BOC disappearance)")
    _add_common(p, default_sites=200)
    p.add_argument("--target", choices=("pt", "boc"), default="pt")
    p.add_argument("--bracket", default=None, metavar="LO:HI",
                   help="bisection bracket (default 0.1:1.5 for pt, 0.1:0.7 for boc)")
    p.add_argument("--tol", type=float, default=0.002, help="tolerance on g")
    p.add_argument("--detector", choices=("bound-pair", "any-imag"), default="bound-pair")
    p.add_argument("--no-extrapolate", action="store_true",
                   help="report the raw flip at --sites instead of the two-size extrapolation")

    p = sub.add_parser("transmit", help="Bloch-wave transmittance across the defect")
    _add_common(p, default_sites=200)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--q-range", default="0.02:0.98:0.002", metavar="LO:HI:STEP",
                   help="grid in units of pi (default 0.02:0.98:0.002)")
    p.add_argument("--core", type=int, default=None, metavar="M",
                   help="core half-width solved exactly (default: auto)")
    p.add_argument("--analytic", action="store_true",
                   help="emit the closed-form transmission columns (model a)")
    p.add_argument("--feature", default=None, metavar="PATH",
                   help="also locate the resonance/dip and write it as JSON")

    p = sub.add_parser("propagate", help="integrate the beam and classify the power growth")
    _add_common(p, default_sites=320)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--excite", type=int, default=0, metavar="SITE",
                   help="single-site initial excitation (default n=0)")
    p.add_argument("--c0-file", default=None, metavar="PATH",
                   help="JSON [[re,im],...] initial amplitudes over the window")
    p.add_argument("--z-max", type=float, default=150.0)
    p.add_argument("--dz", type=float, default=0.5, help="output sampling step")
    p.add_argument("--method", choices=("expm", "rk"), default="expm")
    p.add_argument("--window-frac", type=float, default=0.5,
                   help="leading fraction of z excluded from the growth fit")
    p.add_argument("--trace", default=None, metavar="PATH",
                   help="also write the full intensity trace CSV")
    p.add_argument("--growth", default=None, metavar="PATH",
                   help="also write the growth classification JSON")

    p = sub.add_parser("bic", help="closed-form in-band bound mode and its residuals")
    _add_common(p, default_sites=400)
    p.add_argument("--g", type=float, required=True)
    p.add_argument("--unit-norm", action="store_true",
                   help="normalize to unit Euclidean norm instead of the raw closed form")
    p.add_argument("--check-exceptional", action="store_true",
                   help="verify the associated-function identity at the breaking point")
    p.add_argument("--report", default=None, metavar="PATH",
                   help="also write the residual/exceptional report JSON")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_spectrum(args: argparse.Namespace, client: ServiceClient) -> int:
    if args.model.startswith("custom:"):
        if args.g is not None or args.g_range is not None:
            raise _ConfigError("custom lattices carry no control parameter; drop --g/--g-range")
        payload = {"model": _model_payload(args), "threads": args.threads}
    elif (args.g is None) == (args.g_range is None):
        raise _ConfigError("give exactly one of --g or --g-range")
    elif args.g_range is not None:
        grid = _parse_grid(args.g_range, "--g-range")
        model = _model_payload(args, g=grid[0])
        payload = {"model": model, "g_grid": grid, "threads": args.threads}
    else:
        model = _model_payload(args, g=args.g)
        payload = {"model": model, "threads": args.threads}
    response = client.post("/spectrum", payload)
    if args.format == "json":
        _write(io.render_json(response), args.output)
    else:
        _write(io.render_csv(io.SPECTRUM_FIELDS, response["rows"]), args.output)
    return EXIT_OK


def _cmd_threshold(args: argparse.Namespace, client: ServiceClient) -> int:
    if args.model not in ("a", "b"):
        raise _ConfigError("threshold search applies to the built-in families a and b")
    if args.model == "a" and args.delta is None:
        raise _ConfigError("model 'a' requires --delta")
    if args.target == "boc" and args.model != "a":
        raise _ConfigError("the BOC disappearance applies to model a")
    default_bracket = (0.1, 1.5) if args.target == "pt" else (0.1, 0.7)
    lo, hi = _parse_bracket(args.bracket) if args.bracket else default_bracket
    if args.target == "pt":
        payload = {
            "kind": args.model,
            "delta": args.delta,
            "g_lo": lo,
            "g_hi": hi,
            "tol_g": args.tol,
            "half_width": args.sites,
            "detector": args.detector.replace("-", "_"),
            "extrapolate": not args.no_extrapolate,
        }
        response = client.post("/threshold", payload)
        key = "g_th"
    else:
        payload = {
            "delta": args.delta,
            "g_lo": lo,
            "g_hi": hi,
            "tol_g": args.tol,
            "half_width": args.sites,
            "extrapolate": not args.no_extrapolate,
        }
        response = client.post("/boc-disappearance", payload)
        key = "g_star"
    result = {key: response["value"], "N": response["N"], "tol": response["tol"],
              "detector": response["detector"], "per_size": response["per_size"]}
    if args.format == "json":
        _write(io.render_json(result), args.output)
    else:
        rows = [{key: response["value"], "N": response["N"], "tol": response["tol"]}]
        _write(io.render_csv((key, "N", "tol"), rows), args.output)
    return EXIT_OK


def _cmd_transmit(args: argparse.Namespace, client: ServiceClient) -> int:
    grid = _parse_grid(args.q_range, "--q-range")
    model = _model_payload(args, g=args.g)
    payload = {
        "model": model,
        "q_over_pi": grid,
        "core_halfwidth": args.core,
        "include_analytic": bool(args.analytic),
        "locate_feature": args.feature is not None,
    }
    response = client.post("/transmit", payload)
    if args.format == "json":
        _write(io.render_json(response), args.output)
    else:
        fields = io.SCATTERING_ANALYTIC_FIELDS if args.analytic else io.SCATTERING_FIELDS
        _write(io.render_csv(fields, response["rows"]), args.output)
    if args.feature is not None:
        _write(io.render_json(response["feature"]), args.feature)
    return EXIT_OK


def _cmd_propagate(args: argparse.Namespace, client: ServiceClient) -> int:
    model = _model_payload(args, g=args.g)
    want_growth = args.growth is not None or args.format == "json"
    payload = {
        "model": model,
        "z_max": args.z_max,
        "dz_out": args.dz,
        "method": "matrix_exponential" if args.method == "expm" else "adaptive_rk",
        "window_frac": args.window_frac,
        "include_trace": args.trace is not None,
        "classify": want_growth,
    }
    if args.c0_file is not None:
        try:
            c0 = json.loads(Path(args.c0_file).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise _ConfigError(f"cannot read --c0-file: {exc}") from exc
        payload["c0"] = c0
        payload["excite"] = None
    else:
        payload["excite"] = args.excite
    response = client.post("/propagate", payload)
    if args.format == "json":
        body = {"power": response["power"], "growth": response["growth"]}
        _write(io.render_json(body), args.output)
    else:
        _write(io.render_csv(io.POWER_FIELDS, response["power"]), args.output)
    if args.trace is not None:
        _write(io.render_csv(io.TRACE_FIELDS, response["trace"]), args.trace)
    if args.growth is not None:
        _write(io.render_json(response["growth"]), args.growth)
    return EXIT_OK


def _cmd_bic(args: argparse.Namespace, client: ServiceClient) -> int:
    if args.model != "b":
        raise _ConfigError("the closed-form in-band mode is defined for model b")
    payload = {
        "g": args.g,
        "half_width": args.sites,
        "normalization": "unit_norm" if args.unit_norm else "raw",
        "check_exceptional": bool(args.check_exceptional),
    }
    response = client.post("/bic", payload)
    if args.format == "json":
        _write(io.render_json(response), args.output)
    else:
        _write(io.render_csv(io.MODE_FIELDS, response["rows"]), args.output)
    if args.report is not None:
        report = {"residual": response["residual"], "exceptional": response["exceptional"]}
        _write(io.render_json(report), args.report)
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        return _cmd_serve(args)
    handlers = {
        "spectrum": _cmd_spectrum,
        "threshold": _cmd_threshold,
        "transmit": _cmd_transmit,
        "propagate": _cmd_propagate,
        "bic": _cmd_bic,
    }
    try:
        with ServiceClient(base_url=args.server) as client:
            return handlers[args.command](args, client)
    except (_ConfigError, ClientConfigError) as exc:
        sys.stderr.write(f"ptlattice: configuration error: {exc}\n")
        return EXIT_CONFIG
    except (ClientNumericError, ClientError) as exc:
        sys.stderr.write(f"ptlattice: numerical failure: {exc}\n")
        return EXIT_NUMERIC


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
