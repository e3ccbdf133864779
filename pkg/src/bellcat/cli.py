"""Command-line front end.

Subcommands print JSON (``scan`` prints CSV) to stdout or ``--out``.
Exit codes: 0 success, 2 usage or precondition error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import sys

import numpy as np

from .errors import BellCatError, NumericalError
from .fullspace import full_correlation
from .lhv import PhaseModel, SignModel, estimate, exhaustive_check
from .scs import subspace_correlation
from .spin import Direction, Spin
from .states import Polarization, make_cat_state
from .ubi import SearchConfig, max_violation_search, ubi_local, ubi_quantum

EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SCAN_PARAMS = ("s", "xi", "eta", "theta_a", "phi_a", "theta_b", "phi_b", "theta_c", "phi_c")
ANGLE_PARAMS = frozenset(SCAN_PARAMS) - {"s"}


class UsageError(Exception):
    pass


def _pair(text: str) -> tuple[float, float]:
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise UsageError(f"direction must be 'theta,phi', got {text!r}")
    try:
        theta, phi = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"direction must be two numbers, got {text!r}") from None
    if not (math.isfinite(theta) and math.isfinite(phi)):
        raise UsageError(f"non-finite direction {text!r}")
    return theta, phi


def _angle(value, deg: bool) -> float:
    try:
        x = float(value)
    except (TypeError, ValueError):
        raise UsageError(f"not a number: {value!r}") from None
    if not math.isfinite(x):
        raise UsageError(f"non-finite angle {value!r}")
    return math.radians(x) if deg else x


def _direction(text, deg: bool) -> Direction:
    theta, phi = _pair(text) if isinstance(text, str) else text
    if deg:
        theta, phi = math.radians(theta), math.radians(phi)
    try:
        return Direction(theta, phi)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _spin(text) -> Spin:
    try:
        return Spin.parse(text)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _state(cfg: dict):
    try:
        pol = Polarization.parse(cfg.get("pol", "anti"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    deg = cfg.get("deg", False)
    return make_cat_state(_spin(cfg["s"]), pol, _angle(cfg.get("xi", math.pi / 4), deg),
                          _angle(cfg.get("eta", math.pi / 4), deg))


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


def cmd_correlate(cfg: dict) -> dict:
    _require(cfg, "s", "a", "b")
    state = _state(cfg)
    a, b = _direction(cfg["a"], cfg.get("deg", False)), _direction(cfg["b"], cfg.get("deg", False))
    space = cfg.get("space", "full")
    if space == "full":
        report = full_correlation(state, a, b)
    elif space == "scs":
        report = subspace_correlation(state, a, b)
    else:
        raise UsageError(f"unknown space {space!r}")
    if space == "scs" and not report.subspace_probability > 1e-300:
        raise NumericalError(f"subspace weight N={report.subspace_probability:.3e} underflows")
    return {
        "space": space,
        "p_local": report.p_local,
        "p_nonlocal": report.p_nonlocal,
        "p_total": report.p_total,
        "scaled": report.scaled,
        "N": report.subspace_probability,
    }


def cmd_ubi(cfg: dict) -> dict:
    _require(cfg, "s", "a", "b", "c")
    state = _state(cfg)
    deg = cfg.get("deg", False)
    a, b, c = (_direction(cfg[k], deg) for k in "abc")
    if cfg.get("local", False):
        report = ubi_local(state, a, b, c)
    else:
        report = ubi_quantum(state, a, b, c, scaled=not cfg.get("unscaled", False))
    return report.to_dict()


def _scan_values(text: str, deg: bool) -> tuple[str, list]:
    if "=" not in text:
        raise UsageError(f"sweep must look like name=start:stop:num or name=v1,v2,..., got {text!r}")
    name, body = (x.strip() for x in text.split("=", 1))
    if name not in SCAN_PARAMS:
        raise UsageError(f"cannot sweep {name!r}; choose from {', '.join(SCAN_PARAMS)}")
    if ":" in body:
        parts = body.split(":")
        if len(parts) != 3:
            raise UsageError(f"range must be start:stop:num, got {body!r}")
        try:
            num = int(parts[2])
        except ValueError:
            raise UsageError(f"point count must be an integer, got {parts[2]!r}") from None
        if num < 1:
            raise UsageError("point count must be positive")
        if name == "s":
            lo, hi = _spin(parts[0]).twice_s, _spin(parts[1]).twice_s
            twice = np.linspace(lo, hi, num)
            if not np.allclose(twice, np.round(twice)):
                raise UsageError(f"spin range {body!r} does not land on multiples of 1/2")
            return name, [Spin(int(round(x))) for x in twice]
        values = np.linspace(_angle(parts[0], deg), _angle(parts[1], deg), num).tolist()
    elif name == "s":
        return name, [_spin(v) for v in body.split(",")]
    else:
        values = [_angle(v, deg) for v in body.split(",")]
    return name, values


def cmd_scan(cfg: dict) -> str:
    sweeps = cfg.get("sweep") or []
    if not sweeps:
        raise UsageError("scan needs at least one --sweep")
    deg = cfg.get("deg", False)
    axes = [_scan_values(s, deg) for s in sweeps]
    names = [n for n, _ in axes]
    if len(set(names)) != len(names):
        raise UsageError("each parameter may be swept once")

    base = {
        "s": _spin(cfg["s"]) if cfg.get("s") is not None else None,
        "xi": _angle(cfg.get("xi", math.pi / 4), deg),
        "eta": _angle(cfg.get("eta", math.pi / 4), deg),
    }
    for key in "abc":
        theta, phi = _pair(cfg[key]) if cfg.get(key) else (math.pi / 2, 0.0)
        base[f"theta_{key}"] = math.radians(theta) if deg and cfg.get(key) else theta
        base[f"phi_{key}"] = math.radians(phi) if deg and cfg.get(key) else phi
    if base["s"] is None and "s" not in names:
        raise UsageError("missing --s (or sweep s)")
    try:
        pol = Polarization.parse(cfg.get("pol", "anti"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    space = cfg.get("space", "scs")
    if space not in ("full", "scs"):
        raise UsageError(f"unknown space {space!r}")
    scaled = space == "scs" and not cfg.get("unscaled", False)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names + ["p_local", "p_nonlocal", "p_total", "p_s"])
    for combo in itertools.product(*(vals for _, vals in axes)):
        p = dict(base, **dict(zip(names, combo)))
        state = make_cat_state(p["s"], pol, p["xi"], p["eta"])
        try:
            a, b, c = (Direction(p[f"theta_{k}"], p[f"phi_{k}"]) for k in "abc")
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if space == "full":
            report = full_correlation(state, a, b)
            pac = full_correlation(state, a, c).p_total
            pbc = full_correlation(state, b, c).p_total
            p_s = report.p_total * pac - abs(pbc)
        else:
            report = subspace_correlation(state, a, b)
            p_s = ubi_quantum(state, a, b, c, scaled=scaled).p_s
        row = [repr(float(v.value if isinstance(v, Spin) else v)) for v in combo]
        writer.writerow(row + [repr(report.p_local), repr(report.p_nonlocal), repr(report.p_total), repr(p_s)])
    return buf.getvalue()


def cmd_max_violation(cfg: dict) -> dict:
    _require(cfg, "s")
    search = dict(cfg.get("search") or {})
    for key in ("grid_points", "theta_points", "state_points", "refine_iterations",
                "tolerance", "top_k", "restarts", "seed"):
        if cfg.get(key) is not None:
            search[key] = cfg[key]
    if cfg.get("unscaled"):
        search["scaled"] = False
    try:
        config = SearchConfig.from_dict(search)
        pol = Polarization.parse(cfg.get("pol", "anti"))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return max_violation_search(_spin(cfg["s"]), pol, config).to_dict()


def cmd_lhv(cfg: dict) -> dict:
    _require(cfg, "a", "b", "c")
    deg = cfg.get("deg", False)
    a, b, c = (_direction(cfg[k], deg) for k in "abc")
    try:
        pol = Polarization.parse(cfg.get("pol", "anti"))
        weight = float(cfg.get("weight", 1.0))
        name = cfg.get("model", "sign")
        if name == "sign":
            model = SignModel(pol, weight=weight)
        elif name == "phase":
            model = PhaseModel(pol, weight=weight, k=int(cfg.get("k", 1)))
        else:
            raise UsageError(f"unknown model {name!r}; use 'sign' or 'phase'")
        if cfg.get("exhaustive"):
            out = exhaustive_check(model, a, b, c, cfg.get("grid_points")).to_dict()
            out["within_bound"] = out["p_s_lc"] <= 1e-12
            return out
        samples = int(cfg.get("samples", 10**5))
        result = estimate(model, a, b, c, samples, int(cfg.get("seed", 0)))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = result.to_dict()
    out["within_bound"] = result.p_s_lc <= 3 * result.se_p_s
    return out


COMMANDS = {
    "correlate": cmd_correlate,
    "ubi": cmd_ubi,
    "scan": cmd_scan,
    "max-violation": cmd_max_violation,
    "lhv": cmd_lhv,
}


def build_parser() -> argparse.ArgumentParser:
    # defaults are None so that --config values survive unless a flag is given
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of options; explicit flags take precedence")
    common.add_argument("--out", help="write output to this path instead of stdout")
    common.add_argument("--deg", action="store_true", default=None, help="angles are given in degrees")
    common.add_argument("--s", help="spin as 'k/2' or an integer")
    common.add_argument("--pol", choices=["anti", "para"], default=None)
    common.add_argument("--xi", type=float)
    common.add_argument("--eta", type=float)

    parser = argparse.ArgumentParser(prog="bellcat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("correlate", parents=[common], help="correlation for one direction pair")
    p.add_argument("--a", help="theta,phi")
    p.add_argument("--b", help="theta,phi")
    p.add_argument("--space", choices=["full", "scs"], default=None)

    p = sub.add_parser("ubi", parents=[common], help="evaluate the three-direction inequality")
    for k in "abc":
        p.add_argument(f"--{k}", help="theta,phi")
    p.add_argument("--local", action="store_true", default=None, help="local correlations only")
    p.add_argument("--unscaled", action="store_true", default=None, help="do not divide by subspace weight")

    p = sub.add_parser("scan", parents=[common], help="grid scan, CSV output")
    for k in "abc":
        p.add_argument(f"--{k}", help="theta,phi (default equatorial, phi=0)")
    p.add_argument("--sweep", action="append", help="name=start:stop:num or name=v1,v2,...")
    p.add_argument("--space", choices=["full", "scs"], default=None)
    p.add_argument("--unscaled", action="store_true", default=None)

    p = sub.add_parser("max-violation", parents=[common], help="search for the largest p_s")
    p.add_argument("--grid-points", type=int)
    p.add_argument("--theta-points", type=int)
    p.add_argument("--state-points", type=int)
    p.add_argument("--refine-iterations", type=int)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--top-k", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--unscaled", action="store_true", default=None)

    p = sub.add_parser("lhv", parents=[common], help="local hidden-variable estimate")
    for k in "abc":
        p.add_argument(f"--{k}", help="theta,phi")
    p.add_argument("--model", choices=["sign", "phase"], default=None)
    p.add_argument("--k", type=int, help="phase-model frequency")
    p.add_argument("--weight", type=float, help="total hidden-variable weight in (0, 1]")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--exhaustive", action="store_true", default=None)
    p.add_argument("--grid-points", type=int)
    return parser


def _merge(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config!r}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for key, value in vars(args).items():
        if value is not None and key not in ("config", "command"):
            cfg[key] = value
    if "s" in cfg and cfg["s"] is not None:
        cfg["s"] = str(cfg["s"])
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge(args)
        result = COMMANDS[args.command](cfg)
    except (UsageError, KeyError) as exc:
        print(f"bellcat {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"bellcat {args.command}: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (BellCatError, ValueError) as exc:
        print(f"bellcat {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    text = result if isinstance(result, str) else json.dumps(result) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
