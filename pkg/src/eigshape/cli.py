"""Command-line interface.

Exit codes: 0 success, 1 input/config error, 2 convergence warning,
3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import platform
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import reference_values, verify
from .curve import area, load_shape, perimeter, save_shape
from .exceptions import EigshapeError
from .optim import OptimConfig, evaluate, multistart
from .plot import FIELDS, render_svg

EXIT_OK, EXIT_ERROR, EXIT_WARN, EXIT_FAIL = 0, 1, 2, 3

log = logging.getLogger("eigshape")


@dataclass
class RunManifest:
    command: str
    config: dict
    inputs: list
    outputs: list
    seed: int | None = None
    reproducible: bool = False
    wall_time: float = 0.0
    versions: dict = field(default_factory=lambda: {
        "eigshape": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
        "python": platform.python_version(),
    })
    result: dict = field(default_factory=dict)

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _load_shape(path):
    try:
        return load_shape(path)
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}: malformed JSON: {exc}") from exc
    except OSError as exc:
        raise _InputError(f"{path}: {exc.strerror}") from exc
    except (TypeError, ValueError) as exc:
        raise _InputError(f"{path}: {exc}") from exc


class _InputError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_optimize(args) -> int:
    t0 = time.perf_counter()
    if args.config:
        try:
            cfg_dict = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise _InputError(f"{args.config}: malformed JSON: {exc}") from exc
        except OSError as exc:
            raise _InputError(f"{args.config}: {exc.strerror}") from exc
        if not isinstance(cfg_dict, dict):
            raise _InputError(f"{args.config}: config must be a JSON object")
    else:
        cfg_dict = {}
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    if args.perimeter is not None:
        cfg_dict["perimeter"] = args.perimeter
    cfg = OptimConfig.from_dict(cfg_dict)
    init = _load_shape(args.init) if args.init else None

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = multistart(cfg, args.starts, init)
    shape_path, trace_path, manifest_path = out / "shape.json", out / "trace.csv", out / "manifest.json"
    save_shape(res.shape, shape_path)
    trace_path.write_text(res.trace.to_csv())
    RunManifest(
        command="optimize",
        config=cfg.to_dict() | {"starts": args.starts},
        inputs=[p for p in (args.config, args.init) if p],
        outputs=[str(shape_path), str(trace_path), str(manifest_path)],
        seed=cfg.seed,
        reproducible=args.reproducible,
        wall_time=time.perf_counter() - t0,
        result={"J": res.J, "J_starts": res.J_values, "best_start": res.best_index,
                "termination": res.trace.termination},
    ).write(manifest_path)
    log.info("J = %.10g (%s)", res.J, res.trace.termination)
    return EXIT_OK if res.trace.termination == "converged" else EXIT_WARN


def _evaluation_dict(fb, n_r, n_theta):
    ev = evaluate(fb, n_r, n_theta)
    lam = ev.spectrum.eigenvalues
    return {
        "lambdas": [float(v) for v in lam],
        "perimeter": perimeter(fb),
        "area": area(fb),
        "J": ev.J,
        "gap": float((lam[2] - lam[1]) / lam[1]),
        "mesh": {"n_r": n_r, "n_theta": n_theta},
    }


def _maybe_manifest(args, command, outputs, t0, result=None, config=None):
    if getattr(args, "out", None):
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        mpath = out / "manifest.json"
        RunManifest(command, config or {}, [p for p in [getattr(args, "shape", None)] if p],
                    outputs + [str(mpath)], wall_time=time.perf_counter() - t0,
                    reproducible=getattr(args, "reproducible", False), result=result or {}).write(mpath)


def cmd_evaluate(args) -> int:
    t0 = time.perf_counter()
    fb = _load_shape(args.shape)
    res = _evaluation_dict(fb, args.nr, args.ntheta)
    _emit(res)
    outputs = []
    if args.out:
        p = Path(args.out) / "evaluation.json"
        Path(args.out).mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(res, indent=2, sort_keys=True) + "\n")
        outputs.append(str(p))
    _maybe_manifest(args, "evaluate", outputs, t0, res, {"n_r": args.nr, "n_theta": args.ntheta})
    return EXIT_OK


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    fb = _load_shape(args.shape)
    rep = verify(fb, args.nr, args.ntheta)
    _emit(rep.to_dict())
    sys.stderr.write(rep.summary() + "\n")
    outputs = []
    if args.out:
        p = Path(args.out) / "report.json"
        Path(args.out).mkdir(parents=True, exist_ok=True)
        p.write_text(rep.to_json() + "\n")
        outputs.append(str(p))
    _maybe_manifest(args, "verify", outputs, t0, {"passed": rep.passed},
                    {"n_r": args.nr, "n_theta": args.ntheta})
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_reference(args) -> int:
    t0 = time.perf_counter()
    try:
        res = reference_values(args.kind, args.perimeter)
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    if res.pop("numerical"):
        res["tag"] = "numerical baseline"
    else:
        res["tag"] = "analytic"
    _emit(res)
    _maybe_manifest(args, "reference", [], t0, res, {"kind": args.kind, "perimeter": args.perimeter})
    return EXIT_OK


def cmd_plot(args) -> int:
    t0 = time.perf_counter()
    fb = _load_shape(args.shape)
    svg = render_svg(fb, field=args.field, n_r=args.nr, n_theta=args.ntheta)
    Path(args.svg).write_text(svg)
    mpath = Path(str(args.svg) + ".manifest.json")
    RunManifest("plot", {"field": args.field, "n_r": args.nr, "n_theta": args.ntheta}, [args.shape],
                [str(args.svg), str(mpath)], wall_time=time.perf_counter() - t0,
                reproducible=args.reproducible).write(mpath)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eigshape",
                                description="Minimize lambda_2 of the Dirichlet Laplacian at fixed perimeter.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, mesh=(64, 256)):
        sp.add_argument("--nr", type=int, default=mesh[0])
        sp.add_argument("--ntheta", type=int, default=mesh[1])
        sp.add_argument("--reproducible", action="store_true")

    o = sub.add_parser("optimize", help="run the shape optimization")
    o.add_argument("--config", help="JSON file with OptimConfig fields")
    o.add_argument("--out", required=True, help="output directory")
    o.add_argument("--init", help="initial shape JSON")
    o.add_argument("--seed", type=int)
    o.add_argument("--starts", type=int, default=1)
    o.add_argument("--perimeter", type=float)
    o.add_argument("--reproducible", action="store_true")
    o.set_defaults(func=cmd_optimize)

    e = sub.add_parser("evaluate", help="eigenvalues, perimeter, area and J of a shape")
    e.add_argument("shape")
    e.add_argument("--out")
    common(e, (48, 192))
    e.set_defaults(func=cmd_evaluate)

    v = sub.add_parser("verify", help="optimality and qualitative checks")
    v.add_argument("shape")
    v.add_argument("--out")
    common(v)
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("reference", help="reference shape values")
    r.add_argument("kind", help="disk, two-disks or stadium-fit")
    r.add_argument("--perimeter", type=float, default=2 * np.pi)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reference)

    pl = sub.add_parser("plot", help="render the boundary as SVG")
    pl.add_argument("shape")
    pl.add_argument("--svg", required=True)
    pl.add_argument("--field", choices=FIELDS)
    common(pl)
    pl.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (_InputError, EigshapeError, ValueError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
