"""Command-line front end.

Subcommands generate shapes, build and certify partitions, tabulate coverage
bounds, run Monte Carlo coverage ladders, minimize the boundary-plus-mass
objective, run the full almost-coverage pipeline, and render figures.

Exit codes: 0 on success, 2 when a certified construction's precondition
fails (the message names the violated inequality with its numbers), 1 for
any other error.  Every artifact a command writes is a deterministic
function of the arguments and seed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bounds_mod
from . import flatnorm as flatnorm_mod
from . import montecarlo as mc
from . import partition as partition_mod
from . import render as render_mod
from . import shapes as shapes_mod
from .errors import CovergeoError, HypothesisViolation
from .grid import GridSet, perimeter, read_mask, write_mask

__all__ = ["main"]

_SCHEMA = "covergeo/v1"


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; 2 is reserved for hypothesis
    # violations here, so route usage problems to exit 1
    def error(self, message):  # noqa: D102
        self.exit(1, f"{self.prog}: error: {message}\n")


def _dump_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_ladder(text: str) -> list[int]:
    try:
        values = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise CovergeoError(f"bad sample-count ladder {text!r}") from exc
    if not values or any(v < 1 for v in values):
        raise CovergeoError(f"sample-count ladder must be positive: {text!r}")
    return values


# ---------------------------------------------------------------------------
# subcommands


def _cmd_shape(args) -> int:
    kind = args.shape
    h = args.h
    if kind == "from-mask-file":
        s = read_mask(args.mask)
    else:
        if args.radius is not None and args.radius <= 0:
            raise CovergeoError(f"radius must be positive, got {args.radius}")
        if kind == "disk":
            s = shapes_mod.disk(args.radius, h)
        elif kind == "two-disks":
            s = shapes_mod.two_disks(args.radius, args.separation, h)
        elif kind == "dumbbell":
            s = shapes_mod.dumbbell(
                args.radius, args.neck_halfwidth, args.center_distance, h
            )
        elif kind == "cube":
            s = shapes_mod.box(args.side, h)
        elif kind == "disk-minus-hole":
            if args.hole_radius is not None:
                s = shapes_mod.disk_minus_disk(args.radius, args.hole_radius, h)
            else:
                s = shapes_mod.disk_minus_box(args.radius, args.hole_side, h=h)
        else:  # pragma: no cover - argparse restricts choices
            raise CovergeoError(f"unknown shape {kind!r}")
    if s.is_empty:
        raise CovergeoError("shape parameters produce an empty set")
    write_mask(s, args.out)
    print(f"wrote {args.out}: {s.count} cells, h = {s.h}, dims = {s.dims}")
    return 0


def _cmd_partition(args) -> int:
    e = read_mask(args.mask)
    if args.eta:
        part = partition_mod.partition_with_eta(e, args.delta)
    else:
        part = partition_mod.good_partition(e, args.delta)
    cert = partition_mod.certify_good(part)
    prefix = args.out_prefix
    partition_mod.write_labels(part, prefix + ".labels.pgm")
    with open(prefix + ".regions.json", "w") as fh:
        fh.write(
            json.dumps(partition_mod.region_table(part), sort_keys=True, indent=2)
            + "\n"
        )
    with open(prefix + ".certificate.json", "w") as fh:
        fh.write(partition_mod.certificate_json(cert))
    print(
        f"regions: {part.region_count}  ell: {part.ell}  "
        f"certificate: {'pass' if cert.verdict else 'fail'}"
    )
    return 0


def _cmd_bound(args) -> int:
    kind = args.kind
    if kind == "reach":
        b = bounds_mod.bound_reach(args.m, args.n, args.delta, args.measure_e)
    elif kind == "regions":
        measures = [float(t) for t in args.region_measures.split(",")]
        b = bounds_mod.bound_regions(measures, args.measure_e)
    elif kind == "u-minus-a":
        b = bounds_mod.bound_U_minus_A(
            args.m, args.n, args.delta, args.measure_a, args.measure_e
        )
    else:  # flatnorm
        b = bounds_mod.bound_flatnorm(
            args.m, args.delta, args.measure_s, args.measure_a
        )
    ladder = _parse_ladder(args.n_ladder)
    rows = [b.describe(n) for n in ladder]
    if args.format == "csv":
        lines = ["N,bound"]
        lines += [f"{r['N']},{r['value']:.9f}" for r in rows]
        text = "\n".join(lines) + "\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        _dump_json({"schema": _SCHEMA, "kind": b.kind, "table": rows}, args.out)
    return 0


def _cmd_cover(args) -> int:
    if args.trials < 1:
        raise CovergeoError(f"need at least one trial, got {args.trials}")
    e = read_mask(args.mask)
    part = partition_mod.good_partition(e, args.delta)
    b = bounds_mod.bound_reach(part.region_count, e.ndim, args.delta, e.measure)
    ladder = _parse_ladder(args.n_ladder)
    rows = []
    verdicts = []
    for n_samples in ladder:
        bound_val = b.evaluate(n_samples)
        rep = mc.estimate_probability(
            e,
            r=3.0 * args.delta,
            n_samples=n_samples,
            trials=args.trials,
            seed=args.seed,
            bound_value=bound_val,
        )
        rows.append((n_samples, bound_val, rep))
        verdicts.append(rep.sound)
    text = mc.ladder_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"soundness: {'pass' if all(verdicts) else 'FAIL'} over {len(rows)} rungs")
    return 0


def _cmd_flatnorm(args) -> int:
    e = read_mask(args.mask)
    lams = [float(t) for t in args.lambda_ladder.split(",") if t.strip()]
    if not lams:
        raise CovergeoError("empty lambda ladder")
    results = []
    for lam in lams:
        res = flatnorm_mod.flatnorm_minimize(e, lam)
        entry = {
            "lambda": lam,
            "energy": res.energy,
            "perimeter": res.perim_sigma,
            "sym_diff": res.sym_diff_measure,
            "sigma_cells": int(res.sigma.count),
        }
        if not res.sigma.is_empty:
            rep = flatnorm_mod.minimizer_reach_check(res)
            entry["reach_check"] = {
                "floor": rep.floor,
                "radius_sigma": rep.radius_sigma,
                "radius_complement": rep.radius_complement,
                "verdict": rep.verdict,
            }
        results.append(entry)
        if args.out_prefix:
            svg = render_mod.render_overlay(e, res.sigma)
            with open(f"{args.out_prefix}.lam{lam:g}.svg", "w") as fh:
                fh.write(svg)
    _dump_json({"schema": _SCHEMA, "results": results}, args.out)
    return 0


def _cmd_pipeline(args) -> int:
    e = read_mask(args.mask)
    part, bound = flatnorm_mod.almost_cover_pipeline(e, args.lam, args.delta)
    alpha = args.delta**2 / (2.0 * e.measure)
    cert = partition_mod.certify_almost(part, e, alpha)
    ladder = (
        _parse_ladder(args.n_ladder)
        if args.n_ladder
        else [bounds_mod.invert_for_N(bound, 0.95)]
    )
    rungs = []
    for n_samples in ladder:
        bound_val = bound.evaluate(n_samples)
        rep = mc.estimate_probability(
            e,
            r=3.0 * args.delta,
            n_samples=n_samples,
            trials=args.trials,
            seed=args.seed,
            mode="almost",
            alpha=alpha,
            sample_from=part.base,
            bound_value=bound_val,
        )
        rungs.append(
            {
                "N": n_samples,
                "bound": bound_val,
                "p_hat": rep.p_hat,
                "wilson_lo": rep.wilson_lo,
                "wilson_hi": rep.wilson_hi,
                "sound": rep.sound,
            }
        )
    _dump_json(
        {
            "schema": _SCHEMA,
            "alpha": alpha,
            "regions": part.region_count,
            "measure_A": part.base.measure,
            "certificate": {
                "coverage_ratio": cert.coverage_ratio,
                "complement_fraction": cert.complement_fraction,
                "verdict": cert.verdict,
            },
            "ladder": rungs,
        },
        args.out,
    )
    return 0


def _cmd_render(args) -> int:
    if args.labels:
        labels = partition_mod.read_labels(args.labels)
        svg = render_mod.render_labels(labels)
    else:
        e = read_mask(args.mask)
        svg = render_mod.render_mask(e)
    with open(args.out, "w") as fh:
        fh.write(svg)
    print(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _build_parser() -> _Parser:
    p = _Parser(prog="covergeo", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("shape", help="rasterize a test shape to a mask file")
    sp.add_argument(
        "--shape",
        required=True,
        choices=["disk", "two-disks", "dumbbell", "cube", "disk-minus-hole", "from-mask-file"],
    )
    sp.add_argument("--h", type=float, default=1.0)
    sp.add_argument("--radius", type=float)
    sp.add_argument("--separation", type=float)
    sp.add_argument("--neck-halfwidth", type=float)
    sp.add_argument("--center-distance", type=float)
    sp.add_argument("--side", type=float)
    sp.add_argument("--hole-side", type=float)
    sp.add_argument("--hole-radius", type=float)
    sp.add_argument("--mask")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_shape)

    pp = sub.add_parser("partition", help="build and certify a cube partition")
    pp.add_argument("--mask", required=True)
    pp.add_argument("--delta", type=float, required=True)
    pp.add_argument("--eta", action="store_true", help="grow by the measured core distance")
    pp.add_argument("--out-prefix", required=True)
    pp.set_defaults(func=_cmd_partition)

    bp = sub.add_parser("bound", help="tabulate a coverage bound over sample counts")
    bp.add_argument("--kind", required=True, choices=["reach", "regions", "u-minus-a", "flatnorm"])
    bp.add_argument("--m", type=int, default=1)
    bp.add_argument("--n", type=int, default=2)
    bp.add_argument("--delta", type=float, default=1.0)
    bp.add_argument("--measure-e", type=float, default=1.0)
    bp.add_argument("--measure-a", type=float, default=0.0)
    bp.add_argument("--measure-s", type=float, default=0.0)
    bp.add_argument("--region-measures", default="")
    bp.add_argument("--n-ladder", required=True)
    bp.add_argument("--format", choices=["json", "csv"], default="json")
    bp.add_argument("--out")
    bp.set_defaults(func=_cmd_bound)

    cp = sub.add_parser("cover", help="Monte Carlo coverage ladder against the bound")
    cp.add_argument("--mask", required=True)
    cp.add_argument("--delta", type=float, required=True)
    cp.add_argument("--n-ladder", required=True)
    cp.add_argument("--trials", type=int, required=True)
    cp.add_argument("--seed", type=int, default=0)
    cp.add_argument("--out")
    cp.set_defaults(func=_cmd_cover)

    fp = sub.add_parser("flatnorm", help="minimize boundary-plus-mass at each lambda")
    fp.add_argument("--mask", required=True)
    fp.add_argument("--lambda-ladder", required=True)
    fp.add_argument("--out")
    fp.add_argument("--out-prefix", help="also write overlay SVGs with this prefix")
    fp.set_defaults(func=_cmd_flatnorm)

    qp = sub.add_parser("pipeline", help="regularize, partition, and verify almost-coverage")
    qp.add_argument("--mask", required=True)
    qp.add_argument("--lambda", dest="lam", type=float, required=True)
    qp.add_argument("--delta", type=float, required=True)
    qp.add_argument("--n-ladder", default="")
    qp.add_argument("--trials", type=int, default=200)
    qp.add_argument("--seed", type=int, default=0)
    qp.add_argument("--out")
    qp.set_defaults(func=_cmd_pipeline)

    rp = sub.add_parser("render", help="render a mask or label raster to SVG")
    rp.add_argument("--mask")
    rp.add_argument("--labels")
    rp.add_argument("--out", required=True)
    rp.set_defaults(func=_cmd_render)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except HypothesisViolation as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return 2
    except CovergeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
