"""Command-line interface.

Subcommands wrap the library: ``eval`` (evaluate a network document at a
holonomy document), ``ip`` (exact or Monte Carlo inner product), ``dip``
(group-averaged inner product), ``gram`` (averaged Gram matrix of a file
list), ``section4`` (the four-curve web observables and their sampled
geometry), and ``haar-projector`` (the invariant projector for a spin
list).  Reports are JSON on stdout with floats at 17 significant digits.

Exit codes: 0 on success, 2 for validation failures (malformed documents,
bad arguments, impossible networks), 3 when a computation fails one of
its advertised numerical guarantees.

The environment variable SPINNET_SEED supplies the default Monte Carlo
seed; an explicit --seed wins.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .rep_core import Spin
from .tensor_engine import GroupFactor, haar_project
from .network_model import InvalidNetworkError, canonicalize, decompose
from .inner_product import exact_inner_product, mc_inner_product, structural_zero, evaluate
from .diffeo_average import enumerate_correspondences, averaged_inner_product, averaged_gram
from .blipweb import (ToleranceError, observation_one, observation_two,
                      emit_geometry, write_curves_csv)
from .documents import (DocumentError, read_network, read_holonomies,
                        dumps_document, _complex_nested)

__all__ = ["main"]


def _resolve_seed(explicit):
    if explicit is not None:
        return explicit
    env = os.environ.get("SPINNET_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValueError(f"SPINNET_SEED must be an integer, got {env!r}") from None


def _scalar(value: complex) -> dict:
    return {"re": float(np.real(value)), "im": float(np.imag(value))}


def _cmd_eval(args) -> dict:
    n = read_network(args.network)
    h = read_holonomies(args.holonomies)
    return _scalar(evaluate(n, h))


def _cmd_ip(args) -> dict:
    a = read_network(args.network_a)
    b = read_network(args.network_b)
    if args.mc is not None:
        seed = _resolve_seed(args.seed)
        value, stderr = mc_inner_product(a, b, args.mc, seed=seed)
        report = _scalar(value)
        report.update({"stderr": float(stderr), "samples": args.mc, "seed": seed})
        return report
    report = _scalar(exact_inner_product(a, b))
    report["structural_zero"] = structural_zero(a, b)
    return report


def _cmd_dip(args) -> dict:
    a = read_network(args.network_a)
    b = read_network(args.network_b)
    opo = args.orientation_preserving_only
    ca, cb = canonicalize(a), canonicalize(b)
    classes = enumerate_correspondences(decompose(ca.graph), decompose(cb.graph),
                                        orientation_preserving_only=opo)
    report = _scalar(averaged_inner_product(ca, cb, orientation_preserving_only=opo))
    report["correspondence_count"] = len(classes)
    return report


def _cmd_gram(args) -> dict:
    nets = [read_network(p) for p in args.networks]
    families = [[(1.0, n)] for n in nets]
    g = averaged_gram(families, orientation_preserving_only=args.orientation_preserving_only)
    eigs = np.linalg.eigvalsh(g)
    return {
        "size": len(nets),
        "matrix": _complex_nested(np.asarray(g, dtype=complex)),
        "min_eigenvalue": float(eigs.min()),
    }


def _cmd_section4(args) -> dict:
    report = {"which": args.which, "truncation": args.truncation}
    if args.which == "obs1":
        if args.i0 is None:
            raise ValueError("--i0 is required for obs1 (an odd column index)")
        value = observation_one(args.truncation, args.i0)
        report["i0"] = args.i0
        report.update(_scalar(value))
        report["stable"] = True
    else:
        values = []
        for i in range(-args.truncation, args.truncation):
            entry = {"i": i}
            entry.update(_scalar(observation_two(args.truncation, i)))
            values.append(entry)
        report["values"] = values
    if args.emit_curves is not None:
        curves = emit_geometry(args.truncation, args.resolution)
        write_curves_csv(args.emit_curves, curves)
        report["curves_csv"] = str(args.emit_curves)
        report["curve_ids"] = [c.curve_id for c in curves]
    return report


def _cmd_haar_projector(args) -> dict:
    factors = [GroupFactor("g", Spin(tj), conjugated=False, inverted=False,
                           row_leg=f"r{k}", col_leg=f"c{k}")
               for k, tj in enumerate(args.spins)]
    proj = haar_project(factors).data
    dim = int(np.prod([Spin(tj).dim for tj in args.spins], dtype=int))
    rank = int(round(float(np.trace(proj.reshape(dim, dim)).real)))
    return {
        "twice_j": list(args.spins),
        "dimension": dim,
        "rank": rank,
        "projector": _complex_nested(proj),
    }


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinnet",
        description="Spin-network states on SU(2): evaluation, Haar-measure "
                    "inner products, group averaging, and the four-curve web "
                    "observables.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a network at a holonomy assignment")
    p.add_argument("network", help="network document (JSON)")
    p.add_argument("holonomies", help="holonomy document (JSON)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("ip", help="inner product of two networks over one registry")
    p.add_argument("network_a")
    p.add_argument("network_b")
    p.add_argument("--mc", type=int, default=None, metavar="N",
                   help="estimate by Monte Carlo with N samples instead of exactly")
    p.add_argument("--seed", type=int, default=None,
                   help="Monte Carlo seed (default: SPINNET_SEED or 0)")
    p.set_defaults(func=_cmd_ip)

    p = sub.add_parser("dip", help="diffeomorphism-averaged inner product")
    p.add_argument("network_a")
    p.add_argument("network_b")
    p.add_argument("--orientation-preserving-only", action="store_true",
                   help="restrict correspondences to orientation-preserving ones")
    p.set_defaults(func=_cmd_dip)

    p = sub.add_parser("gram", help="averaged Gram matrix of a list of networks")
    p.add_argument("networks", nargs="+", help="network documents (JSON)")
    p.add_argument("--orientation-preserving-only", action="store_true")
    p.set_defaults(func=_cmd_gram)

    p = sub.add_parser("section4", help="four-curve web observables")
    p.add_argument("--truncation", type=int, required=True, metavar="N",
                   help="number of columns on each side of the center")
    p.add_argument("--which", choices=("obs1", "obs2"), required=True,
                   help="obs1: overlap with the rerouted state; "
                        "obs2: overlaps with all single-column sign swaps")
    p.add_argument("--i0", type=int, default=None,
                   help="odd reroute column for obs1")
    p.add_argument("--emit-curves", metavar="PATH", default=None,
                   help="also write sampled curve polylines as CSV")
    p.add_argument("--resolution", type=int, default=64,
                   help="samples per arc for --emit-curves (default 64)")
    p.set_defaults(func=_cmd_section4)

    p = sub.add_parser("haar-projector",
                       help="projector onto the invariant subspace of a spin list")
    p.add_argument("--spins", type=int, nargs="+", required=True, metavar="TWICE_J",
                   help="spins as doubled integers, e.g. --spins 1 1 2")
    p.set_defaults(func=_cmd_haar_projector)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except (DocumentError, InvalidNetworkError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToleranceError as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(dumps_document(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
