"""Command-line interface: ``sraembed <command> ...``.

Exit codes: 0 on success, 1 when the input is not a valid metric or a
construction's hypothesis fails, 2 on usage errors (bad flags, missing files).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .assouad import audit_assouad, build_scale_function
from .audit import check_inequality, distortion_audit
from .charts import frechet_charts, frechet_map, table_provider
from .errors import SraEmbedError
from .generators import GenSpec, generate
from .maps import PointMap, embedding_from_csv, embedding_to_csv
from .metric_core import FiniteMetricSpace, doubling_certificate, load_space, space_to_json
from .pipeline import PipelineConstants, build_extension, embed, theoretical_bounds
from .sra import SraParams, build_core_subset, critical_radii, find_sra_subspace, sra_free_parameter


class UsageError(Exception):
    pass


def _threads() -> int:
    raw = os.environ.get("SRA_EMBED_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"SRA_EMBED_THREADS must be an integer, got {raw!r}")
    if value < 0:
        raise UsageError("SRA_EMBED_THREADS must be >= 0")
    return value


def _alpha(value: float) -> float:
    if not 0 < value < 1:
        raise UsageError(f"--alpha must lie in (0, 1), got {value}")
    return value


def _load(path: str, fmt: Optional[str]) -> FiniteMetricSpace:
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    return load_space(path, fmt)


def _emit(obj: dict, out: Optional[str] = None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _names(space: FiniteMetricSpace, subset) -> Optional[list]:
    return None if subset is None else [space.labels[i] for i in subset]


def _subset(space: FiniteMetricSpace, spec: str) -> tuple:
    names = [s.strip() for s in spec.split(",") if s.strip()]
    lookup = {str(label): i for i, label in enumerate(space.labels)}
    unknown = [n for n in names if n not in lookup]
    if unknown:
        raise UsageError(f"unknown labels in --subset: {unknown}")
    if not names:
        raise UsageError("--subset is empty")
    return tuple(sorted({lookup[n] for n in names}))


def _read_embedding(space: FiniteMetricSpace, path: str, subset=None) -> np.ndarray:
    """Rows of an embedding CSV in the space's point order (or ``subset``'s)."""
    if not Path(path).is_file():
        raise UsageError(f"no such file: {path}")
    labels, values = embedding_from_csv(Path(path).read_text())
    rows = {lab: i for i, lab in enumerate(labels)}
    want = range(space.n) if subset is None else subset
    missing = [space.labels[p] for p in want if str(space.labels[p]) not in rows]
    if missing:
        raise SraEmbedError(f"embedding has no row for {missing[0]!r}")
    return values[[rows[str(space.labels[p])] for p in want]]


# -- commands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    space = _load(args.input, args.format)
    print(f"valid: {space.n} points, diameter {space.diameter():.17g}")
    return 0


def cmd_analyze(args) -> int:
    space = _load(args.input, args.format)
    alpha = _alpha(args.alpha)
    free_k = sra_free_parameter(space, alpha)
    largest = find_sra_subspace(space, SraParams(alpha, free_k - 1))
    cert = doubling_certificate(space)
    report = {
        "n": space.n,
        "alpha": alpha,
        "sra_free_k": free_k,
        "largest_sra_subset": _names(space, largest),
        "doubling": {
            "constant": cert.constant,
            "center": space.labels[cert.center],
            "radius": cert.radius,
            "cover": _names(space, cert.cover),
        },
    }
    if args.k is not None:
        if args.k < 4:
            raise UsageError("--k must be at least 4 for critical radii")
        params = SraParams(alpha, args.k)
        entries = critical_radii(space, params, _threads())
        core, _ = build_core_subset(space, params, entries)
        report["critical_radii"] = [
            {"point": space.labels[e.point], "radius": e.radius, "witness": _names(space, e.witness)}
            for e in entries
        ]
        report["core"] = _names(space, core)
    _emit(report)
    return 0


def _ledger(space: FiniteMetricSpace, fmap: PointMap, constants: PipelineConstants) -> dict:
    bound = theoretical_bounds(constants)
    ledger = constants.to_dict()
    ledger["points"] = space.n
    ledger["dimension"] = fmap.dim
    ledger["scale"] = fmap.scale
    if space.n >= 2:
        report = distortion_audit(space, fmap)
        report.add(check_inequality("distortion", bound, report.distortion, "<="))
        report.add(check_inequality("co-lipschitz", fmap.scale, report.colipschitz, ">="))
        ledger["audit"] = report.to_dict(space.labels)
    return ledger


def cmd_embed(args) -> int:
    space = _load(args.input, args.format)
    if args.k < 3:
        raise UsageError("--k must be at least 3")
    alpha = _alpha(args.alpha)
    fmap, constants = embed(space, args.k, alpha, _threads())
    Path(args.output).write_text(embedding_to_csv(space.labels, fmap.values))
    ledger_path = args.ledger or f"{args.output}.ledger.json"
    _emit(_ledger(space, fmap, constants), ledger_path)
    print(f"wrote {space.n} x {fmap.dim} embedding to {args.output}, ledger to {ledger_path}")
    return 0


def _extension_inputs(args, space):
    Y = _subset(space, args.subset)
    theta = args.theta
    if not 0 < theta <= 1:
        raise UsageError(f"--theta must lie in (0, 1], got {theta}")
    if args.phi:
        values = _read_embedding(space, args.phi, Y)
        phi = PointMap(Y, values)
        if len(Y) >= 2:
            rep = distortion_audit(space, phi)
            phi = phi.with_claims(rep.colipschitz, rep.distortion)
    else:
        phi = frechet_map(space, Y)
    f = build_scale_function(space, Y, theta)
    charts, nbar, worst = frechet_charts(space, f)
    D = max(1.0, worst) if args.distortion is None else args.distortion
    return Y, theta, phi, charts, nbar, D


def _run_extension(args, whole: bool) -> int:
    space = _load(args.input, args.format)
    Y, theta, phi, charts, nbar, D = _extension_inputs(args, space)
    ext = build_extension(space, Y, phi, table_provider(charts, nbar), theta, D, nbar, zeta=args.zeta)
    big = ext.assouad
    checks = audit_assouad(space, big)
    report = {
        "subset": _names(space, Y),
        "theta": theta,
        "zeta": ext.zeta,
        "chart_distortion": D,
        "nbar": nbar,
        "M": big.M,
        "palette": big.palette,
        "phi_scale": ext.s,
        "phi_distortion": ext.dist_phi,
    }
    if whole:
        fmap = ext.map
        report["scale"] = fmap.scale
        report["distortion_bound"] = fmap.claimed_distortion
        if space.n >= 2:
            audit = distortion_audit(space, fmap)
            on_y = bool(np.array_equal(fmap.values[list(Y), : phi.dim], phi.values)) and not np.any(
                fmap.values[list(Y), phi.dim :]
            )
            checks.append(check_inequality("co-lipschitz", fmap.scale, audit.colipschitz, ">="))
            checks.append(check_inequality("distortion", fmap.claimed_distortion, audit.distortion, "<="))
            report["audit"] = audit.to_dict(space.labels)
            report["agrees_on_subset"] = on_y
    else:
        fmap = big.phi
    report["dimension"] = fmap.dim
    report["checks"] = [asdict(c) for c in checks]
    report["passed"] = all(c.passed for c in checks) and report.get("agrees_on_subset", True)
    if args.output:
        Path(args.output).write_text(embedding_to_csv(space.labels, fmap.values))
    if args.dump:
        _emit(big.debug_dump(space.labels), args.dump)
    _emit(report)
    return 0 if report["passed"] else 1


def cmd_extend(args) -> int:
    return _run_extension(args, whole=True)


def cmd_assouad(args) -> int:
    return _run_extension(args, whole=False)


def cmd_audit(args) -> int:
    space = _load(args.space, args.format)
    values = _read_embedding(space, args.embedding)
    if space.n < 2:
        raise SraEmbedError("audit needs at least two points")
    report = distortion_audit(space, PointMap(space.all_points(), values))
    if args.ledger:
        if not Path(args.ledger).is_file():
            raise UsageError(f"no such file: {args.ledger}")
        ledger = json.loads(Path(args.ledger).read_text())
        report.add(check_inequality("distortion", ledger["theoretical_bound"], report.distortion, "<="))
        report.add(check_inequality("co-lipschitz", ledger["scale"], report.colipschitz, ">="))
    _emit(report.to_dict(space.labels))
    return 0 if report.passed else 1


def cmd_gen(args) -> int:
    if not Path(args.spec).is_file():
        raise UsageError(f"no such file: {args.spec}")
    obj = json.loads(Path(args.spec).read_text())
    if args.seed is not None:
        obj["seed"] = args.seed
    space = generate(GenSpec.from_dict(obj))
    if args.format == "csv" or (args.format is None and args.output.endswith(".csv")):
        lines = [",".join(str(lab) for lab in space.labels)]
        lines += [",".join("%.17g" % v for v in row) for row in space.dist]
        Path(args.output).write_text("\n".join(lines) + "\n")
    else:
        Path(args.output).write_text(space_to_json(space) + "\n")
    print(f"wrote {space.n}-point {obj['family']} instance to {args.output}")
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sraembed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = dict(choices=("json", "csv"), default=None, help="input format (default: from the file extension)")

    p = sub.add_parser("validate", help="check that a distance matrix is a metric")
    p.add_argument("input")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="SRA-free parameter, doubling estimate, critical radii")
    p.add_argument("input")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("embed", help="embed an SRA-free space")
    p.add_argument("input")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("-o", "--output", required=True, help="embedding CSV")
    p.add_argument("--ledger", help="constants ledger JSON (default: <output>.ledger.json)")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_embed)

    for name, func, what in (
        ("extend", cmd_extend, "extend a map on a subset to the whole space"),
        ("assouad", cmd_assouad, "build the scale-net map for f = theta * d(., subset)"),
    ):
        p = sub.add_parser(name, help=what)
        p.add_argument("input")
        p.add_argument("--subset", required=True, help="comma-separated labels")
        p.add_argument("--theta", type=float, required=True)
        p.add_argument("--zeta", type=float)
        p.add_argument("--distortion", type=float, help="chart distortion D (default: measured)")
        p.add_argument("--phi", help="embedding CSV of the subset (default: distances to the subset)")
        p.add_argument("-o", "--output", help="write the resulting map as CSV")
        p.add_argument("--dump", help="write nets, colors and block norms as JSON")
        p.add_argument("--format", **fmt)
        p.set_defaults(func=func)

    p = sub.add_parser("audit", help="measure the distortion of an embedding")
    p.add_argument("space")
    p.add_argument("embedding")
    p.add_argument("--ledger", help="check against the bounds recorded by embed")
    p.add_argument("--format", **fmt)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("gen", help="generate an instance from a JSON spec")
    p.add_argument("spec")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sraembed {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except (SraEmbedError, ValueError, KeyError) as exc:
        kind = type(exc).__name__
        witness = getattr(exc, "witness", None)
        extra = f" (witness {witness})" if witness is not None else ""
        print(f"sraembed {args.command}: {kind}: {exc}{extra}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"sraembed {args.command}: usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
