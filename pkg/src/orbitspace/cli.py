"""Command-line interface: ``orbitspace <command> [options]``.

Exit codes: 0 success, 1 failed check or witness, 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import charts, core, metrics, sampling, witnesses
from .catalog import (
    CatalogError,
    CatalogRecord,
    RunConfig,
    distance_matrix,
    dump_catalog,
    load_catalog,
    matrix_to_csv,
    matrix_to_json,
    nearest,
    pair_distance,
    parse_catalog,
)

VECTOR_COLUMNS = ("id", "cx", "cy", "cz", "ex", "ey", "ez", "h", "mx", "my", "mz")

GLOBAL_DEFAULTS = {
    "kappa2": 1.0,
    "p": "2",
    "metric": "rho",
    "seed": 42,
    "threads": None,
    "output": None,
    "format": None,
    "catalog": None,
    "skip_bad": False,
    "n_u": 512,
    "n_s": 256,
    "refine_tol": 1e-10,
}


class UsageError(Exception):
    pass


def _global_options():
    g = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    g.add_argument("--kappa2", type=float, default=S, help="gravitational parameter (default 1)")
    g.add_argument("--p", default=S, help="metric exponent, a number >= 1 or 'inf' (default 2)")
    g.add_argument("--metric", choices=("rho", "rho_star"), default=S, help="default rho")
    g.add_argument("--seed", type=int, default=S, help="seed for randomized checks (default 42)")
    g.add_argument("--threads", default=S, help="worker count or 'auto' (env ORBITS_THREADS)")
    g.add_argument("--output", default=S, help="write to this file instead of stdout")
    g.add_argument("--format", choices=("json", "csv"), default=S)
    g.add_argument("--catalog", default=S, help="catalog file (.csv or .json)")
    g.add_argument("--skip-bad", dest="skip_bad", action="store_true", default=S)
    g.add_argument("--n-u", dest="n_u", type=int, default=S)
    g.add_argument("--n-s", dest="n_s", type=int, default=S)
    g.add_argument("--refine-tol", dest="refine_tol", type=float, default=S)
    return g


def build_parser():
    common = _global_options()
    parser = argparse.ArgumentParser(prog="orbitspace", parents=[common], description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    conv = sub.add_parser("convert", parents=[common], help="elements <-> (c, e, h) vectors")
    conv.add_argument("--to", choices=("vectors", "elements"), default="vectors")
    conv.add_argument("--input", default="-", help="input file, '-' for stdin")
    conv.add_argument("--input-format", choices=("json", "csv"), default=None)

    dist = sub.add_parser("dist", parents=[common], help="distance between two catalog records")
    dist.add_argument("--a", required=True)
    dist.add_argument("--b", required=True)

    sub.add_parser("matrix", parents=[common], help="pairwise distance matrix of a catalog")

    near = sub.add_parser("nearest", parents=[common], help="k nearest records to a query id")
    near.add_argument("--id", required=True)
    near.add_argument("-k", type=int, default=1)

    check = sub.add_parser("check", parents=[common], help="randomized consistency checks")
    check_sub = check.add_subparsers(dest="check", metavar="check")
    check_sub.required = True
    for name, help_text in (("roundtrip", "chart round trips"), ("axioms", "metric axioms")):
        c = check_sub.add_parser(name, parents=[common], help=help_text)
        c.add_argument("--samples", type=int, default=1000 if name == "roundtrip" else 50)

    wit = sub.add_parser("witness", parents=[common], help="topological witnesses (JSON reports)")
    wsub = wit.add_subparsers(dest="witness", metavar="witness")
    wsub.required = True
    w = wsub.add_parser("degree", parents=[common])
    w.add_argument("--map", default="identity", choices=sorted(witnesses.NAMED_MAPS))
    w.add_argument("--depth", type=int, default=4)
    w = wsub.add_parser("obstruction", parents=[common])
    w.add_argument("--r", type=float, default=1.0)
    w.add_argument("--b", type=float, default=0.0)
    w.add_argument("--depth", type=int, default=4)
    w.add_argument("--tangent", type=float, default=0.0, help="amplitude of the Laplace-vector field")
    w = wsub.add_parser("cauchy", parents=[common])
    w.add_argument("--n-max", dest="n_max", type=int, default=20)
    w = wsub.add_parser("unbounded", parents=[common])
    w.add_argument("--R", dest="R", type=float, nargs="+", default=[10.0])
    w.add_argument("--samples", type=int, default=1000)
    w = wsub.add_parser("completeness", parents=[common])
    w.add_argument("--space", choices=("H_b", "Estar"), default="H_b")
    w.add_argument("--b", type=float, default=0.0)
    w.add_argument("--n-max", dest="n_max", type=int, default=20)

    ver = sub.add_parser("verify", parents=[common], help="propagator checks")
    vsub = ver.add_subparsers(dest="verify", metavar="verify")
    vsub.required = True
    v = vsub.add_parser("conservation", parents=[common])
    v.add_argument("--dt", type=float, default=1e-4)
    v.add_argument("--steps", type=int, default=None, help="default: one orbital period")
    v.add_argument("--a", type=float, default=1.0)
    v.add_argument("--ecc", type=float, default=0.5)
    v.add_argument("--tol", type=float, default=1e-6)
    return parser


def _config(args):
    try:
        return RunConfig(
            kappa2=args.kappa2,
            metric=args.metric,
            p=args.p,
            n_u=args.n_u,
            n_s=args.n_s,
            refine_tol=args.refine_tol,
            seed=args.seed,
            threads=args.threads,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, text):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(args, config, name, body):
    header = {"command": name, "seed": config.seed, "kappa2": config.kappa2}
    return json.dumps({**header, **body}, indent=1, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _records(args, config):
    if not args.catalog:
        raise UsageError("--catalog is required for this command")
    return load_catalog(args.catalog, kappa2=config.kappa2, skip_bad=args.skip_bad)


def _read_input(path):
    if path == "-":
        return sys.stdin.read()
    with open(path) as fh:
        return fh.read()


def cmd_convert(args, config):
    text = _read_input(args.input)
    in_fmt = args.input_format or ("json" if text.lstrip().startswith(("[", "{")) else "csv")
    out_fmt = args.format or in_fmt
    if args.to == "vectors":
        records, _ = parse_catalog(text, in_fmt, config.kappa2, args.skip_bad)
        rows = []
        for rec in records:
            orb = rec.orbit
            rows.append(dict(zip(VECTOR_COLUMNS, [rec.id, *orb.c, *orb.e, orb.h, *orb.edir])))
        _emit(args, _dump_rows(rows, VECTOR_COLUMNS, out_fmt))
        return 0
    rows = _load_rows(text, in_fmt)
    records = []
    for row in rows:
        c = [float(row[k]) for k in ("cx", "cy", "cz")]
        e = np.array([float(row[k]) for k in ("ex", "ey", "ez")])
        emag = float(np.linalg.norm(e))
        if emag > 0:
            edir = e / emag
        elif all(row.get(k) not in (None, "") for k in ("mx", "my", "mz")):
            edir = [float(row[k]) for k in ("mx", "my", "mz")]
        else:
            edir = core.default_pericenter(c)
        orb = core.EllipticOrbit(c, emag, edir, config.kappa2)
        records.append(CatalogRecord(str(row["id"]), core.orbit_to_elements(orb), config.kappa2))
    _emit(args, dump_catalog(records, out_fmt))
    return 0


def _load_rows(text, fmt):
    if fmt == "json":
        return json.loads(text)
    return list(csv.DictReader(io.StringIO(text)))


def _dump_rows(rows, columns, fmt):
    if fmt == "json":
        return json.dumps(rows, indent=1, default=_json_default) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(float(v)) if k != "id" else v) for k, v in row.items()})
    return buf.getvalue()


def cmd_dist(args, config):
    records = _records(args, config)
    try:
        value = pair_distance(records, args.a, args.b, config)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    _emit(args, repr(float(format(value, ".12g"))) + "\n")
    return 0


def cmd_matrix(args, config):
    records = _records(args, config)
    matrix = distance_matrix(records, config)
    ids = [r.id for r in records]
    if (args.format or "json") == "csv":
        _emit(args, matrix_to_csv(ids, matrix))
    else:
        _emit(args, matrix_to_json(ids, matrix, config))
    return 0


def cmd_nearest(args, config):
    records = _records(args, config)
    try:
        ranked = nearest(records, args.id, args.k, config)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if (args.format or "json") == "csv":
        text = "id,distance\n" + "".join(f"{rid},{v:.12g}\n" for rid, v in ranked)
    else:
        body = {"query": args.id, "k": args.k, "metric": config.metric, "p": config.p_label,
                "neighbors": [{"id": rid, "distance": float(f"{v:.12g}")} for rid, v in ranked]}
        text = json.dumps(body, indent=1) + "\n"
    _emit(args, text)
    return 0


def roundtrip_residuals(samples, seed):
    """Maximum round-trip errors of the three charts over seeded samples."""
    rng = np.random.default_rng(seed)
    worst = {"h_chart": 0.0, "h_manifold": 0.0, "curvilinear": 0.0, "estar": 0.0}
    for npt in sampling.random_normalized_points(rng, samples):
        back = charts.chart_h_inverse(charts.chart_h_forward(npt))
        scale = max(1.0, float(np.linalg.norm(npt.c)), float(np.linalg.norm(npt.e)), abs(npt.h))
        err = max(np.max(np.abs(back.c - npt.c)), np.max(np.abs(back.e - npt.e)), abs(back.h - npt.h))
        worst["h_chart"] = max(worst["h_chart"], err / scale)
        r4, r5 = back.residuals()
        worst["h_manifold"] = max(worst["h_manifold"], abs(r4), abs(r5) / max(1.0, abs(back.h) * np.dot(back.c, back.c)))
        if np.linalg.norm(npt.c) > 0:
            b = 0.5 * float(np.linalg.norm(npt.c))
            c, e = charts.chart_curvilinear_inv(charts.chart_curvilinear(npt.c, npt.e, b), b)
            err = max(np.max(np.abs(c - npt.c)), np.max(np.abs(e - npt.e)))
            worst["curvilinear"] = max(worst["curvilinear"], err / max(1.0, np.linalg.norm(npt.c)))
    for orb in sampling.random_elliptic_orbits(rng, samples):
        back = charts.chart_estar_inv(charts.chart_estar(orb), orb.kappa2)
        err = max(np.max(np.abs(back.c - orb.c)), np.max(np.abs(back.e - orb.e)))
        worst["estar"] = max(worst["estar"], err)
    return {k: float(v) for k, v in worst.items()}


def cmd_check(args, config):
    if args.check == "roundtrip":
        worst = roundtrip_residuals(args.samples, config.seed)
        ok = max(worst.values()) <= 1e-10
        body = {"samples": args.samples, "max_residuals": worst, "max_residual": max(worst.values()), "pass": ok}
        _emit(args, _report(args, config, "check roundtrip", body))
        return 0 if ok else 1
    report = metric_axioms(args.samples, config)
    _emit(args, _report(args, config, "check axioms", report))
    return 0 if report["pass"] else 1


def metric_axioms(samples, config):
    """Symmetry, identity and triangle inequality on seeded triples."""
    rng = np.random.default_rng(config.seed)
    xs = sampling.random_elliptic_orbits(rng, samples, kappa2=config.kappa2)
    ys = sampling.random_elliptic_orbits(rng, samples, kappa2=config.kappa2)
    zs = sampling.random_elliptic_orbits(rng, samples, kappa2=config.kappa2)
    fn = metrics.rho_many if config.metric == "rho" else metrics.rho_star_many
    spec = config.spec

    def vals(a, b):
        return np.array([r.value for r in fn(a, b, spec)])

    xy, yx, yz, xz, xx = vals(xs, ys), vals(ys, xs), vals(ys, zs), vals(xs, zs), vals(xs, xs)
    symmetry = float(np.max(np.abs(xy - yx)))
    triangle = float(np.max(xz - xy - yz))
    identity = float(np.max(xx))
    ok = symmetry <= 1e-10 and triangle <= 1e-9 and identity <= spec.refine_tol
    return {"samples": samples, "metric": config.metric, "p": config.p_label,
            "max_asymmetry": symmetry, "max_triangle_excess": triangle,
            "max_self_distance": identity, "pass": ok}


def cmd_witness(args, config):
    kind = args.witness
    if kind == "degree":
        body = witnesses.sphere_degree(witnesses.NAMED_MAPS[args.map], args.depth).to_dict()
        body["map"] = args.map
        expected = {"identity": 1, "antipodal": -1, "constant": 0, "winding2": 2, "winding3": 3, "winding-1": -1}
        ok = body["degree"] == expected[args.map]
    elif kind == "obstruction":
        body = witnesses.orbit_sphere_obstruction(args.r, args.depth, args.b, args.tangent).to_dict()
        ok = body["degree"] == 1
    elif kind == "cauchy":
        rep = witnesses.cauchy_circle_witness(args.n_max, config.p, config.spec, config.kappa2)
        body = rep.to_dict()
        ok = rep.limit_candidate_excluded and rep.expected_max_deviation <= 10 * config.refine_tol
    elif kind == "unbounded":
        rep = witnesses.unbounded_components_witness(args.R, config.kappa2, args.samples, config.seed)
        body = rep.to_dict()
        resid = witnesses.max_residual(rep.below + rep.above, config.kappa2)
        body["escape_max_residual"] = resid
        ok = resid == 0.0 and all(
            lo.norm > R and hi.norm > R for lo, hi, R in zip(rep.below, rep.above, rep.scales)
        ) and body["stratum_max_norm"] <= rep.stratum_bound + 1e-12
    else:
        rep = witnesses.completeness_probe(args.space, config.spec, args.b, args.n_max, config.kappa2)
        body = rep.to_dict()
        ok = rep.limit_candidate_excluded and rep.expected_max_deviation <= 10 * config.refine_tol
    body["pass"] = bool(ok)
    _emit(args, _report(args, config, f"witness {kind}", body))
    return 0 if ok else 1


def conservation_drift(a=1.0, ecc=0.5, dt=1e-4, steps=None, kappa2=1.0):
    """Max drift of (h, c, e) along an RK4 trajectory started at pericenter."""
    el = core.KeplerElements(a, ecc, 0.3, 0.2, 0.1)
    state = core.state_from_elements(el, kappa2)
    if steps is None:
        steps = int(round(2 * math.pi * math.sqrt(a**3 / kappa2) / dt))
    ref = core.integrals_of_motion(state)
    worst = {"h": 0.0, "c": 0.0, "e": 0.0}
    chunk = max(1, steps // 50)
    done = 0
    while done < steps:
        n = min(chunk, steps - done)
        state = core.propagate(state, dt, n)
        done += n
        pt = core.integrals_of_motion(state)
        worst["h"] = max(worst["h"], abs(pt.h - ref.h))
        worst["c"] = max(worst["c"], float(np.linalg.norm(pt.c - ref.c)))
        worst["e"] = max(worst["e"], float(np.linalg.norm(pt.e - ref.e)))
    return worst, steps


def cmd_verify(args, config):
    worst, steps = conservation_drift(args.a, args.ecc, args.dt, args.steps, config.kappa2)
    ok = max(worst.values()) <= args.tol
    body = {"dt": args.dt, "steps": steps, "a": args.a, "ecc": args.ecc, "max_drift": worst, "pass": ok}
    _emit(args, _report(args, config, "verify conservation", body))
    return 0 if ok else 1


COMMANDS = {
    "convert": cmd_convert,
    "dist": cmd_dist,
    "matrix": cmd_matrix,
    "nearest": cmd_nearest,
    "check": cmd_check,
    "witness": cmd_witness,
    "verify": cmd_verify,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        config = _config(args)
        return COMMANDS[args.command](args, config)
    except UsageError as exc:
        print(f"orbitspace: error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except (CatalogError, OSError, core.OrbitError, ValueError, KeyError) as exc:
        print(f"orbitspace: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
