"""Command-line front end.

Three subcommands:

``manideg degree PROBLEM``
    Degree of the problem's seed map over its box (sign-sum by
    default, ``--method winding`` for the planar cross-check), printed
    as a JSON record with deterministic formatting.

``manideg trace PROBLEM``
    Follow the branch of forced periodic pairs rooted at the seed-map
    zero, writing one CSV row per solution pair.

``manideg verify-paper``
    Recompute the degrees of the six bundled reference problems and
    compare against their known values; exit 1 on any mismatch.

``PROBLEM`` is a problem-file path or the name of a bundled problem.
Exit codes: 2 malformed problem, 3 constraint regularity failure,
4 inadmissible boundary, 5 numeric failure.
"""

import argparse
import os
import sys

import numpy as np

from .continuation import trace_branch
from .degree import DomainBox, degree_sign_sum, degree_winding_2d, boundary_min
from .errors import (
    AdmissibilityError,
    NumericError,
    ProblemError,
    ProblemFormatError,
    RegularityError,
)
from .manifold import partial2_sign, reduced_map
from .problems import REFERENCE_DEGREES, REGISTRY, parse_problem

__all__ = ["main", "run", "load_problem", "verify_reference_problems"]

_EXIT_BY_ERROR = (
    (ProblemError, 2),
    (RegularityError, 3),
    (AdmissibilityError, 4),
    (NumericError, 5),
)


# --- deterministic JSON ----------------------------------------------------

def _json(value, indent=0):
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f'{pad}  "{key}": {_json(value[key], indent + 1)}'
            for key in sorted(value)
        ]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        items = [f"{pad}  {_json(v, indent + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, str):
        escaped = value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(value, np.ndarray):
        return _json(list(value), indent)
    raise TypeError(f"cannot serialise {type(value)!r}")


def _print_json(record, out=None):
    (out or sys.stdout).write(_json(record) + "\n")


# --- problem loading --------------------------------------------------------

def load_problem(source):
    """Problem from a file path or the bundled registry."""
    if os.path.exists(source):
        with open(source, "r", encoding="utf-8") as fh:
            return parse_problem(fh.read())
    if source in REGISTRY:
        return REGISTRY[source]
    known = ", ".join(sorted(REGISTRY))
    raise ProblemFormatError(
        f"{source!r} is neither a readable file nor a bundled problem ({known})"
    )


def _parse_box_option(text, dim):
    ranges = []
    for part in text.split(","):
        pieces = part.replace(":", " ").split()
        if len(pieces) != 2:
            raise ProblemFormatError(f"--box range {part!r} is not 'lo:hi'")
        ranges.append((float(pieces[0]), float(pieces[1])))
    if len(ranges) != dim:
        raise ProblemFormatError(f"--box has {len(ranges)} ranges, problem needs {dim}")
    return DomainBox.from_bounds(ranges)


# --- subcommands -------------------------------------------------------------

def _cmd_degree(args):
    problem = load_problem(args.problem)
    constraint = problem.build_constraint()
    phi1 = problem.build_phi1(args.quadrature_nodes)
    box = (_parse_box_option(args.box, constraint.dim)
           if args.box else problem.domain())
    sign = partial2_sign(constraint, box=box,
                         sample_density=problem.option("sample_density"))
    field = reduced_map(phi1, constraint)
    options = {}
    for key in ("grid_density", "newton_tol", "dedup_radius", "boundary_samples"):
        value = problem.option(key)
        if value is not None:
            options[key] = value

    if args.method == "winding":
        if constraint.dim != 2:
            raise ProblemFormatError(
                "--method winding applies to planar problems only"
            )
        degree = degree_winding_2d(field, box)
        record = {
            "problem": problem.name,
            "method": "winding",
            "degree": degree,
            "manifold_degree": sign * degree,
            "partial2_sign": sign,
            "boundary_min": boundary_min(field, box),
            "zeros": [],
            "warnings": [],
        }
    else:
        result = degree_sign_sum(field, box, **options)
        record = {
            "problem": problem.name,
            "method": result.method,
            "degree": result.degree,
            "manifold_degree": sign * result.degree,
            "partial2_sign": sign,
            "boundary_min": result.boundary_min,
            "zeros": [
                {
                    "location": list(z.location),
                    "residual": z.residual,
                    "jacobian_det": z.jacobian_det,
                    "index": z.index,
                }
                for z in result.zeros
            ],
            "warnings": list(result.warnings),
        }
    _print_json(record)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _print_json(record, fh)
    return 0


def _cmd_trace(args):
    problem = load_problem(args.problem)
    dae = problem.build_dae()
    seed_map = problem.build_seed_map(args.quadrature_nodes)
    seeds = [z for z in _find_seeds(problem, seed_map) if not z.degenerate]
    if not seeds:
        raise NumericError("no nondegenerate seed-map zero inside the box")
    seed = seeds[args.seed_index]
    steps = args.steps_per_period or problem.option("steps_per_period", 256)
    branch = trace_branch(dae, seed, ds=args.ds, lambda_max=args.lambda_max,
                          max_steps=args.max_steps, steps_per_period=int(steps))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            _write_branch_csv(branch, problem.variables, dae.k, fh)
        sys.stdout.write(
            f"{len(branch.points)} solution pairs ({branch.termination}) "
            f"-> {args.out}\n"
        )
    else:
        _write_branch_csv(branch, problem.variables, dae.k, sys.stdout)
    return 0


def _find_seeds(problem, seed_map):
    from .degree import find_zeros

    options = {}
    for key in ("grid_density", "newton_tol", "dedup_radius"):
        value = problem.option(key)
        if value is not None:
            options[key] = value
    return find_zeros(seed_map, problem.domain(), **options)


def _write_branch_csv(branch, variables, k, out):
    x_names = variables[:k]
    y_names = variables[k:]
    header = ["index", "lambda", *x_names, *y_names, "amplitude", "residual", "drift"]
    out.write(",".join(header) + "\n")
    for i, pair in enumerate(branch.points):
        cells = [str(i), f"{pair.lam:.17g}"]
        cells += [f"{v:.17g}" for v in pair.x0]
        cells += [f"{v:.17g}" for v in pair.y0]
        cells += [f"{pair.amplitude:.17g}", f"{pair.residual:.17g}",
                  f"{pair.drift:.17g}"]
        out.write(",".join(cells) + "\n")


def verify_reference_problems(expected=None, json_mode=False, out=None):
    """Recompute every bundled problem; returns the process exit code."""
    out = out or sys.stdout
    expected = expected if expected is not None else REFERENCE_DEGREES
    rows = []
    for name in sorted(REGISTRY):
        problem = REGISTRY[name]
        want = expected[name]
        constraint = problem.build_constraint()
        sign = partial2_sign(constraint)
        field = reduced_map(problem.build_phi1(), constraint)
        result = degree_sign_sum(field, problem.domain())
        manifold = sign * result.degree
        zero_err = float("nan")
        if len(result.zeros) == 1:
            zero_err = float(np.linalg.norm(
                result.zeros[0].location - np.array(want.zero)))
        ok = (
            result.degree == want.ambient_degree
            and sign == want.constraint_sign
            and manifold == want.manifold_degree
            and len(result.zeros) == 1
            and zero_err <= 1e-8
        )
        rows.append({
            "problem": name,
            "ambient_degree": result.degree,
            "constraint_sign": sign,
            "manifold_degree": manifold,
            "expected_ambient": want.ambient_degree,
            "expected_sign": want.constraint_sign,
            "expected_manifold": want.manifold_degree,
            "zero_error": zero_err,
            "ok": ok,
        })
    passed = sum(r["ok"] for r in rows)
    if json_mode:
        _print_json({"results": rows, "passed": passed, "total": len(rows)}, out)
    else:
        out.write(
            f"{'problem':<14}{'ambient':>8}{'sign':>6}{'manifold':>10}"
            f"{'expected':>10}{'zero-err':>12}  status\n"
        )
        for r in rows:
            status = "pass" if r["ok"] else "FAIL"
            out.write(
                f"{r['problem']:<14}{r['ambient_degree']:>8}{r['constraint_sign']:>6}"
                f"{r['manifold_degree']:>10}{r['expected_manifold']:>10}"
                f"{r['zero_error']:>12.2e}  {status}\n"
            )
        out.write(f"{passed}/{len(rows)} reference problems verified\n")
    return 0 if passed == len(rows) else 1


def _cmd_verify(args):
    return verify_reference_problems(json_mode=args.json)


# --- entry points -------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="manideg",
        description="Degree computations for tangent fields on implicit "
                    "manifolds and continuation of forced periodic orbits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_degree = sub.add_parser("degree", help="degree of a problem's seed map")
    p_degree.add_argument("problem", help="problem file or bundled name")
    p_degree.add_argument("--method", choices=("sign-sum", "winding"),
                          default="sign-sum")
    p_degree.add_argument("--box", help="override region, 'lo:hi,lo:hi,...'")
    p_degree.add_argument("--quadrature-nodes", type=int, default=None)
    p_degree.add_argument("--out", help="also write the JSON record to a file")
    p_degree.set_defaults(func=_cmd_degree)

    p_trace = sub.add_parser("trace", help="trace a branch of forced periodic pairs")
    p_trace.add_argument("problem", help="problem file or bundled name")
    p_trace.add_argument("--ds", type=float, default=0.02,
                         help="pseudo-arclength step (default 0.02)")
    p_trace.add_argument("--lambda-max", type=float, default=1.0)
    p_trace.add_argument("--max-steps", type=int, default=400)
    p_trace.add_argument("--steps-per-period", type=int, default=None)
    p_trace.add_argument("--seed-index", type=int, default=0,
                         help="which seed-map zero to continue (default first)")
    p_trace.add_argument("--quadrature-nodes", type=int, default=None)
    p_trace.add_argument("--out", help="CSV output path (default stdout)")
    p_trace.set_defaults(func=_cmd_trace)

    p_verify = sub.add_parser(
        "verify-paper",
        help="recompute the bundled reference degrees and compare",
    )
    p_verify.add_argument("--json", action="store_true",
                          help="machine-readable verdicts")
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    """Run the CLI; returns the exit code instead of raising SystemExit."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except tuple(cls for cls, _ in _EXIT_BY_ERROR) as exc:
        for cls, code in _EXIT_BY_ERROR:
            if isinstance(exc, cls):
                sys.stderr.write(f"error: {exc}\n")
                return code
        raise  # unreachable: the tuple above only admits listed classes


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
