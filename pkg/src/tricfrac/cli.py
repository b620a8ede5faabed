"""Command-line front end.

Exit status: 0 on success, 1 on invalid input, 2 on a numerical failure
(pole, singular matrix, theory/iteration mismatch).
"""
from __future__ import annotations

import argparse
import io
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import fixed_point, matrix_cf, oracle, scalar_cf
from .errors import NumericalError, ValidationError
from .model_io import dump_model, dumps, format_float, load_model
from .operators import build_block_tridiagonal, homogeneous_tridiagonal

COMMANDS = ("factorize", "greens", "iterate", "sv-scan", "fixed-point", "oracle-check", "sweep")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _positive_float(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def _values(text):
    """``a,b,c`` list or ``start:stop:num`` range (num >= 2)."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"range must be start:stop:num, got {text!r}")
        start, stop, num = float(parts[0]), float(parts[1]), int(parts[2])
        if num < 2:
            raise argparse.ArgumentTypeError(f"range needs at least 2 points, got {num}")
        return [float(v) for v in np.linspace(start, stop, num)]
    values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise argparse.ArgumentTypeError("empty value list")
    if not all(np.isfinite(values)):
        raise argparse.ArgumentTypeError("values must be finite")
    return values


def _add_model_args(p):
    src = p.add_argument_group("model")
    src.add_argument("--model", help="JSON model file")
    src.add_argument("--n", type=_positive_int, help="size of an inline homogeneous model")
    src.add_argument("--alpha", type=float, default=None)
    src.add_argument("--beta", type=float, default=None)
    src.add_argument("--gamma", type=float, default=None)
    p.add_argument("--dump-model", metavar="PATH", help="write the ingested model as JSON")


def _add_output_args(p, default_format):
    p.add_argument("--output", "-o", metavar="PATH", help="write to PATH instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser():
    parser = _Parser(prog="tricfrac", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("factorize", help="U F L factors of H - z")
    _add_model_args(p)
    p.add_argument("--z", type=_complex, default=0j)
    _add_output_args(p, "json")

    p = sub.add_parser("greens", help="Green's function f_1(z) = [(H - z)^-1]_11")
    _add_model_args(p)
    p.add_argument("--z", type=_complex, default=0j)
    p.add_argument("--dense-check", action="store_true", help="compare with a dense inverse")
    _add_output_args(p, "json")

    p = sub.add_parser("iterate", help="homogeneous continued-fraction iteration trace")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--steps", type=_positive_int, default=10, help="maximum number of map applications")
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--scalar", action="store_true", help="iterate the scalar map f -> 2/(2 beta - f)")
    p.add_argument("--f0", type=float, default=0.0, help="scalar starting value")
    p.add_argument("--require-convergence", action="store_true", help="exit 2 unless converged")
    _add_output_args(p, "csv")

    p = sub.add_parser("sv-scan", help="singular values from the secular function")
    _add_model_args(p)
    p.add_argument("--sigma-max", type=_positive_float, default=None)
    p.add_argument("--grid", type=int, default=matrix_cf.DEFAULT_GRID)
    p.add_argument("--refine-tol", type=_positive_float, default=matrix_cf.DEFAULT_REFINE_TOL)
    p.add_argument("--method", choices=("count", "sign"), default="count")
    p.add_argument("--check", action="store_true", help="compare the count with the dense oracle")
    p.add_argument("--grid-csv", metavar="PATH", help="also write the sigma,det samples as CSV")
    _add_output_args(p, "json")

    p = sub.add_parser("fixed-point", help="closed-form fixed points and convergence verdict")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--max-iter", type=_positive_int, default=10_000)
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--no-check", action="store_true", help="skip the iteration cross-check")
    _add_output_args(p, "json")

    p = sub.add_parser("oracle-check", help="compare continued-fraction results with dense routines")
    _add_model_args(p)
    p.add_argument("--z", type=_complex, default=None, help="shift for the Green's function check")
    p.add_argument("--tol", type=_positive_float, default=1e-8)
    _add_output_args(p, "json")

    p = sub.add_parser("sweep", help="convergence verdicts over a beta x gamma grid")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--beta", type=_values, required=True, help="list a,b,c or range start:stop:num")
    p.add_argument("--gamma", type=_values, required=True, help="list a,b,c or range start:stop:num")
    p.add_argument("--max-iter", type=_positive_int, default=10_000)
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--jobs", type=_positive_int, default=1)
    _add_output_args(p, "csv")
    return parser


def _model(args):
    inline = [args.n, args.alpha, args.beta, args.gamma]
    if args.model and any(v is not None for v in inline):
        raise ValidationError("give either --model or inline --n/--alpha/--beta/--gamma, not both")
    if args.model:
        h = load_model(args.model)
    else:
        if args.n is None or args.beta is None:
            raise ValidationError("inline model needs at least --n and --beta")
        h = homogeneous_tridiagonal(
            args.n,
            1.0 if args.alpha is None else args.alpha,
            args.beta,
            0.0 if args.gamma is None else args.gamma,
        )
    if args.dump_model:
        dump_model(h, args.dump_model)
    return h


def _cplx(z):
    return [float(np.real(z)), float(np.imag(z))]


def _csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else format_float(v) for v in row) + "\n")
    return buf.getvalue()


def _emit(args, text):
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _metadata(h):
    return {"n": h.n, "scaling": h.scaling, "energy_scale": float(h.energy_scale)}


def cmd_factorize(args):
    h = _model(args)
    fac = scalar_cf.factorize(h, args.z)
    if args.format == "csv":
        rows = []
        for k in range(fac.n):
            up = fac.u_super[k] if k < fac.n - 1 else 0j
            lo = fac.l_sub[k] if k < fac.n - 1 else 0j
            rows.append([str(k + 1), *_cplx(fac.f_diag[k]), *_cplx(up), *_cplx(lo)])
        return _csv(["k", "fdiag_re", "fdiag_im", "usuper_re", "usuper_im", "lsub_re", "lsub_im"], rows)
    return dumps(
        {
            "model": _metadata(h),
            "z": _cplx(args.z),
            "u_super": [_cplx(v) for v in fac.u_super],
            "f_diag": [_cplx(v) for v in fac.f_diag],
            "l_sub": [_cplx(v) for v in fac.l_sub],
        }
    )


def cmd_greens(args):
    h = _model(args)
    f1 = scalar_cf.greens_f1(h, args.z)
    out = {"model": _metadata(h), "z": _cplx(args.z), "f1": _cplx(f1)}
    if args.dense_check:
        ref = oracle.dense_inverse(h.to_dense() - args.z * np.eye(h.n))[0, 0]
        out["dense_f1"] = _cplx(ref)
        out["abs_diff"] = float(abs(ref - f1))
    if args.format == "csv":
        return _csv(["z_re", "z_im", "f1_re", "f1_im"], [[*_cplx(args.z), *_cplx(f1)]])
    return dumps(out)


def cmd_iterate(args):
    if args.scalar:
        trace = scalar_cf.scalar_iterate(args.beta, args.f0, args.steps, args.tol)
        converged = trace.converged
        if args.format == "csv":
            text = _csv(["step", "f"], [[str(i), f] for i, f in enumerate(trace.values)])
        else:
            text = dumps(
                {"status": str(trace.status), "steps": trace.steps, "limit": trace.limit,
                 "values": list(trace.values)}
            )
    else:
        trace = matrix_cf.mcf_iterate_homogeneous(
            args.alpha, args.beta, args.gamma, args.sigma, args.steps, args.tol
        )
        converged = trace.converged
        if args.format == "csv":
            text = _csv(["step", "u", "x", "y"], [[str(r[0]), *r[1:]] for r in trace.rows])
        else:
            text = dumps(
                {
                    "status": str(trace.status),
                    "steps": trace.steps,
                    "reason": trace.reason,
                    "limit": list(trace.limit) if trace.limit else None,
                    "rows": [{"step": r[0], "u": r[1], "x": r[2], "y": r[3]} for r in trace.rows],
                }
            )
    if args.require_convergence and not converged:
        sys.stdout.write(text)
        raise NumericalError(f"iteration did not converge ({trace.status})")
    return text


def cmd_sv_scan(args):
    h = _model(args)
    res = matrix_cf.singular_values_scan(
        build_block_tridiagonal(h),
        sigma_max=args.sigma_max,
        grid_points=args.grid,
        refine_tol=args.refine_tol,
        method=args.method,
        check=args.check,
        full_output=True,
    )
    grid_text = _csv(["sigma", "det"], zip(res.grid, res.det))
    if args.grid_csv:
        with open(args.grid_csv, "w", newline="") as fh:
            fh.write(grid_text)
    if args.format == "csv":
        return grid_text
    out = {
        "model": _metadata(h),
        "method": res.method,
        "singular_values": [float(v) for v in res.values],
        "jittered": [float(v) for v in res.jittered],
    }
    if res.warnings:
        out["warnings"] = list(res.warnings)
    return dumps(out)


def cmd_fixed_point(args):
    report = fixed_point.convergence_verdict(
        args.sigma, args.beta, args.gamma, alpha=args.alpha,
        max_iter=args.max_iter, tol=args.tol, check=not args.no_check,
    )
    if args.format == "csv":
        rows = [[c.u, c.x, c.y, c.radius, "true" if c.stable else "false"] for c in report.completed]
        return _csv(["u", "x", "y", "radius", "stable"], rows)
    return dumps(report.to_dict())


def cmd_oracle_check(args):
    h = _model(args)
    hb = build_block_tridiagonal(h)
    mcf = matrix_cf.singular_values_scan(hb)
    ref = oracle.svd_values(h)
    n_ok = mcf.size == ref.size
    err = float(np.max(np.abs(mcf - ref) / np.maximum(1.0, ref))) if n_ok else float("inf")
    z = args.z
    if z is None:
        z = complex(0.0, 1.0 + float(np.max(np.abs(h.diagonal))))
    f1 = scalar_cf.greens_f1(h, z)
    f1_ref = oracle.dense_inverse(h.to_dense() - z * np.eye(h.n))[0, 0]
    energies = oracle.eig_complex(h)
    passed = n_ok and err <= args.tol and abs(f1 - f1_ref) <= args.tol * max(1.0, abs(f1_ref))
    out = {
        "model": _metadata(h),
        "singular_values": {"mcf": [float(v) for v in mcf], "dense": [float(v) for v in ref],
                            "max_rel_diff": err if n_ok else None, "count_match": n_ok},
        "greens": {"z": _cplx(z), "mcf": _cplx(f1), "dense": _cplx(f1_ref)},
        "energies": [_cplx(e) for e in energies],
        "passed": bool(passed),
    }
    text = dumps(out)
    if not passed:
        sys.stdout.write(text + "\n")
        raise NumericalError("continued-fraction results disagree with the dense oracle")
    return text


def _sweep_cell(cell):
    sigma, beta, gamma, max_iter, tol = cell
    rep = fixed_point.convergence_verdict(sigma, beta, gamma, max_iter=max_iter, tol=tol)
    st = rep.stable
    return [beta, gamma, rep.verdict] + ([st.u, st.x, st.y, st.radius] if st else ["", "", "", ""])


def cmd_sweep(args):
    cells = [(args.sigma, b, g, args.max_iter, args.tol) for b in args.beta for g in args.gamma]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    if args.format == "json":
        keys = ["beta", "gamma", "verdict", "u", "x", "y", "radius"]
        return dumps([{k: (v if v != "" else None) for k, v in zip(keys, r)} for r in rows])
    return _csv(["beta", "gamma", "verdict", "u", "x", "y", "radius"], rows)


HANDLERS = {
    "factorize": cmd_factorize,
    "greens": cmd_greens,
    "iterate": cmd_iterate,
    "sv-scan": cmd_sv_scan,
    "fixed-point": cmd_fixed_point,
    "oracle-check": cmd_oracle_check,
    "sweep": cmd_sweep,
}


def run(argv=None):
    """Parse ``argv`` and execute; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = HANDLERS[args.command](args)
    except ValidationError as exc:
        print(f"tricfrac: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"tricfrac: numerical error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"tricfrac: error: {exc}", file=sys.stderr)
        return 1
    _emit(args, text)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
