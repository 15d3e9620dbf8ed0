"""``msa`` command line: ``msa analyze`` and ``msa check``.

Exit status: 0 analysis ran (a missing spectral gap is only a warning),
2 usage error, 3 invalid or unreadable model, 4 solver failure.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import __version__
from .assembly import assemble
from .conditioning import DEFAULT_THRESHOLD, estimate_condition
from .eigen import ConvergenceError
from .model import ModelError, build_dof_map, parse_model
from .report import emit_svg, svg_filename, write_report
from .stability import run_stability_analysis

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MODEL = 3
EXIT_SOLVER = 4


def _index_list(text: str) -> list[int]:
    try:
        out = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not out or min(out) < 1:
        raise argparse.ArgumentTypeError("eigenpair indices are 1-based positive integers")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="msa", description="Model stability analysis of 2D FE models.")
    p.add_argument("--version", action="version", version=f"msa {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("model", help="model file (JSON)")
        sp.add_argument("--tol", type=float, default=1e-8, help="relative residual tolerance")
        sp.add_argument("--cond-threshold", type=float, default=DEFAULT_THRESHOLD,
                        help="condition number above which A counts as ill-conditioned")
        sp.add_argument("--seed", type=int, default=42, help="Lanczos starting-vector seed")
        sp.add_argument("--dump-matrix", metavar="PATH",
                        help="write the assembled matrix as 'row col value' lines")

    a = sub.add_parser("analyze", help="run the full stability analysis")
    common(a)
    a.add_argument("--ns", type=int, default=8, help="number of smallest eigenpairs")
    a.add_argument("--nl", type=int, default=0, help="number of largest eigenpairs")
    a.add_argument("--gf", type=float, default=10.0, help="spectral gap factor (>= 1)")
    a.add_argument("--out", metavar="PATH", help="write the JSON report here")
    a.add_argument("--svg-dir", metavar="DIR", help="write one SVG per energy field here")
    a.add_argument("--svg-eigvec", type=_index_list, metavar="LIST",
                   help="comma-separated eigenpair indices to plot (default: all fields)")

    c = sub.add_parser("check", help="estimate the condition number only")
    common(c)
    return p


def _load(path: str):
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ModelError(f"cannot read model file: {exc.strerror or exc}") from None
    return parse_model(data), hashlib.sha256(data).hexdigest()


def _dump_matrix(A, path) -> None:
    lines = [f"# n={A.n} nnz={A.nnz} upper-triangle 0-based"] + A.coo_lines()
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _analyze(args) -> int:
    model, digest = _load(args.model)
    if args.dump_matrix:
        _dump_matrix(assemble(model, build_dof_map(model)), args.dump_matrix)
    report = run_stability_analysis(model, n_s=args.ns, n_l=args.nl, gf=args.gf, tol=args.tol,
                                    cond_threshold=args.cond_threshold, seed=args.seed,
                                    input_digest=digest)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)

    cond = report.condition
    print(f"kappa_est = {cond.kappa_est:.6g} "
          f"({'ill-conditioned' if cond.ill_conditioned else 'well-conditioned'})")
    if report.gap is not None:
        print(f"spectral gap k = {report.gap.k if report.gap.k is not None else 'none'}")
    for f in report.fields:
        print(f"{f.kind}[{f.eigen_index}] lambda = {f.eigenvalue:.6g} "
              f"suspect elements: {' '.join(map(str, f.suspects)) or '-'}")

    if args.out:
        write_report(report, args.out)
    if args.svg_dir:
        out = Path(args.svg_dir)
        out.mkdir(parents=True, exist_ok=True)
        wanted = set(args.svg_eigvec) if args.svg_eigvec else None
        for f in report.fields:
            if f.degenerate or (wanted is not None and f.eigen_index not in wanted):
                continue
            emit_svg(model, f, out / svg_filename(f))
    return EXIT_OK


def _check(args) -> int:
    model, _ = _load(args.model)
    A = assemble(model, build_dof_map(model))
    if args.dump_matrix:
        _dump_matrix(A, args.dump_matrix)
    cond = estimate_condition(A, args.cond_threshold, tol=args.tol, seed=args.seed)
    print(f"kappa_est = {cond.kappa_est:.6g}")
    print(f"lambda_min_est = {cond.lambda_min_est:.6g}")
    print(f"lambda_max_est = {cond.lambda_max_est:.6g}")
    print(f"ill_conditioned = {str(cond.ill_conditioned).lower()} "
          f"(threshold {cond.threshold:.6g})")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _analyze(args) if args.command == "analyze" else _check(args)
    except ModelError as exc:
        print(f"error: invalid model: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except ConvergenceError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
