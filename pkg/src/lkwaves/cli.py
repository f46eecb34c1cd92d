"""Command-line entry point: ``lkwaves <subcommand> ...``.

Exit codes: 0 success, 1 invalid input, 2 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import __version__
from .chaos import Form, chaos_term, verify_reduction
from .coefficients import Manifold, all_coefficients
from .errors import LkwavesError
from .geometry import estimate_lkc
from .harness import ExperimentConfig, emit_plotdata, run_ensemble, summarize
from .lattice import enumerate_frequencies
from .sampler import WaveSpec, load_field, sample, save_field

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


def _levels(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list {text!r}") from None


def _resolution(text: str):
    parts = text.lower().split("x")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad resolution {text!r}; use M or MTHETAxMPHI") from None
    return vals[0] if len(vals) == 1 else tuple(vals)


def _writer():
    return csv.writer(sys.stdout, lineterminator="\n")


def cmd_lattice(args) -> int:
    fs = enumerate_frequencies(args.n)
    w = _writer()
    w.writerow(("n", "xi1", "xi2"))
    for a, b in fs.points:
        w.writerow((fs.n, a, b))
    print(f"# N_n={fs.multiplicity} mu4={fs.mu4!r} epc_degenerate={fs.epc_degenerate}")
    return EXIT_OK


def cmd_coeffs(args) -> int:
    w = _writer()
    w.writerow(("key", "value"))
    for key, value in all_coefficients(args.manifold, args.n, args.u).items():
        w.writerow((key, repr(value)))
    return EXIT_OK


def cmd_sample(args) -> int:
    grid = sample(WaveSpec(Manifold(args.manifold), args.n, args.seed, args.replicate), args.res)
    path = save_field(grid, args.out)
    print(f"wrote {path} shape={'x'.join(map(str, grid.shape))}")
    return EXIT_OK


def cmd_lkc(args) -> int:
    grid = load_field(args.input)
    w = _writer()
    w.writerow(("level", "L0", "L1", "L2", "estimator", "resolution"))
    for u in args.levels:
        row = estimate_lkc(grid, u, boundary=args.boundary, eps=args.eps).as_row()
        w.writerow([repr(row["level"]), repr(row["L0"]), repr(row["L1"]), repr(row["L2"]),
                    row["estimator"], row["resolution"]])
    return EXIT_OK


def cmd_chaos(args) -> int:
    grid = load_field(args.input)
    try:
        term = chaos_term(grid, args.k, args.q, args.u, args.form)
    except NotImplementedError as exc:
        raise LkwavesError(str(exc)) from exc
    w = _writer()
    w.writerow(("k", "q", "u", "form", "value"))
    w.writerow((term.k, term.q, repr(term.u), term.form.value, repr(term.value)))
    return EXIT_OK


def cmd_verify_reduction(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    report = verify_reduction(
        cfg.manifold,
        cfg.energies,
        [float(u) for u in cfg.levels],
        cfg.replicates,
        seed=cfg.seed,
        resolution=cfg.resolution_for(cfg.energies[0]) if cfg.resolution is not None else None,
        pathwise_tol=cfg.pathwise_tol,
        min_correlation=cfg.min_correlation,
    )
    out = Path(args.out) if args.out else Path(cfg.output_dir) / "reduction_errors.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    cols = ("n", "replicate", "level", "k", "derivative", "reduced", "error")
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in report.rows:
            w.writerow(["" if row[c] is None else repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])
    print(json.dumps({**report.to_dict(), "errors_csv": str(out)}, indent=2))
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_ensemble(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.output_dir:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "output_dir": args.output_dir})
    result = run_ensemble(cfg, workers=args.workers)
    print(json.dumps({"output_dir": cfg.output_dir, "records": len(result.records),
                      "pathwise_pass": result.summary["pathwise_pass"], **result.metadata}, indent=2))
    return EXIT_OK if result.summary["pathwise_pass"] else EXIT_FAILED


def cmd_summarize(args) -> int:
    summary = summarize(args.input)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK if summary["pathwise_pass"] else EXIT_FAILED


def cmd_plotdata(args) -> int:
    for name, path in emit_plotdata(args.input, args.out).items():
        print(f"{name}: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lkwaves", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    manifolds = [m.value for m in Manifold]

    p = sub.add_parser("lattice", help="lattice points on the circle of radius sqrt(n)")
    p.add_argument("n", type=int)
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("coeffs", help="chaos coefficients at one level")
    p.add_argument("--manifold", choices=manifolds, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--u", type=float, required=True)
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("sample", help="sample one eigenfunction on a grid")
    p.add_argument("--manifold", choices=manifolds, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replicate", type=int, default=0)
    p.add_argument("--res", type=_resolution, default=None, help="M (torus) or MTHETAxMPHI (sphere)")
    p.add_argument("--out", required=True, help=".csv or .npz")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("lkc", help="LKCs of excursion sets of a stored field")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--levels", type=_levels, required=True)
    p.add_argument("--boundary", choices=("marching", "eps"), default="marching")
    p.add_argument("--eps", type=float, default=None)
    p.set_defaults(func=cmd_lkc)

    p = sub.add_parser("chaos", help="one chaotic projection of a stored field")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--k", type=int, choices=(0, 1, 2), required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--form", choices=[f.value for f in Form], default=Form.DERIVATIVE.value)
    p.set_defaults(func=cmd_chaos)

    p = sub.add_parser("verify-reduction", help="compare derivative and reduced second chaoses")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="per-replicate error CSV")
    p.set_defaults(func=cmd_verify_reduction)

    p = sub.add_parser("ensemble", help="run a configured ensemble")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("summarize", help="summary statistics of stored records")
    p.add_argument("--in", dest="input", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("plotdata", help="plot-ready CSV tables from stored records")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except (LkwavesError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
