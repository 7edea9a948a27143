"""Command-line interface: ``dfretract {feasibility,build,solve,diagnose}``.

Exit codes: 0 success, 1 usage or I/O error, 2 numerical non-convergence or
a failed diagnostic suite.  Reports are JSON documents described in
:mod:`dfretract.reports`; when ``--output`` is omitted they go to
``$DFRETRACT_OUTPUT_DIR/<command>.json`` if that variable is set, else to stdout.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from .dfcore.constants import potential_ratio
from .diagnostics import SUITES, feasibility_table, run_suites
from .exceptions import DiracFockError, DomainError, IterationError, LineSearchStalled, ModelFileError, PreconditionViolated
from .groundstate import SolveConfig, solve_ground_state
from .model import build_radial_hydrogenic, build_synthetic, load_model, save_model
from .reports import make_manifest, render_report, write_report

__all__ = ["main", "build_parser", "parse_alpha", "parse_range"]

OUTPUT_ENV = "DFRETRACT_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2

log = logging.getLogger("dfretract")


class UsageError(Exception):
    pass


def parse_alpha(text: str) -> Fraction:
    """``"1/137"`` or ``"0.0073"``, kept as an exact rational."""
    try:
        a = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"invalid alpha {text!r}") from exc
    if a <= 0:
        raise argparse.ArgumentTypeError("alpha must be positive")
    return a


def parse_range(text: str) -> list[float]:
    """``"a..b"`` (integer steps), ``"x"`` or a comma list."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            a, b = int(lo), int(hi)
            if b < a:
                raise ValueError
            return [float(z) for z in range(a, b + 1)]
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty range")
    return vals


def _channels(text: str) -> tuple[int, ...]:
    try:
        ch = tuple(int(c) for c in text.split(",") if c.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid channel list {text!r}") from exc
    if not ch or 0 in ch:
        raise argparse.ArgumentTypeError("channels must be nonzero integers")
    return ch


def _add_model_args(p: argparse.ArgumentParser, q_default: float | None = None) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", type=Path, help="model file written by 'build'")
    g.add_argument("--builder", choices=("synthetic", "radial"), help="build the model in memory instead")
    g.add_argument("--Z", type=float, default=1.0, help="nuclear charge (radial builder)")
    g.add_argument("--q", type=float, default=q_default, help="particle-number budget")
    g.add_argument("--alpha", type=parse_alpha, default=Fraction(1, 137))
    g.add_argument("--channels", type=_channels, default=(-1,), help="comma list of relativistic kappa values")
    g.add_argument("--n-per-channel", type=int, default=30)
    g.add_argument("--no-interaction", action="store_true")
    g.add_argument("--dim", type=int, default=8, help="dimension (synthetic builder)")
    g.add_argument("--rank", type=int, default=3, help="interaction rank (synthetic builder)")
    g.add_argument("--potential-scale", type=float, default=0.1)
    g.add_argument("--n-bound", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)


def _model_from_args(args):
    if args.model is not None:
        if args.builder is not None:
            raise UsageError("give either --model or --builder, not both")
        if not args.model.exists():
            raise UsageError(f"model file {args.model} does not exist")
        m = load_model(args.model)
        return m if args.q is None else m.with_q(args.q)
    if args.builder is None:
        raise UsageError("one of --model or --builder is required")
    q = 1.0 if args.q is None else args.q
    if args.builder == "radial":
        return build_radial_hydrogenic(
            args.Z,
            channels=args.channels,
            n_per_channel=args.n_per_channel,
            alpha=float(args.alpha),
            q=q,
            interaction=not args.no_interaction,
        )
    return build_synthetic(
        args.seed,
        dim=args.dim,
        interaction_rank=args.rank,
        potential_scale=args.potential_scale,
        q=q,
        alpha=float(args.alpha),
        n_bound=args.n_bound,
    )


def _manifest_params(args) -> dict:
    skip = {"func", "output", "verbose", "csv"}
    return {k: (str(v) if isinstance(v, (Path, Fraction)) else v) for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(command: str, args, payload: dict, checksum=None, seed=None) -> None:
    manifest = make_manifest(command, _manifest_params(args), model_checksum=checksum, seed=seed)
    out = args.output
    if out is None and os.environ.get(OUTPUT_ENV):
        out = Path(os.environ[OUTPUT_ENV]) / f"{command}.json"
    if out is None:
        sys.stdout.write(render_report(manifest, payload))
    else:
        write_report(out, manifest, payload)
        log.info("report written to %s", out)


def cmd_feasibility(args) -> int:
    if args.q_equals_Z == (args.q is not None):
        raise UsageError("give exactly one of --q or --q-equals-Z")
    kappa_mode = {"hardy": "hardy_bound", "exact": "matrix_exact"}[args.kappa]
    alpha = float(args.alpha)
    q_of_Z = (lambda Z: Z) if args.q_equals_Z else (lambda Z: args.q)
    vd_of_Z = None
    if kappa_mode == "matrix_exact":
        # discrete ||V D^-1|| of a point-nucleus s-wave basis at each Z
        def vd_of_Z(Z):
            m = build_radial_hydrogenic(Z, n_per_channel=args.n_per_channel, alpha=alpha, interaction=False)
            return potential_ratio(m)

    rows = feasibility_table(args.Z, q_of_Z, alpha, kappa_mode, vd_of_Z)
    feasible = [r["Z"] for r in rows if r["feasible"]]
    payload = {
        "alpha": str(args.alpha),
        "kappa_mode": kappa_mode,
        "rows": rows,
        "last_feasible_Z": max(feasible) if feasible else None,
    }
    if args.csv is not None:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    _emit("feasibility", args, payload)
    return EXIT_OK


def cmd_build(args) -> int:
    if args.model is not None:
        raise UsageError("build takes builder flags, not --model")
    m = _model_from_args(args)
    save_model(m, args.out)
    payload = {"path": str(args.out), "dim": m.dim, "rank": m.rank, "Z": m.Z, "q": m.q, "checksum": m.checksum}
    _emit("build", args, payload, checksum=m.checksum, seed=args.seed)
    return EXIT_OK


def cmd_solve(args) -> int:
    m = _model_from_args(args)
    cfg = SolveConfig(tol_gap=args.tol_gap, max_outer=args.max_outer, force=args.force)
    try:
        rep = solve_ground_state(m, cfg)
    except LineSearchStalled as exc:
        log.error("%s", exc)
        _emit("solve", args, {"status": "stalled", "error": str(exc), "report": exc.report.to_dict()}, m.checksum, args.seed)
        return EXIT_NUMERIC
    except IterationError as exc:
        log.error("%s", exc)
        _emit("solve", args, {"status": "retraction_failed", "error": str(exc)}, m.checksum, args.seed)
        return EXIT_NUMERIC
    except PreconditionViolated as exc:
        raise UsageError(f"{exc} (use --force to solve anyway)") from exc
    ok = rep.converged and rep.optimality_gap <= cfg.tol_gap
    payload = {"status": "converged" if ok else "not_converged", "report": rep.to_dict(include_gamma=args.include_gamma)}
    if any("feasibility" in w for w in rep.warnings):
        payload["banner"] = "WARNING: model fails the feasibility condition"
    _emit("solve", args, payload, m.checksum, args.seed)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_diagnose(args) -> int:
    names = [s for s in (args.suites or "").split(",") if s.strip()]
    if not names:
        log.info("no suites requested")
        return EXIT_OK
    bad = [n for n in names if n not in SUITES]
    if bad:
        raise UsageError(f"unknown suites {bad}; choose from {', '.join(SUITES)}")
    m = _model_from_args(args)
    results = run_suites(m, names, samples=args.samples, seed=args.seed, e=args.e)
    failed = [r.name for r in results if r.failed]
    payload = {"suites": [r.to_dict() for r in results], "failed": failed}
    _emit("diagnose", args, payload, m.checksum, args.seed)
    return EXIT_NUMERIC if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dfretract", description="Admissible Dirac-Fock ground states in finite bases.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("feasibility", help="table of the smallness condition over a range of Z")
    f.add_argument("--Z", type=parse_range, required=True, help="'a..b', a value or a comma list")
    f.add_argument("--q", type=float)
    f.add_argument("--q-equals-Z", action="store_true")
    f.add_argument("--alpha", type=parse_alpha, default=Fraction(1, 137))
    f.add_argument("--kappa", choices=("hardy", "exact"), default="hardy")
    f.add_argument("--n-per-channel", type=int, default=30, help="basis size for --kappa exact")
    f.add_argument("--csv", type=Path, help="also write the table as CSV")
    f.add_argument("--output", type=Path)
    f.set_defaults(func=cmd_feasibility)

    b = sub.add_parser("build", help="build a model and write it to a file")
    _add_model_args(b, q_default=1.0)
    b.add_argument("--out", type=Path, required=True, help="model file to write")
    b.add_argument("--output", type=Path)
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("solve", help="compute the admissible ground state")
    _add_model_args(s)
    s.add_argument("--tol-gap", type=float, default=1e-10)
    s.add_argument("--max-outer", type=int, default=200)
    s.add_argument("--force", action="store_true", help="solve even if the model is infeasible")
    s.add_argument("--include-gamma", action="store_true", help="embed the density matrix in the report")
    s.add_argument("--output", type=Path)
    s.set_defaults(func=cmd_solve)

    d = sub.add_parser("diagnose", help="run diagnostic suites")
    _add_model_args(d)
    d.add_argument("--suites", default=",".join(SUITES), help=f"comma list from {', '.join(SUITES)}; empty is a no-op")
    d.add_argument("--samples", type=int, default=None)
    d.add_argument("--e", type=float, default=1e-4, help="window width of the eigenvalue count")
    d.add_argument("--output", type=Path)
    d.set_defaults(func=cmd_diagnose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except (ModelFileError, OSError, DomainError, PreconditionViolated) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except DiracFockError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
