"""Command-line entry point: ``maskopt {analyze,run,kl,sweep} SCENARIO``.

Exit codes: 0 success, 1 invalid scenario or failed run, 2 breach under
``--require-private``, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import MaskoptError, PrivacyBreach
from .harness import SWEEP_COLUMNS, run_protocol, sweep_sigma, write_sweep_csv
from .privacy import Breach, analyze, compute_epsilon, distance, view_kl_closed_form, view_kl_monte_carlo
from .scenario import load_scenario

EXIT_OK, EXIT_INVALID, EXIT_BREACH, EXIT_USAGE = 0, 1, 2, 64
COMMANDS = ("analyze", "run", "kl", "sweep")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sigmas(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="maskopt", description="Masked distributed optimization simulator and privacy analyzer.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("analyze", help="print the privacy report as JSON")
    p.add_argument("scenario")
    p.add_argument("--require-private", action="store_true", help="exit 2 if the coalition cuts the honest agents")

    p = sub.add_parser("run", help="run both protocol phases and report")
    p.add_argument("scenario")
    p.add_argument("--trace", metavar="CSV", help="write the optimizer trace")
    p.add_argument("--report", metavar="JSON", help="write the run report (default: stdout)")
    p.add_argument("--figure", metavar="PNG", help="render the convergence figure")
    p.add_argument("--require-private", action="store_true")

    p = sub.add_parser("kl", help="closed-form vs Monte-Carlo KL between the two coefficient sets")
    p.add_argument("scenario")
    p.add_argument("--trials", type=int, help="Monte-Carlo trials (default from scenario)")
    p.add_argument("--seed", type=int, help="Monte-Carlo seed (default from scenario)")
    p.add_argument("--require-private", action="store_true")

    p = sub.add_parser("sweep", help="epsilon and accuracy across noise scales")
    p.add_argument("scenario")
    p.add_argument("--sigmas", type=_sigmas, required=True, metavar="S1,S2,...")
    p.add_argument("--csv", metavar="CSV", help="write the table as CSV")
    p.add_argument("--figure", metavar="PNG", help="render epsilon/residual against sigma")
    return parser


def _dump(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _analyze(args, s) -> int:
    report = analyze(s.graph, s.adversary, s.sigma)
    _dump(report.to_dict())
    return EXIT_BREACH if args.require_private and not report.private else EXIT_OK


def _run(args, s) -> int:
    report = run_protocol(s, trace_path=args.trace)
    if args.figure:
        from .plotting import plot_trace

        plot_trace(report.trace, args.figure, title=s.name)
    text = report.to_json()
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(text)
        eps = report.privacy.to_dict()["epsilon"]
        print(f"{s.name}: x* = {report.x_star_centralized.tolist()}  iterations = {report.trace.iterations}  epsilon = {eps}")
        for name, check in report.checks.items():
            print(f"  {name}: {'pass' if check['pass'] else 'FAIL'} (deviation {check['deviation']:.3g})")
    else:
        sys.stdout.write(text)
    if args.require_private and not report.privacy.private:
        return EXIT_BREACH
    return EXIT_OK if report.ok else EXIT_INVALID


def _kl(args, s) -> int:
    if s.alpha_prime is None:
        print(f"{s.name}: scenario has no [kl] alpha_prime block", file=sys.stderr)
        return EXIT_INVALID
    alpha = s.costs.alpha
    trials = args.trials or s.kl_trials
    seed = s.kl_seed if args.seed is None else args.seed
    try:
        closed = view_kl_closed_form(s.graph, s.adversary, s.sigma, alpha, s.alpha_prime)
    except PrivacyBreach:
        _dump({"epsilon": "breach", "closed_form": None, "monte_carlo": None, "bound": None})
        return EXIT_BREACH if args.require_private else EXIT_OK
    mc = view_kl_monte_carlo(s.graph, s.adversary, s.sigma, alpha, s.alpha_prime, trials, seed)
    eps = compute_epsilon(s.graph, s.adversary, s.sigma).epsilon
    dist = distance(alpha, s.alpha_prime)
    out = {
        "closed_form": closed,
        "monte_carlo": mc.estimate,
        "trials": mc.trials,
        "bound": eps * dist**2,
        "epsilon": eps,
        "dist": dist,
    }
    if mc.warning:
        out["warning"] = mc.warning
    _dump(out)
    return EXIT_OK


def _sweep(args, s) -> int:
    rows = sweep_sigma(s, args.sigmas)
    widths = [10, 14, 16, 11, 10]
    print("".join(c.ljust(w) for c, w in zip(SWEEP_COLUMNS, widths)))
    for row in rows:
        eps = "breach" if isinstance(row.epsilon, Breach) else f"{row.epsilon:.6g}"
        cells = [f"{row.sigma:g}", eps, f"{row.final_residual:.3e}", str(row.iterations), str(row.converged)]
        print("".join(c.ljust(w) for c, w in zip(cells, widths)))
    if args.csv:
        write_sweep_csv(rows, args.csv)
    if args.figure:
        from .plotting import plot_sweep

        plot_sweep(rows, args.figure, title=s.name)
    return EXIT_OK


HANDLERS = {"analyze": _analyze, "run": _run, "kl": _kl, "sweep": _sweep}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or argv[0] not in COMMANDS and argv[0] not in ("-h", "--help"):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        scenario = load_scenario(args.scenario)
        return HANDLERS[args.command](args, scenario)
    except MaskoptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
