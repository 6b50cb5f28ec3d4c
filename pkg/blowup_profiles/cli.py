from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import SolverSettings
from .core import ProfileForm, RightBC, Symmetry
from .errors import ArchiveError, BlowupError, ConvergenceError, DomainError, IntegrationError, QuadratureError
from .oscillatory import Direction
from .profiles import F_STAR_PEAK

EXIT_OK = 0
EXIT_CONVERGENCE = 2
EXIT_INVALID = 3


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 3, the code for invalid arguments."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _settings_args(ap: argparse.ArgumentParser) -> None:
    ap.add_argument("--preset", default="default", help="Preset name or JSON path in presets/ (default: default)")
    ap.add_argument("--eps", type=float, default=None, help="Regularization eps (overrides the preset).")
    ap.add_argument("--tol", type=float, default=None, help="Collocation tolerance (overrides the preset).")
    ap.add_argument("--max-nodes", dest="max_nodes", type=int, default=None,
                    help="Mesh node cap (overrides BLOWUP_MAX_NODES and the preset).")


def _parse_args(argv=None):
    ap = _Parser(prog="blowup-profiles", description="Self-similar blow-up profiles of the thin-film equation "
                                                    "with source.")
    ap.add_argument("-v", "--verbose", action="count", default=0, help="-v for progress, -vv for solver detail.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="Compute one profile.")
    _settings_args(s)
    s.add_argument("--n", type=float, required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--form", choices=[f.value for f in ProfileForm], default=ProfileForm.S.value,
                   help="Profile equation; F_form_S switches to the general form away from p = n+1.")
    s.add_argument("--symmetry", choices=[v.value for v in Symmetry], default=Symmetry.EVEN.value)
    s.add_argument("--radius", type=float, default=None, help="Right end R of the domain [0, R].")
    s.add_argument("--right-bc", dest="right_bc", choices=[v.value for v in RightBC], default=None)
    s.add_argument("--drift", type=float, default=None, help="Override of the drift coefficient (mu).")
    s.add_argument("--guess", default=None, help="Stored profile to warm-start from.")
    s.add_argument("--glue", default=None, help="Components sign@shift, e.g. '+1@-7,+1@7', glued from --base.")
    s.add_argument("--plus-2k", dest="plus_2k", type=int, default=None,
                   help="Seed with 2k crossings of +F_* built from the periodic orbit and --base.")
    s.add_argument("--base", default=None, help="Stored F0 profile used by --glue and --plus-2k.")
    s.add_argument("--negate", action="store_true", help="Flip the sign of the seed.")
    s.add_argument("--out", default=None, help="Profile archive (.json).")
    s.add_argument("--csv", default=None, help="Plot table y,F,dF,d2F,d3F.")
    s.add_argument("--log-interface", dest="log_interface", action="store_true",
                   help="Write (log10(y0-y), log10|F|) to --csv instead.")

    b = sub.add_parser("branch", help="Continue stored profiles in p or mu.")
    _settings_args(b)
    b.add_argument("--from", dest="seeds", action="append", default=[], help="Seed profile; repeat for several.")
    b.add_argument("--param", choices=["p", "mu"], default="p")
    b.add_argument("--to", type=float, required=True)
    b.add_argument("--dp", type=float, default=0.01)
    b.add_argument("--out", required=True, help="Branch archive (.json); points go to <stem>_points/.")
    b.add_argument("--csv", default=None)
    b.add_argument("--resume", action="store_true", help="Continue the branch stored in --out.")
    b.add_argument("--parallel", type=int, default=1, help="Worker processes for several seeds.")

    o = sub.add_parser("oscillate", help="Oscillatory component at the interface.")
    _settings_args(o)
    o.add_argument("--n", type=float, required=True, help="Use inf for the sign limit.")
    o.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.OSCILLATORY.value)
    o.add_argument("--x0", type=float, nargs=3, default=None)
    o.add_argument("--mu", type=float, default=None, help="Exponent for the non-oscillatory spectrum.")
    o.add_argument("--csv", default=None, help="Component table s,phi,dphi,d2phi.")
    o.add_argument("--orbit-csv", dest="orbit_csv", default=None)

    sp = sub.add_parser("spectral", help="Rescaled kernel basis and bi-orthogonality report.")
    _settings_args(sp)
    sp.add_argument("--l-max", dest="l_max", type=int, default=None)
    sp.add_argument("--csv", default=None, help="Gram matrix table.")

    k = sub.add_parser("kernel", help="Table of the rescaled kernel and its derivatives.")
    _settings_args(k)
    k.add_argument("--y-max", dest="y_max", type=float, default=10.0)
    k.add_argument("--samples", type=int, default=201)
    k.add_argument("--csv", required=True)

    c = sub.add_parser("classify", help="Multiindex and interface of a stored profile.")
    _settings_args(c)
    c.add_argument("path")
    c.add_argument("--tail-threshold", dest="tail_threshold", type=float, default=None)

    per = sub.add_parser("periodic", help="Spatially periodic solution by shooting.")
    _settings_args(per)
    per.add_argument("--n", type=float, required=True)
    per.add_argument("--F0", type=float, default=None)
    per.add_argument("--f-star", dest="f_star", action="store_true",
                     help="Shoot through the F_* orbit instead of F(0) = 1.5.")
    per.add_argument("--csv", default=None)
    return ap.parse_args(argv)


def _configure_logging(verbose: int) -> None:
    level = logging.WARNING if verbose <= 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(message)s", stream=sys.stderr, force=True)


def _dispatch(args, settings: SolverSettings) -> str:
    if args.command == "solve":
        return pipeline.run_solve(args.n, args.p, settings, args.out, form=args.form, symmetry=args.symmetry,
                                  radius=args.radius, right_bc=args.right_bc, drift=args.drift, guess=args.guess,
                                  glue=args.glue, plus_2k=args.plus_2k, base=args.base, negate=args.negate,
                                  csv=args.csv, log_interface=args.log_interface)
    if args.command == "branch":
        return pipeline.run_branch(args.seeds, args.param, args.to, args.dp, args.out, settings, csv=args.csv,
                                   resume=args.resume, parallel=args.parallel)
    if args.command == "oscillate":
        return pipeline.run_oscillate(args.n, settings, direction=args.direction, x0=args.x0, csv=args.csv,
                                      orbit_csv=args.orbit_csv, mu=args.mu)
    if args.command == "spectral":
        return pipeline.run_spectral(settings, l_max=args.l_max, gram_csv=args.csv)
    if args.command == "kernel":
        return pipeline.run_kernel(settings, args.csv, y_max=args.y_max, samples=args.samples)
    if args.command == "classify":
        return pipeline.run_classify(args.path, settings, tail_threshold=args.tail_threshold)
    return pipeline.run_periodic(args.n, F0=F_STAR_PEAK if args.f_star else args.F0, csv=args.csv)


def main(argv=None) -> int:
    try:
        args = _parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)
    try:
        settings = SolverSettings.load(args.preset, eps=args.eps, tol=args.tol, max_nodes=args.max_nodes)
        print(_dispatch(args, settings))
    except (ConvergenceError, IntegrationError, QuadratureError) as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DomainError, ArchiveError) as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BlowupError as exc:
        print(f"[error] {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
