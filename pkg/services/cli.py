"""
Intrinsic Audit command line.

Subcommands:
    run          one simulation from a flat config file
    detect-prob  detection law (and optional Monte Carlo estimate) as CSV
    sweep        one run per value of a config key, plus sweep.csv

Exit codes: 0 clean, 1 usage or config error, 2 a verifier rejected a round.
"""

import argparse
import logging
import sys
from typing import List, Optional

try:
    # Try relative imports first (when run as module)
    from .audit_agent import AuditAgent
    from .intrinsic_audit import ProtocolConfig, config_from_flat, load_config
    from .intrinsic_audit.config import EXIT_CODES
    from .intrinsic_audit.errors import AuditError
except ImportError:
    # Fallback to direct imports (when run as script)
    from audit_agent import AuditAgent
    from intrinsic_audit import ProtocolConfig, config_from_flat, load_config
    from intrinsic_audit.config import EXIT_CODES
    from intrinsic_audit.errors import AuditError

logger = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; 2 is reserved for detection here"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="intrinsic-audit", description="Intrinsic-proof federated audit simulator")
    parser.add_argument("--verbose", "-v", action="store_true", help="per-round DEBUG logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one simulation")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")

    detect = sub.add_parser("detect-prob", help="detection probability 1-(1-rho)^k")
    detect.add_argument("rho", type=float)
    detect.add_argument("k", type=int)
    detect.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    detect.add_argument("--n", type=int, default=10, help="clients per round (Monte Carlo)")
    detect.add_argument("--seed", type=int, default=0)

    sweep = sub.add_parser("sweep", help="one run per parameter value")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--param", required=True, help="flat config key to vary")
    sweep.add_argument("--values", required=True, help="comma-separated values")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--seed", type=int, default=None)

    return parser


def _load(path: str, seed: Optional[int]) -> ProtocolConfig:
    cfg = load_config(path)
    if seed is None:
        return cfg
    flat = cfg.to_flat()
    flat["seed"] = str(seed)
    return config_from_flat(flat)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.config, args.seed)
    outcome = AuditAgent().run_experiment(cfg, args.out)
    if outcome["any_reject"]:
        logger.warning(f"🚨 Detection: {outcome['summary']['rejected_rounds']} round(s) rejected")
        return EXIT_CODES["detection"]
    return EXIT_CODES["ok"]


def cmd_detect_prob(args: argparse.Namespace) -> int:
    table = AuditAgent().detection_table(
        args.rho, args.k, trials=args.trials, n_clients=args.n, seed=args.seed
    )
    sys.stdout.write(table.to_csv(index=False, float_format="%.12g"))
    return EXIT_CODES["ok"]


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load(args.config, args.seed)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise AuditError("--values is empty")
    table = AuditAgent().run_sweep(cfg, args.param, values, args.out)
    if table["any_reject"].any():
        return EXIT_CODES["detection"]
    return EXIT_CODES["ok"]


COMMANDS = {
    "run": cmd_run,
    "detect-prob": cmd_detect_prob,
    "sweep": cmd_sweep,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_CODES["config_error"]

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        return COMMANDS[args.command](args)
    except AuditError as e:
        logger.error(f"❌ {e}")
        return EXIT_CODES["config_error"]


if __name__ == "__main__":
    sys.exit(main())
