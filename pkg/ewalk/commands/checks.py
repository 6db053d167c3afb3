import logging

import numpy as np

from ewalk.cmv import CMV_TOL, cmv_report, random_pairs, walk_to_cmv
from ewalk.commands import (
    add_coin_arguments,
    add_output_arguments,
    coin_from_args,
    emit,
    verdict,
)
from ewalk.models import RationalField
from ewalk.sieve import SIEVE_TOL, random_coin_sequence, sieve_report

logger = logging.getLogger(__name__)

DEFECT_KEYS = ("sieving_defect", "parity_defect", "electric_defect")
CMV_KEYS = ("stencil_defect", "correspondence_defect", "boxed_entry_defect", "round_trip_defect")


def run_sieve_check(args) -> int:
    field = RationalField.parse(args.field) if args.field else None
    reports = [sieve_report(coin_from_args(args), args.ring, field)]
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        reports.append(sieve_report(random_coin_sequence(args.ring, rng), args.ring))
    worst = max(report.get(key, 0.0) for report in reports for key in DEFECT_KEYS)
    emit(args, {"reports": reports, "max_defect": worst, "seed": args.seed})
    return verdict("sieve-check", worst, SIEVE_TOL)


def run_cmv_check(args) -> int:
    reports = []
    if args.coin_pairs:
        for kind, pairs in walk_to_cmv(coin_from_args(args)).items():
            report = cmv_report(pairs, args.sites)
            report["walk"] = kind
            reports.append(report)
    rng = np.random.default_rng(args.seed)
    for _ in range(args.random):
        reports.append(cmv_report(random_pairs(args.sites, rng), args.sites))
    worst = max((report[key] for report in reports for key in CMV_KEYS), default=0.0)
    emit(args, {"reports": reports, "max_defect": worst, "seed": args.seed})
    return verdict("cmv-check", worst, CMV_TOL)


def register(subparsers):
    sieve = subparsers.add_parser("sieve-check", help="U^2 against the two split-step walks")
    add_coin_arguments(sieve)
    sieve.add_argument("--field", default=None, help="also check the electric version for n/m")
    sieve.add_argument("--ring", type=int, default=8, help="even ring size in cells, a multiple of 2m with --field")
    sieve.add_argument("--random", type=int, default=0, help="random coin sequences to add")
    sieve.add_argument("--seed", type=int, default=0)
    add_output_arguments(sieve)
    sieve.set_defaults(handler=run_sieve_check)

    cmv = subparsers.add_parser("cmv-check", help="GECMV stencil and split-step correspondence")
    add_coin_arguments(cmv)
    cmv.add_argument("--no-coin", action="store_false", dest="coin_pairs", help="skip the coin's own pairs")
    cmv.add_argument("--sites", type=int, default=64, help="even number of scalar sites")
    cmv.add_argument("--random", type=int, default=1, help="random pair sequences")
    cmv.add_argument("--seed", type=int, default=0)
    add_output_arguments(cmv)
    cmv.set_defaults(handler=run_cmv_check)
