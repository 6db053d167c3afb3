import logging

from ewalk.commands import (
    EXIT_OK,
    add_coin_arguments,
    add_output_arguments,
    coin_from_args,
    emit,
)
from ewalk.dynamics import CSV_COLUMNS, continued_fraction, figure1_dataset
from ewalk.errors import EwalkError
from ewalk.models import RationalField

logger = logging.getLogger(__name__)


def _fields(text: str, convergents: bool):
    fields = []
    for item in text.split(","):
        field = RationalField.parse(item.strip())
        if convergents:
            expansion = continued_fraction(field.num, field.den)
            fields.extend(RationalField(c.numerator, c.denominator) for c in expansion.convergents)
        else:
            fields.append(field)
    return fields


def run_evolve(args) -> int:
    if args.steps < 1:
        raise EwalkError(f"--steps must be >= 1, got {args.steps}")
    kinds = ("U", "W") if args.kind == "both" else (args.kind,)
    variant = None if args.variant == "auto" else args.variant
    rows = figure1_dataset(
        coin_from_args(args),
        _fields(args.fields, args.convergents),
        steps=args.steps,
        kinds=kinds,
        variant=variant,
    )
    emit(args, rows, list(CSV_COLUMNS))
    return EXIT_OK


def run_cf(args) -> int:
    text = args.value.strip()
    num, _, den = text.partition("/")
    try:
        p, q = int(num), int(den or 1)
    except ValueError as exc:
        raise EwalkError(f"expected p/q, got {text!r}") from exc
    emit(args, continued_fraction(p, q).as_dict())
    return EXIT_OK


def register(subparsers):
    evolve = subparsers.add_parser("evolve", help="sigma(t) traces with revival errors")
    add_coin_arguments(evolve)
    evolve.add_argument("--kind", choices=("U", "W", "both"), default="both")
    evolve.add_argument("--fields", default="1/5", help="comma separated n/m list")
    evolve.add_argument("--steps", type=int, default=100)
    evolve.add_argument(
        "--variant", choices=("auto", "plain", "tilde"), default="auto", help="field variant, auto per kind"
    )
    evolve.add_argument("--convergents", action="store_true", help="expand each field into its convergents")
    add_output_arguments(evolve, "csv")
    evolve.set_defaults(handler=run_evolve)

    cf = subparsers.add_parser("cf", help="continued fraction of p/q")
    cf.add_argument("value", help="p/q")
    add_output_arguments(cf)
    cf.set_defaults(handler=run_cf)
