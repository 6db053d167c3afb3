import logging

import numpy as np

from ewalk.banded import RingWindow, build_matrix
from ewalk.commands import (
    EXIT_DEFECT,
    EXIT_OK,
    add_output_arguments,
    add_walk_arguments,
    coin_from_args,
    emit,
    field_from_args,
    verdict,
)
from ewalk.floquet import (
    dispersion_table,
    max_velocity,
    revival_defect,
    spectrum_bands,
    velocity_chain,
)
from ewalk.models import WalkSpec

logger = logging.getLogger(__name__)

VELOCITY_TOL = 1e-9
REVIVAL_TOL = 1e-8
SPECTRUM_TOL = 1e-10


def run_dispersion(args) -> int:
    rows = dispersion_table(args.kind, coin_from_args(args), field_from_args(args), args.samples)
    emit(args, rows, ["theta", "omega_plus", "omega_minus", "group_velocity"])
    return EXIT_OK


def run_velocity(args) -> int:
    coin, field = coin_from_args(args), field_from_args(args)
    if args.chain:
        chain = velocity_chain(coin, field)
        emit(args, chain.as_dict())
        return EXIT_OK if chain.exponents_equal else EXIT_DEFECT
    report = max_velocity(args.kind, coin, field)
    emit(args, report.as_dict())
    return verdict("velocity", abs(report.numeric - report.closed_form), VELOCITY_TOL)


def run_revival(args) -> int:
    report = revival_defect(args.kind, coin_from_args(args), field_from_args(args))
    emit(args, report.as_dict())
    return verdict("revival", abs(report.numeric - report.closed_form), REVIVAL_TOL)


def run_spectrum(args) -> int:
    coin, field = coin_from_args(args), field_from_args(args)
    bands = spectrum_bands(args.kind, coin, field, args.samples)
    payload = {
        "kind": args.kind,
        "field": field.label,
        "arcs": [list(arc) for arc in bands.arcs],
        "multiplicity": bands.multiplicity,
        "measure": bands.measure,
    }
    if not args.twists:
        emit(args, payload)
        return EXIT_OK

    cells = args.ring or 4 * field.den
    spec = WalkSpec.electric(args.kind, coin, field)
    outside = 0
    for twist in 2.0 * np.pi * np.arange(args.twists) / args.twists:
        for z in build_matrix(spec, RingWindow(cells, twist)).eigenvalues():
            outside += not bands.contains(z, SPECTRUM_TOL)
    payload.update({"ring": cells, "twists": args.twists, "outside": outside})
    emit(args, payload)
    return verdict("spectrum", float(outside), 0.0)


def register(subparsers):
    dispersion = subparsers.add_parser("dispersion", help="theta table of omega and group velocity")
    add_walk_arguments(dispersion)
    dispersion.add_argument("--samples", type=int, default=256, help="theta samples")
    add_output_arguments(dispersion, "csv")
    dispersion.set_defaults(handler=run_dispersion)

    velocity = subparsers.add_parser("velocity", help="maximal velocity, closed form and numeric")
    add_walk_arguments(velocity)
    velocity.add_argument("--chain", action="store_true", help="compare v(W_Phi) with v(U_{Phi/2})")
    add_output_arguments(velocity)
    velocity.set_defaults(handler=run_velocity)

    revival = subparsers.add_parser("revival", help="revival defect, closed form and numeric")
    add_walk_arguments(revival)
    add_output_arguments(revival)
    revival.set_defaults(handler=run_revival)

    spectrum = subparsers.add_parser("spectrum", help="spectral bands as arcs")
    add_walk_arguments(spectrum)
    spectrum.add_argument("--samples", type=int, default=256, help="theta samples for the band edges")
    spectrum.add_argument("--twists", type=int, default=0, help="check twisted-ring eigenvalues")
    spectrum.add_argument("--ring", type=int, default=None, help="ring cells, 4m by default")
    add_output_arguments(spectrum)
    spectrum.set_defaults(handler=run_spectrum)
