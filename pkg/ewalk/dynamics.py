"""
Time evolution experiments: position moments, revival traces, ballistic
velocity estimates and continued-fraction field studies.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from ewalk.config import settings
from ewalk.errors import EwalkError, NotNormalized
from ewalk.floquet import revival_power, revival_sign, velocity_exponent
from ewalk.lattice import position_moments, step
from ewalk.models import Field, RationalField, SU2Coin, WalkSpec, WaveFunction

logger = logging.getLogger(__name__)

NORM_TOL = 1e-12
CSV_COLUMNS = ("label", "t", "mean", "sigma", "revival_error")


@dataclass(frozen=True)
class TrajectoryPoint:
    t: int
    mean: float
    sigma: float
    revival_error: Optional[float] = None


@dataclass
class Trajectory:
    """Moments of psi_t for t = 0 .. T."""

    label: str
    points: List[TrajectoryPoint] = field(default_factory=list)

    @property
    def sigmas(self) -> List[float]:
        return [p.sigma for p in self.points]

    def revival_errors(self) -> List[Tuple[int, float]]:
        return [(p.t, p.revival_error) for p in self.points if p.revival_error is not None]

    def rows(self) -> List[dict]:
        return [
            {
                "label": self.label,
                "t": p.t,
                "mean": p.mean,
                "sigma": p.sigma,
                "revival_error": p.revival_error,
            }
            for p in self.points
        ]


def _check_normalized(state: WaveFunction):
    if abs(state.norm() - 1.0) > NORM_TOL:
        raise NotNormalized(f"initial state has norm {state.norm():.15g}")


def evolve_trace(
    spec: WalkSpec,
    initial: WaveFunction,
    steps: int,
    revival_period: Optional[int] = None,
    revival_phase: complex = 1.0,
    label: Optional[str] = None,
) -> Trajectory:
    """
    Evolve and record position moments at every step.

    Args:
        spec: Walk to iterate
        initial: Normalized, finitely supported initial state
        steps: Number of steps T >= 1
        revival_period: When given, record ||psi_t - phase^(t/p) psi_0|| at multiples of p
        revival_phase: Per-period phase
        label: Trajectory label, spec.label by default

    Returns:
        The trajectory for t = 0 .. T

    Raises:
        EwalkError: If steps < 1
        NotNormalized: If the initial state is not normalized
    """
    if steps < 1:
        raise EwalkError(f"steps must be >= 1, got {steps}")
    _check_normalized(initial)
    trajectory = Trajectory(label or spec.label)
    state = initial
    for t in range(steps + 1):
        if t:
            state = step(state, spec)
        mean, _, sigma = position_moments(state)
        error = None
        if revival_period and t % revival_period == 0:
            error = state.distance(initial.scaled(revival_phase ** (t // revival_period)))
        trajectory.points.append(TrajectoryPoint(t, mean, sigma, error))
    logger.debug(f"evolved {trajectory.label} for {steps} steps, final sigma {trajectory.points[-1].sigma:.6g}")
    return trajectory


def velocity_estimate(spec: WalkSpec, initial: WaveFunction, steps: int) -> List[Tuple[int, float]]:
    """(t, ||Q psi_t|| / t) for t = 1 .. T."""
    if steps < 1:
        raise EwalkError(f"steps must be >= 1, got {steps}")
    _check_normalized(initial)
    state = initial
    values = []
    for t in range(1, steps + 1):
        state = step(state, spec)
        _, second, _ = position_moments(state)
        values.append((t, math.sqrt(second) / t))
    return values


def velocity_summary(kind: str, coin: SU2Coin, rational: RationalField, initial: WaveFunction, steps: int) -> dict:
    """Finite-time estimate next to the asymptotic |a|^e; the gap is reported, not bounded."""
    values = velocity_estimate(WalkSpec.electric(kind, coin, rational), initial, steps)
    closed = coin.abs_a ** velocity_exponent(kind, rational)
    final = values[-1][1]
    return {
        "kind": kind,
        "field": rational.label,
        "steps": steps,
        "final_estimate": final,
        "closed_form": closed,
        "gap": final - closed,
        "note": "finite-time estimate, not a limit",
    }


@dataclass(frozen=True)
class ContinuedFraction:
    """p/q = [a0; a1, a2, ...] with its convergents."""

    quotients: Tuple[int, ...]
    convergents: Tuple[Fraction, ...]

    @property
    def value(self) -> Fraction:
        return self.convergents[-1]

    @property
    def label(self) -> str:
        head, tail = self.quotients[0], self.quotients[1:]
        if not tail:
            return f"[{head}]"
        return f"[{head};{','.join(str(a) for a in tail)}]"

    def as_dict(self) -> dict:
        return {
            "value": f"{self.value.numerator}/{self.value.denominator}",
            "quotients": list(self.quotients),
            "label": self.label,
            "convergents": [f"{c.numerator}/{c.denominator}" for c in self.convergents],
        }


def continued_fraction(p: int, q: int) -> ContinuedFraction:
    """
    Euclidean expansion of p/q.

    Raises:
        EwalkError: If q < 1
    """
    if q < 1:
        raise EwalkError(f"denominator must be >= 1, got {q}")
    x = Fraction(p, q)
    quotients = []
    while True:
        a = math.floor(x)
        quotients.append(a)
        x -= a
        if x == 0:
            break
        x = 1 / x
    h_prev, h = 1, quotients[0]
    k_prev, k = 0, 1
    convergents = [Fraction(h, k)]
    for a in quotients[1:]:
        h_prev, h = h, a * h + h_prev
        k_prev, k = k, a * k + k_prev
        convergents.append(Fraction(h, k))
    return ContinuedFraction(tuple(quotients), tuple(convergents))


def figure1_initial_state() -> WaveFunction:
    """delta_0 (x) (1, i) / sqrt 2."""
    s = 1.0 / math.sqrt(2.0)
    return WaveFunction.localized(0, (s, 1j * s))


def _revival_trace(
    kind: str, coin: SU2Coin, rational: RationalField, initial: WaveFunction, steps: int, variant: Optional[str] = None
) -> Trajectory:
    spec = WalkSpec.electric(kind, coin, rational)
    period = revival_power(kind, rational) if rational.num else None
    if variant is not None and variant != spec.fields[0].variant:
        # revival periods only hold for the natural variant of each kind
        spec = WalkSpec(spec.layers[:-1] + (Field(rational.with_variant(variant)),), spec.label)
        period = None
    phase = -revival_sign(kind, rational)
    return evolve_trace(spec, initial, steps, period, phase, label=f"{kind}[{rational.label}]")


def figure1_dataset(
    coin: SU2Coin,
    fields: Sequence[RationalField],
    initial: Optional[WaveFunction] = None,
    steps: int = 100,
    kinds: Sequence[str] = ("U", "W"),
    variant: Optional[str] = None,
) -> List[dict]:
    """
    Rows (label, t, mean, sigma, revival_error) for every kind and field.

    Trajectories run on a thread pool of settings.threads workers; rows keep
    the order of kinds, then fields.
    """
    initial = initial or figure1_initial_state()
    jobs = [(kind, rational) for kind in kinds for rational in fields]
    logger.info(f"evolving {len(jobs)} trajectories for {steps} steps on {settings.threads} threads")
    with ThreadPoolExecutor(max_workers=settings.threads) as pool:
        traces = list(pool.map(lambda job: _revival_trace(job[0], coin, job[1], initial, steps, variant), jobs))
    rows = []
    for trace in traces:
        rows.extend(trace.rows())
    return rows


def convergent_study(p: int, q: int, coin: SU2Coin, steps: int = 100, kind: str = "W") -> List[dict]:
    """Traces for every convergent of p/q, each read as a field Phi / 2 pi."""
    expansion = continued_fraction(p, q)
    fields = [RationalField(c.numerator, c.denominator) for c in expansion.convergents]
    logger.info(f"convergents of {p}/{q}: {expansion.label}")
    return figure1_dataset(coin, fields, steps=steps, kinds=(kind,))
