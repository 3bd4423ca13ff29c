"""Event-level simulation of the two-sided self-exciting price model.

The simulator produces exact samples of the coupled (upward, downward)
counting processes by Ogata thinning, with the dominating rate re-tightened
after every rejection (component kernels are non-increasing, so the total
intensity only decays between events).  Deterministic replay of a recorded
stream then yields every derived observable: the tick price, the
horizon-rescaled price and intensity paths, the exact compensator and its
martingale remainder, and the pair of normalized jump martingales that play
the role of price and volatility Brownian drivers in the scaling limits.

All randomness flows through pre-drawn uniform blocks consumed strictly in
sequence, so results are independent of block size and identical between
the compiled and pure-Python cores.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _cores
from .grids import PathGrid
from .kernels import (
    EXPONENTIAL_MIXTURE,
    SHIFTED_POWER_LAW,
    KernelFunction,
    KernelMatrixSpec,
    ScalingRegime,
)
from .rng import as_generator

__all__ = [
    "DEFAULT_MAX_EVENTS",
    "UNIFORM_BLOCK",
    "RESCALE_GRID_POINTS",
    "EventStream",
    "HeavyPrice",
    "HeavyIntensity",
    "EmbeddedBrownians",
    "CompensatorSplit",
    "PowerLawApproximation",
    "simulate",
    "microscopic_price",
    "rescale_light",
    "rescale_heavy",
    "rescaled_intensity",
    "embedded_brownians",
    "compensator_martingale",
    "approximate_power_law",
]

#: refuse to simulate when the expected event count exceeds this
DEFAULT_MAX_EVENTS = 20_000_000

#: uniforms drawn per block; results do not depend on this value
UNIFORM_BLOCK = 1 << 20

#: sample count of the uniform [0, 1] grids carrying rescaled paths
RESCALE_GRID_POINTS = 1000


@dataclass(frozen=True)
class EventStream:
    """A realized event history of the two-sided model.

    Attributes
    ----------
    times : strictly increasing event times in (0, horizon].
    marks : +1 for an upward event, -1 for a downward event.
    intensity_up, intensity_down : the two intensity components immediately
        before each event (the predictable values used by the thinning
        acceptance step).
    horizon : end of the observation window; the stream is exhaustive on
        [0, horizon].
    """

    times: np.ndarray
    marks: np.ndarray
    intensity_up: np.ndarray
    intensity_down: np.ndarray
    horizon: float

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        marks = np.asarray(self.marks, dtype=np.int64)
        lam_p = np.asarray(self.intensity_up, dtype=float)
        lam_m = np.asarray(self.intensity_down, dtype=float)
        horizon = float(self.horizon)
        if times.ndim != 1:
            raise ValueError("event times must be one-dimensional")
        n = times.size
        if marks.shape != (n,) or lam_p.shape != (n,) or lam_m.shape != (n,):
            raise ValueError("marks and intensities must match the event count")
        if horizon <= 0.0:
            raise ValueError("horizon must be positive")
        if n:
            if times[0] <= 0.0 or np.any(np.diff(times) <= 0.0):
                raise ValueError("event times must be strictly increasing and > 0")
            if times[-1] > horizon:
                raise ValueError("events beyond the horizon")
            if not np.all((marks == 1) | (marks == -1)):
                raise ValueError("marks must be +1 or -1")
            if np.any(lam_p <= 0.0) or np.any(lam_m <= 0.0):
                raise ValueError("recorded intensities must be positive")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "marks", marks)
        object.__setattr__(self, "intensity_up", lam_p)
        object.__setattr__(self, "intensity_down", lam_m)
        object.__setattr__(self, "horizon", horizon)

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    @property
    def count_up(self) -> int:
        return int(np.count_nonzero(self.marks == 1))

    @property
    def count_down(self) -> int:
        return int(np.count_nonzero(self.marks == -1))

    def to_csv(self, path) -> None:
        """Write ``time,mark,intensity_up,intensity_down`` rows.

        The horizon rides along in a leading comment so the stream
        round-trips even when the last event falls short of it.
        """
        table = np.column_stack(
            [self.times, self.marks.astype(float), self.intensity_up, self.intensity_down]
        )
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# horizon={self.horizon!r}\n")
            fh.write("time,mark,intensity_up,intensity_down\n")
            np.savetxt(fh, table, delimiter=",", fmt=["%.17g", "%d", "%.17g", "%.17g"])

    @classmethod
    def from_csv(cls, path) -> "EventStream":
        with open(path, "r", encoding="utf-8") as fh:
            first = fh.readline().strip()
            horizon = None
            if first.startswith("#"):
                horizon = float(first.split("=", 1)[1])
                fh.readline()  # header row
            body = fh.read()
        if body.strip():
            table = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2)
        else:
            table = np.empty((0, 4))
        if horizon is None:
            horizon = float(table[-1, 0]) if table.shape[0] else 1.0
        return cls(
            table[:, 0],
            np.rint(table[:, 1]).astype(np.int64),
            table[:, 2],
            table[:, 3],
            horizon,
        )


class HeavyPrice(NamedTuple):
    """Heavy-regime rescaled price and its exact running time integral."""

    price: PathGrid
    integrated_price: PathGrid


class HeavyIntensity(NamedTuple):
    """Heavy-regime rescaled counts, compensator, and martingale triple."""

    counts: PathGrid
    compensator: PathGrid
    martingale: PathGrid


class EmbeddedBrownians(NamedTuple):
    """Normalized jump martingales driving the price and the volatility."""

    price_brownian: PathGrid
    volatility_brownian: PathGrid


class CompensatorSplit(NamedTuple):
    """Counting processes minus their compensator, sampled at event times."""

    compensator: PathGrid
    martingale: PathGrid


class PowerLawApproximation(NamedTuple):
    """Sum-of-exponentials surrogate for a power-law kernel matrix."""

    spec: KernelMatrixSpec
    rates: tuple
    sup_error: float
    relative_sup_error: float
    l1_error: float


def _shared_family(spec: KernelMatrixSpec) -> str:
    families = {spec.self_kernel.family, spec.cross_kernel.family}
    if len(families) != 1:
        raise ValueError("simulation requires both kernels from a single family")
    family = families.pop()
    if family == SHIFTED_POWER_LAW:
        a1 = spec.self_kernel.tail_exponent
        a2 = spec.cross_kernel.tail_exponent
        if abs(a1 - a2) > 1e-12:
            raise ValueError("power-law kernels must share one tail exponent")
    return family


def _exp_arrays(spec: KernelMatrixSpec):
    c1 = np.asarray(spec.self_kernel.coefficients, dtype=float)
    g1 = np.asarray(spec.self_kernel.rates, dtype=float)
    c2 = np.asarray(spec.cross_kernel.coefficients, dtype=float)
    g2 = np.asarray(spec.cross_kernel.rates, dtype=float)
    return c1, g1, c2, g2


def simulate(
    spec: KernelMatrixSpec,
    regime: ScalingRegime,
    horizon: float,
    seed,
    *,
    max_events: int = DEFAULT_MAX_EVENTS,
    initial_buffer: int | None = None,
) -> EventStream:
    """Draw one event history at the given horizon.

    The baseline and kernel scale come from the regime evaluated at the
    horizon.  A crude expected-count estimate ``2 * baseline * horizon /
    (1 - scale)`` is checked against ``max_events`` before any allocation;
    ``initial_buffer`` overrides the starting output capacity (the buffers
    grow geometrically up to ``max_events`` either way).
    """
    horizon = float(horizon)
    if horizon < 1.0:
        raise ValueError("horizon must be >= 1")
    scale = regime.kernel_scale(horizon)
    mu = regime.baseline(horizon)
    expected = 2.0 * mu * horizon / (1.0 - scale)
    if expected > max_events:
        raise ValueError(
            f"expected event count ~{expected:.4g} at horizon {horizon:g} "
            f"exceeds the budget max_events={max_events}; raise the budget "
            "or shorten the horizon"
        )
    family = _shared_family(spec)
    beta = spec.asymmetry
    rng = as_generator(seed)
    if initial_buffer is None:
        cap = min(max_events, max(4096, int(0.5 * expected) + 1024))
    else:
        cap = min(max_events, max(2, int(initial_buffer)))
    out_times = np.empty(cap)
    out_marks = np.empty(cap, dtype=np.int64)
    out_lam_p = np.empty(cap)
    out_lam_m = np.empty(cap)
    if family == EXPONENTIAL_MIXTURE:
        c1, g1, c2, g2 = _exp_arrays(spec)
        s1p = np.zeros(c1.size)
        s1m = np.zeros(c1.size)
        s2p = np.zeros(c2.size)
        s2m = np.zeros(c2.size)
    else:
        w1 = spec.self_kernel.weight
        w2 = spec.cross_kernel.weight
        alpha = spec.self_kernel.tail_exponent
    t = 0.0
    dominating = 2.0 * mu
    n = 0
    leftovers = np.empty(0)
    need_input = True
    while True:
        if need_input:
            block = rng.random(UNIFORM_BLOCK)
            uniforms = np.concatenate([leftovers, block]) if leftovers.size else block
        else:
            uniforms = leftovers
        if family == EXPONENTIAL_MIXTURE:
            u_used, n, t, dominating, status = _cores.exp_thinning_core(
                uniforms, t, horizon, mu, scale, beta, c1, g1, c2, g2,
                s1p, s1m, s2p, s2m, dominating,
                out_times, out_marks, out_lam_p, out_lam_m, n,
            )
        else:
            u_used, n, t, dominating, status = _cores.power_thinning_core(
                uniforms, t, horizon, mu, scale, beta, w1, w2, alpha, dominating,
                out_times, out_marks, out_lam_p, out_lam_m, n,
            )
        leftovers = uniforms[u_used:]
        if status == _cores.DONE:
            break
        if status == _cores.NEED_UNIFORMS:
            need_input = True
            continue
        # buffers full: grow and resume without touching the uniform stream
        if cap >= max_events:
            raise RuntimeError(
                f"event budget max_events={max_events} exhausted at "
                f"t={t:.6g} with {n} events recorded"
            )
        new_cap = min(max_events, 2 * cap)
        grown_times = np.empty(new_cap)
        grown_times[:n] = out_times[:n]
        out_times = grown_times
        grown_marks = np.empty(new_cap, dtype=np.int64)
        grown_marks[:n] = out_marks[:n]
        out_marks = grown_marks
        grown_lam_p = np.empty(new_cap)
        grown_lam_p[:n] = out_lam_p[:n]
        out_lam_p = grown_lam_p
        grown_lam_m = np.empty(new_cap)
        grown_lam_m[:n] = out_lam_m[:n]
        out_lam_m = grown_lam_m
        cap = new_cap
        need_input = False
    return EventStream(
        out_times[:n].copy(),
        out_marks[:n].copy(),
        out_lam_p[:n].copy(),
        out_lam_m[:n].copy(),
        horizon,
    )


def _replay(stream: EventStream, spec, regime, query, need_drift):
    query = np.asarray(query, dtype=float)
    if query.size:
        if query.ndim != 1 or query[0] < 0.0 or np.any(np.diff(query) < 0.0):
            raise ValueError("query times must be sorted and nonnegative")
        if query[-1] > stream.horizon * (1.0 + 1e-12):
            raise ValueError("query times must not exceed the horizon")
    scale = regime.kernel_scale(stream.horizon)
    mu = regime.baseline(stream.horizon)
    family = _shared_family(spec)
    if family == EXPONENTIAL_MIXTURE:
        c1, g1, c2, g2 = _exp_arrays(spec)
        return _cores.exp_replay_core(
            stream.times, stream.marks, query, mu, scale, spec.asymmetry,
            c1, g1, c2, g2, stream.horizon, need_drift,
        )
    return _cores.power_replay_core(
        stream.times, stream.marks, query, mu, scale, spec.asymmetry,
        spec.self_kernel.weight, spec.cross_kernel.weight,
        spec.self_kernel.tail_exponent, stream.horizon, need_drift,
    )


def microscopic_price(stream: EventStream) -> PathGrid:
    """Tick price (upward minus downward count) sampled at event times."""
    if stream.n_events == 0:
        return PathGrid(np.array([0.0]), np.array([0.0]))
    return PathGrid(stream.times, np.cumsum(stream.marks).astype(float))


def _with_origin(times: np.ndarray, values: np.ndarray):
    """Prepend a zero sample at t=0 unless one is already there."""
    if times.size and times[0] == 0.0:
        return times, values
    zero = np.zeros((1,) + values.shape[1:])
    return np.concatenate([[0.0], times]), np.concatenate([zero, values], axis=0)


def _macro_grid() -> np.ndarray:
    return np.linspace(0.0, 1.0, RESCALE_GRID_POINTS)


def rescale_light(stream: EventStream) -> PathGrid:
    """Diffusively rescaled price on a uniform grid over [0, 1].

    The price at fraction t of the horizon is divided by the horizon
    itself: near criticality the event count grows like the horizon
    squared, so the associated martingale scale is the horizon.
    """
    grid = _macro_grid()
    price = microscopic_price(stream)
    times, values = _with_origin(price.times, price.values)
    sampler = PathGrid(times, values)
    rescaled = sampler.value_at(grid * stream.horizon) / stream.horizon
    return PathGrid(grid, rescaled)


def _heavy_count_factor(regime: ScalingRegime, horizon: float) -> float:
    if regime.kind != "heavy":
        raise ValueError("heavy rescaling requires a heavy regime")
    scale = regime.kernel_scale(horizon)
    return (1.0 - scale) / (horizon**regime.tail_exponent * regime.base_rate)


def rescale_heavy(stream: EventStream, regime: ScalingRegime) -> HeavyPrice:
    """Heavy-regime rescaled price and its exact running integral on [0, 1].

    The price is scaled by ``sqrt((1 - scale) / (base_rate * T**a))``; the
    integral uses the piecewise-constant structure of the tick price, so it
    is exact rather than a quadrature of grid samples.
    """
    factor = math.sqrt(_heavy_count_factor(regime, stream.horizon))
    grid = _macro_grid()
    horizon = stream.horizon
    q = grid * horizon
    if stream.n_events == 0:
        zeros = np.zeros(grid.size)
        return HeavyPrice(PathGrid(grid, zeros), PathGrid(grid, zeros.copy()))
    ev_t = stream.times
    price = np.cumsum(stream.marks).astype(float)
    idx = np.searchsorted(ev_t, q, side="right") - 1
    clipped = np.maximum(idx, 0)
    price_q = np.where(idx >= 0, price[clipped], 0.0)
    cum_int = np.concatenate([[0.0], np.cumsum(price[:-1] * np.diff(ev_t))])
    integral_q = np.where(
        idx >= 0, cum_int[clipped] + price[clipped] * (q - ev_t[clipped]), 0.0
    )
    return HeavyPrice(
        PathGrid(grid, factor * price_q),
        PathGrid(grid, factor * integral_q / horizon),
    )


def _counts_at(stream: EventStream, q: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(stream.times, q, side="right")
    cum_up = np.concatenate([[0], np.cumsum(stream.marks == 1)])
    cum_down = np.concatenate([[0], np.cumsum(stream.marks == -1)])
    return np.column_stack([cum_up[idx], cum_down[idx]]).astype(float)


def rescaled_intensity(
    stream: EventStream, spec: KernelMatrixSpec, regime: ScalingRegime
):
    """Horizon-rescaled intensity observables on a uniform [0, 1] grid.

    Light regime: the two-component intensity at fraction t of the horizon
    divided by the horizon (a PathGrid).  Heavy regime: the rescaled count
    vector, its rescaled compensator, and the associated martingale, as a
    :class:`HeavyIntensity` triple.
    """
    grid = _macro_grid()
    q = grid * stream.horizon
    lam_q, comp_q, _, _ = _replay(stream, spec, regime, q, False)
    if regime.kind == "light":
        return PathGrid(grid, lam_q / stream.horizon)
    count_factor = _heavy_count_factor(regime, stream.horizon)
    counts = _counts_at(stream, q)
    martingale = math.sqrt(count_factor) * (counts - comp_q)
    return HeavyIntensity(
        PathGrid(grid, count_factor * counts),
        PathGrid(grid, count_factor * comp_q),
        PathGrid(grid, martingale),
    )


def embedded_brownians(
    stream: EventStream, spec: KernelMatrixSpec, regime: ScalingRegime
) -> EmbeddedBrownians:
    """The two normalized jump martingales on macroscopic time [0, 1].

    Each event contributes a jump scaled by the pre-event intensities
    (recorded in the stream); between events the deterministic compensator
    drift is integrated by fixed-order Gauss-Legendre quadrature on each
    inter-event interval.  Their covariation encodes the price-volatility
    correlation of the scaling limit.
    """
    horizon = stream.horizon
    _, _, _, drift = _replay(stream, spec, regime, np.empty(0), True)
    beta = spec.asymmetry
    lam_p = stream.intensity_up
    lam_m = stream.intensity_down
    root_h = math.sqrt(horizon)
    up = stream.marks == 1
    jump_w = np.where(up, 1.0, -1.0) / np.sqrt(horizon * (lam_p + lam_m))
    jump_b = np.where(up, 1.0, beta) / np.sqrt(
        horizon * (lam_p + beta * beta * lam_m)
    )
    w_steps = jump_w - drift[:-1, 0] / root_h
    b_steps = jump_b - drift[:-1, 1] / root_h
    w_path = np.concatenate([[0.0], np.cumsum(w_steps)])
    b_path = np.concatenate([[0.0], np.cumsum(b_steps)])
    w_full = np.concatenate([w_path, [w_path[-1] - drift[-1, 0] / root_h]])
    b_full = np.concatenate([b_path, [b_path[-1] - drift[-1, 1] / root_h]])
    times = np.concatenate([[0.0], stream.times / horizon, [1.0]])
    return EmbeddedBrownians(PathGrid(times, w_full), PathGrid(times, b_full))


def compensator_martingale(
    stream: EventStream, spec: KernelMatrixSpec, regime: ScalingRegime
) -> CompensatorSplit:
    """Exact compensator of the count vector and the martingale remainder,
    both sampled at the event times (with a leading t=0 sample)."""
    _, _, comp_ev, _ = _replay(stream, spec, regime, np.empty(0), False)
    times = np.concatenate([[0.0], stream.times])
    comp = np.vstack([[0.0, 0.0], comp_ev])
    counts = np.column_stack(
        [np.cumsum(stream.marks == 1), np.cumsum(stream.marks == -1)]
    ).astype(float)
    counts = np.vstack([[0.0, 0.0], counts])
    return CompensatorSplit(PathGrid(times, comp), PathGrid(times, counts - comp))


def approximate_power_law(
    spec: KernelMatrixSpec,
    *,
    n_terms: int = 16,
    x_max: float = 1e4,
) -> PowerLawApproximation:
    """Fit a nonnegative sum of exponentials to a power-law kernel matrix.

    Both component kernels share one tail exponent, so a single unit-mass
    shape is fitted once (nonnegative least squares on a log-spaced rate
    ladder, relative weighting on a geometric collocation grid) and scaled
    by each kernel's weight.  Nonnegative mixture coefficients keep the
    surrogate valid for thinning.  Reported errors cover [0, x_max] plus
    analytic bounds on both tails beyond it.
    """
    from scipy.optimize import nnls

    family = _shared_family(spec)
    if family != SHIFTED_POWER_LAW:
        raise ValueError("only power-law kernel matrices can be approximated")
    alpha = spec.self_kernel.tail_exponent
    rates = np.geomspace(0.3 / x_max, 30.0, n_terms)
    x_fit = np.concatenate([[0.0], np.geomspace(1e-3, x_max, 600)])
    shape = alpha * (1.0 + x_fit) ** (-1.0 - alpha)
    design = np.exp(-np.outer(x_fit, rates)) / shape[:, None]
    # normalize columns: the relative weighting spans ~6 decades, which
    # otherwise stalls the active-set iteration
    norms = np.linalg.norm(design, axis=0)
    coeff, _ = nnls(design / norms, np.ones(x_fit.size))
    coeff = coeff / norms
    x_dense = np.concatenate([[0.0], np.geomspace(1e-4, x_max, 4000)])
    shape_dense = alpha * (1.0 + x_dense) ** (-1.0 - alpha)
    fit_dense = np.exp(-np.outer(x_dense, rates)) @ coeff
    err = fit_dense - shape_dense
    sup_error = float(np.max(np.abs(err)))
    relative_sup_error = float(np.max(np.abs(err) / shape_dense))
    tail_true = (1.0 + x_max) ** (-alpha)
    tail_fit = float(np.sum(coeff / rates * np.exp(-rates * x_max)))
    l1_error = float(
        np.trapezoid(np.abs(err), x_dense) + tail_true + tail_fit
    )
    keep = coeff > 0.0
    terms = list(zip(coeff[keep], rates[keep]))

    def scaled(weight: float) -> KernelFunction:
        return KernelFunction.exponential_mixture(
            [(weight * c, r) for c, r in terms]
        )

    approx = KernelMatrixSpec(
        scaled(spec.self_kernel.weight),
        scaled(spec.cross_kernel.weight),
        spec.asymmetry,
    )
    return PowerLawApproximation(
        approx,
        tuple(rates[keep]),
        sup_error,
        relative_sup_error,
        l1_error,
    )
