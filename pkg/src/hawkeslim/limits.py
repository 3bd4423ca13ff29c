"""Macroscopic limit models and their simulators.

Near criticality the rescaled event-count price converges to a stochastic
volatility diffusion.  With short-memory kernels the variance is a square-root
mean-reverting diffusion and the price a correlated martingale (the classical
leverage-effect model); with heavy-tailed kernels the variance solves a
rough Volterra square-root equation instead, producing paths far more
irregular than semimartingales.

This module provides:

* frozen parameter containers for both limit families, with JSON round trips;
* exact algebraic maps from a microscopic :class:`~hawkeslim.KernelMatrixSpec`
  plus scaling regime to the limit parameters;
* Euler simulators: full-truncation square-root diffusion, the correlated
  price/variance pair, and a two-form Volterra scheme for the rough variance
  with product-integration kernel weights;
* batched terminal samplers used by distribution-level comparisons.

All simulators operate on uniform grids and return :class:`~hawkeslim.PathGrid`
objects (exportable to CSV like every other path in the package).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import rng as _rng
from .grids import PathGrid
from .kernels import KernelMatrixSpec, ScalingRegime, SpectralData
from .specfun import MittagLefflerParams, ml_cdf

__all__ = [
    "HestonParams",
    "RoughHestonParams",
    "RoughCirParams",
    "HestonPaths",
    "RoughHestonPaths",
    "heston_params_from_micro",
    "rough_params_from_micro",
    "generic_rough_cir_params",
    "simulate_cir",
    "simulate_heston",
    "simulate_rough_cir",
    "simulate_rough_heston",
    "heston_terminal_sample",
    "rough_heston_batch",
]

#: Largest admissible Euler step for the square-root diffusion schemes.
MAX_CIR_STEP = 1.0e-2

#: Default number of grid steps for the rough simulators.
DEFAULT_ROUGH_STEPS = 1 << 12

_ROUGH_FORMS = ("fractional", "mittag-leffler")


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------


def _require_positive(value: float, name: str) -> None:
    if not (value > 0.0) or not math.isfinite(value):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class HestonParams:
    """Parameters of the square-root stochastic volatility limit.

    The variance follows ``dX = mean_reversion * (long_run_variance - X) dt
    + vol_of_vol * sqrt(X) dB`` started from ``initial_variance``, and the
    price is ``price_scale`` times the stochastic integral of ``sqrt(X)``
    against a Brownian motion with instantaneous correlation ``correlation``
    to ``B``.

    Attributes
    ----------
    mean_reversion, long_run_variance, vol_of_vol : float
        Positive diffusion coefficients.
    correlation : float
        Price/variance driver correlation, in (-1, 1).  Maps from an
        asymmetric microscopic model always land in (-1, 0].
    price_scale : float
        Positive multiplier applied to the price integral.
    initial_variance : float
        Starting variance (default 0, matching the microscopic origin).
    """

    mean_reversion: float
    long_run_variance: float
    vol_of_vol: float
    correlation: float
    price_scale: float
    initial_variance: float = 0.0

    def __post_init__(self) -> None:
        _require_positive(self.mean_reversion, "mean_reversion")
        _require_positive(self.long_run_variance, "long_run_variance")
        _require_positive(self.vol_of_vol, "vol_of_vol")
        _require_positive(self.price_scale, "price_scale")
        if not (-1.0 < self.correlation < 1.0):
            raise ValueError("correlation must lie in (-1, 1)")
        if self.initial_variance < 0.0:
            raise ValueError("initial_variance must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "mean_reversion": self.mean_reversion,
            "long_run_variance": self.long_run_variance,
            "vol_of_vol": self.vol_of_vol,
            "correlation": self.correlation,
            "price_scale": self.price_scale,
            "initial_variance": self.initial_variance,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "HestonParams":
        return cls(**{key: float(payload[key]) for key in (
            "mean_reversion", "long_run_variance", "vol_of_vol",
            "correlation", "price_scale", "initial_variance")})


@dataclass(frozen=True)
class RoughHestonParams:
    """Parameters of the rough stochastic volatility limit.

    The variance solves a Volterra square-root equation whose memory kernel
    decays like ``t**(roughness - 1)``, so paths have Hurst-type regularity
    ``roughness - 1/2`` (close to zero for roughness near one half).  The
    price is again ``price_scale`` times the integral of ``sqrt(variance)``
    against a correlated Brownian motion.

    ``asymmetry`` records the up/down weighting of the originating
    microscopic model; the simulator uses it to build the exactly correlated
    driver pair, and ``correlation`` is the resulting bracket slope
    ``(1 - asymmetry) / sqrt(2 * (1 + asymmetry**2))``.
    """

    roughness: float
    mean_reversion: float
    long_run_variance: float
    vol_of_vol: float
    correlation: float
    price_scale: float
    asymmetry: float
    initial_variance: float = 0.0

    def __post_init__(self) -> None:
        if not (0.5 < self.roughness < 1.0):
            raise ValueError("roughness must lie in (1/2, 1)")
        _require_positive(self.mean_reversion, "mean_reversion")
        _require_positive(self.long_run_variance, "long_run_variance")
        _require_positive(self.vol_of_vol, "vol_of_vol")
        _require_positive(self.price_scale, "price_scale")
        if not (-1.0 < self.correlation < 1.0):
            raise ValueError("correlation must lie in (-1, 1)")
        if self.asymmetry < 1.0:
            raise ValueError("asymmetry must be >= 1")
        if self.initial_variance < 0.0:
            raise ValueError("initial_variance must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "roughness": self.roughness,
            "mean_reversion": self.mean_reversion,
            "long_run_variance": self.long_run_variance,
            "vol_of_vol": self.vol_of_vol,
            "correlation": self.correlation,
            "price_scale": self.price_scale,
            "asymmetry": self.asymmetry,
            "initial_variance": self.initial_variance,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RoughHestonParams":
        return cls(**{key: float(payload[key]) for key in (
            "roughness", "mean_reversion", "long_run_variance", "vol_of_vol",
            "correlation", "price_scale", "asymmetry", "initial_variance")})


@dataclass(frozen=True)
class RoughCirParams:
    """Standalone rough square-root process, decoupled from any price.

    In the integrated ("mittag-leffler") form the process is
    ``V_t = level * F(t) + noise_scale * int f(t - s) sqrt(V_s) dB_s``
    where ``f``/``F`` are the heavy-tailed relaxation density and its
    distribution function for exponent ``roughness`` and rate ``rate``.
    The equivalent "fractional" form moves the memory kernel
    ``t**(roughness-1)`` outside: drift ``rate * (level - V)`` and noise
    coefficient ``rate * noise_scale`` under the fractional integral.
    """

    roughness: float
    rate: float
    level: float
    noise_scale: float

    def __post_init__(self) -> None:
        if not (0.5 < self.roughness < 1.0):
            raise ValueError("roughness must lie in (1/2, 1)")
        _require_positive(self.rate, "rate")
        _require_positive(self.level, "level")
        if self.noise_scale < 0.0 or not math.isfinite(self.noise_scale):
            raise ValueError("noise_scale must be nonnegative and finite")

    def to_dict(self) -> dict:
        return {
            "roughness": self.roughness,
            "rate": self.rate,
            "level": self.level,
            "noise_scale": self.noise_scale,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RoughCirParams":
        return cls(**{key: float(payload[key]) for key in (
            "roughness", "rate", "level", "noise_scale")})


class HestonPaths(NamedTuple):
    """Price and variance paths of the square-root volatility limit."""

    price: PathGrid
    variance: PathGrid


class RoughHestonPaths(NamedTuple):
    """Price and variance paths of the rough volatility limit."""

    price: PathGrid
    variance: PathGrid


# ---------------------------------------------------------------------------
# parameter maps from the microscopic model
# ---------------------------------------------------------------------------


def _correlation_from_asymmetry(beta: float) -> float:
    return (1.0 - beta) / math.sqrt(2.0 * (1.0 + beta * beta))


def _price_scale_from_spec(spec: KernelMatrixSpec) -> float:
    beta = spec.asymmetry
    secondary_mass = spec.self_kernel.weight - spec.cross_kernel.weight
    residual = 1.0 - secondary_mass
    if residual <= 1.0e-12:
        raise ValueError(
            "secondary kernel direction is itself critical; the price has "
            "no diffusive limit"
        )
    return math.sqrt(2.0 / (1.0 + beta)) / residual


def heston_params_from_micro(
    spec: KernelMatrixSpec,
    regime: ScalingRegime,
    spectral: SpectralData,
) -> HestonParams:
    """Map a short-memory microscopic model to its diffusion limit.

    Requires a light scaling regime and a principal kernel with a finite
    positive first moment ``m``; the variance then mean-reverts at speed
    ``gap / m`` toward ``(asymmetry + 1) * base_rate / gap`` with volatility
    ``sqrt((1 + asymmetry**2) / (1 + asymmetry)) / m``, while the price
    driver correlation depends on the asymmetry alone.
    """
    if regime.kind != "light":
        raise ValueError("diffusion limit requires a light scaling regime")
    m = spectral.first_moment
    if m is None or not math.isfinite(m) or m <= 0.0:
        raise ValueError(
            "principal kernel first moment must be finite and positive"
        )
    beta = spec.asymmetry
    gap = regime.gap
    mu = regime.base_rate
    return HestonParams(
        mean_reversion=gap / m,
        long_run_variance=(beta + 1.0) * mu / gap,
        vol_of_vol=math.sqrt((1.0 + beta * beta) / (1.0 + beta)) / m,
        correlation=_correlation_from_asymmetry(beta),
        price_scale=_price_scale_from_spec(spec),
        initial_variance=0.0,
    )


def rough_params_from_micro(
    spec: KernelMatrixSpec,
    regime: ScalingRegime,
    spectral: SpectralData,
) -> RoughHestonParams:
    """Map a heavy-tailed microscopic model to its rough volatility limit.

    Requires a heavy scaling regime; the roughness equals the common kernel
    tail exponent, and the effective mean-reversion rate is
    ``exponent * gap / (tail_constant * Gamma(1 - exponent))``.
    """
    if regime.kind != "heavy":
        raise ValueError("rough limit requires a heavy scaling regime")
    alpha = spectral.tail_exponent
    if alpha is None:
        raise ValueError("rough limit requires kernels with a power-law tail")
    tail_c = spectral.tail_constant
    if tail_c is None or tail_c <= 0.0:
        raise ValueError("tail constant must be positive")
    beta = spec.asymmetry
    lam_star = regime.gap
    mu = regime.base_rate
    lam_eff = alpha * lam_star / (tail_c * math.gamma(1.0 - alpha))
    return RoughHestonParams(
        roughness=alpha,
        mean_reversion=lam_eff,
        long_run_variance=1.0 + beta,
        vol_of_vol=lam_eff * math.sqrt(
            (1.0 + beta * beta) / (lam_star * mu * (1.0 + beta))
        ),
        correlation=_correlation_from_asymmetry(beta),
        price_scale=_price_scale_from_spec(spec),
        asymmetry=beta,
        initial_variance=0.0,
    )


def generic_rough_cir_params(params: RoughHestonParams) -> RoughCirParams:
    """Standalone-variance view of a rough volatility parameter set.

    Dividing the vol-of-vol by the mean-reversion rate converts the price
    model's noise coefficient into the noise scale of the generic rough
    square-root equation; both simulator forms then accept the result.
    """
    return RoughCirParams(
        roughness=params.roughness,
        rate=params.mean_reversion,
        level=params.long_run_variance,
        noise_scale=params.vol_of_vol / params.mean_reversion,
    )


# ---------------------------------------------------------------------------
# square-root diffusion simulators
# ---------------------------------------------------------------------------


def _check_grid(step: float, horizon: float) -> int:
    _require_positive(step, "step")
    _require_positive(horizon, "horizon")
    if step > MAX_CIR_STEP * (1.0 + 1.0e-12):
        raise ValueError(
            f"step {step} exceeds the maximum {MAX_CIR_STEP}; the truncated "
            "Euler scheme is only trustworthy on fine grids"
        )
    n = int(round(horizon / step))
    if n < 1 or abs(n * step - horizon) > 1.0e-9 * max(1.0, horizon):
        raise ValueError("horizon must be an integer multiple of step")
    return n


def _cir_batch(
    params: HestonParams, step: float, n_steps: int, increments: np.ndarray
) -> np.ndarray:
    """Full-truncation Euler for the square-root diffusion.

    ``increments`` has shape (n_paths, n_steps).  Returns the raw (unclamped)
    state array of shape (n_paths, n_steps + 1); negative excursions in the
    raw state only ever enter drift and diffusion through their positive part.
    """
    kappa = params.mean_reversion
    theta = params.long_run_variance
    xi = params.vol_of_vol
    n_paths = increments.shape[0]
    x = np.empty((n_paths, n_steps + 1))
    x[:, 0] = params.initial_variance
    for k in range(n_steps):
        xp = np.maximum(x[:, k], 0.0)
        x[:, k + 1] = (
            x[:, k] + kappa * (theta - xp) * step
            + xi * np.sqrt(xp) * increments[:, k]
        )
    return x


def simulate_cir(
    params: HestonParams,
    step: float,
    horizon: float,
    seed=None,
    *,
    noise: np.ndarray | None = None,
) -> PathGrid:
    """Simulate one square-root diffusion path on a uniform grid.

    Uses the full-truncation Euler scheme: both the drift ``kappa * (theta -
    x)`` and the diffusion ``xi * sqrt(x)`` evaluate the state through its
    positive part, and the returned path is clamped at zero.  ``noise`` may
    supply the Brownian increments directly (shape ``(n_steps,)``) for
    shared-noise comparisons; otherwise they are drawn from ``seed``.
    """
    n = _check_grid(step, horizon)
    if noise is None:
        gen = _rng.as_generator(seed)
        noise = gen.standard_normal(n) * math.sqrt(step)
    else:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (n,):
            raise ValueError(f"noise must have shape ({n},), got {noise.shape}")
    x = _cir_batch(params, step, n, noise[np.newaxis, :])[0]
    times = step * np.arange(n + 1)
    return PathGrid(times=times, values=np.maximum(x, 0.0))


def simulate_heston(
    params: HestonParams,
    step: float,
    horizon: float,
    seed=None,
) -> HestonPaths:
    """Simulate one correlated price/variance pair on a uniform grid.

    The variance path is a full-truncation square-root diffusion driven by a
    Brownian motion ``B``; the price driver is ``correlation * B +
    sqrt(1 - correlation**2) * B_perp`` with an independent ``B_perp``, and
    the price accumulates ``price_scale * sqrt(variance)`` increments against
    it, starting from zero.
    """
    n = _check_grid(step, horizon)
    gen = _rng.as_generator(seed)
    root_h = math.sqrt(step)
    db = gen.standard_normal(n) * root_h
    db_perp = gen.standard_normal(n) * root_h
    rho = params.correlation
    dw = rho * db + math.sqrt(1.0 - rho * rho) * db_perp
    x = _cir_batch(params, step, n, db[np.newaxis, :])[0]
    vol = np.sqrt(np.maximum(x[:-1], 0.0))
    price = np.concatenate(
        ([0.0], params.price_scale * np.cumsum(vol * dw))
    )
    times = step * np.arange(n + 1)
    return HestonPaths(
        price=PathGrid(times=times, values=price),
        variance=PathGrid(times=times, values=np.maximum(x, 0.0)),
    )


def heston_terminal_sample(
    params: HestonParams,
    n_paths: int,
    step: float,
    horizon: float,
    seed=None,
) -> np.ndarray:
    """Terminal prices of many independent price/variance pairs.

    Batched version of :func:`simulate_heston` retaining only the final
    price of each path; used for distribution-level comparisons against
    rescaled microscopic prices.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    n = _check_grid(step, horizon)
    gen = _rng.as_generator(seed)
    root_h = math.sqrt(step)
    rho = params.correlation
    rho_perp = math.sqrt(1.0 - rho * rho)
    kappa = params.mean_reversion
    theta = params.long_run_variance
    xi = params.vol_of_vol
    x = np.full(n_paths, float(params.initial_variance))
    price = np.zeros(n_paths)
    for _ in range(n):
        db = gen.standard_normal(n_paths) * root_h
        db_perp = gen.standard_normal(n_paths) * root_h
        xp = np.maximum(x, 0.0)
        vol = np.sqrt(xp)
        price += params.price_scale * vol * (rho * db + rho_perp * db_perp)
        x = x + kappa * (theta - xp) * step + xi * vol * db
    return price


# ---------------------------------------------------------------------------
# rough square-root simulators
# ---------------------------------------------------------------------------


def _fractional_weights(roughness: float, step: float, n: int) -> np.ndarray:
    """Product-integration weights for the kernel ``t**(roughness-1)/Gamma``.

    Weight ``m`` integrates the kernel exactly over the ``m``-th grid cell
    behind the evaluation point, so a piecewise-constant integrand incurs no
    additional kernel-singularity error (a naive left-point rule would).
    """
    m = np.arange(1, n + 1, dtype=float)
    alpha = roughness
    return step**alpha * (m**alpha - (m - 1.0) ** alpha) / (
        alpha * math.gamma(alpha)
    )


def _relaxation_weights(
    roughness: float, rate: float, step: float, n: int
) -> tuple[np.ndarray, np.ndarray]:
    """Exact drift values and noise weights for the integrated form.

    Returns the relaxation distribution function on the grid (the
    deterministic part of the integrated-form equation is exact) and the
    cell averages of its density used as stochastic-convolution weights.
    """
    ml = MittagLefflerParams(roughness, rate=rate)
    cdf = ml_cdf(ml, step * np.arange(n + 1))
    return cdf, np.diff(cdf) / step


def _rough_cir_batch(
    params: RoughCirParams,
    n_steps: int,
    horizon: float,
    increments: np.ndarray,
    form: str,
) -> np.ndarray:
    """Volterra Euler recursion shared by both equation forms.

    ``increments`` has shape (n_paths, n_steps).  Returns the raw state
    array (n_paths, n_steps + 1); coefficients always evaluate the state
    through its positive part.  Both forms read the increments in the same
    order, so shared-noise comparisons are exact.
    """
    h = horizon / n_steps
    n_paths = increments.shape[0]
    v = np.zeros((n_paths, n_steps + 1))
    # History rows are filled step by step; column j holds everything the
    # convolution needs about interval j.
    history = np.empty((n_paths, n_steps))
    if form == "mittag-leffler":
        cdf, noise_w = _relaxation_weights(
            params.roughness, params.rate, h, n_steps
        )
        drift = params.level * cdf
        for k in range(n_steps):
            vp = np.maximum(v[:, k], 0.0)
            history[:, k] = params.noise_scale * np.sqrt(vp) * increments[:, k]
            v[:, k + 1] = drift[k + 1] + history[:, : k + 1] @ noise_w[k::-1]
    elif form == "fractional":
        weights = _fractional_weights(params.roughness, h, n_steps)
        noise_coeff = params.rate * params.noise_scale / h
        for k in range(n_steps):
            vp = np.maximum(v[:, k], 0.0)
            history[:, k] = (
                params.rate * (params.level - vp)
                + noise_coeff * np.sqrt(vp) * increments[:, k]
            )
            v[:, k + 1] = history[:, : k + 1] @ weights[k::-1]
    else:
        raise ValueError(f"form must be one of {_ROUGH_FORMS}, got {form!r}")
    return v


def _rough_noise(
    n_steps: int,
    horizon: float,
    seed,
    noise: np.ndarray | None,
) -> np.ndarray:
    if noise is not None:
        noise = np.asarray(noise, dtype=float)
        if noise.shape != (n_steps,):
            raise ValueError(
                f"noise must have shape ({n_steps},), got {noise.shape}"
            )
        return noise
    gen = _rng.as_generator(seed)
    return gen.standard_normal(n_steps) * math.sqrt(horizon / n_steps)


def simulate_rough_cir(
    params: RoughCirParams,
    n_steps: int = DEFAULT_ROUGH_STEPS,
    horizon: float = 1.0,
    seed=None,
    *,
    form: str = "mittag-leffler",
    noise: np.ndarray | None = None,
) -> PathGrid:
    """Simulate one rough square-root path on a uniform grid.

    Two mathematically equivalent formulations are available.  The
    ``"mittag-leffler"`` form convolves the noise with the heavy-tailed
    relaxation density and carries the deterministic part exactly; the
    ``"fractional"`` form applies product-integration weights for the bare
    power kernel to drift and noise alike.  Both consume the Brownian
    increments in the same order, so running them on shared ``noise``
    isolates pure discretization differences.

    ``noise`` may supply the increments directly (shape ``(n_steps,)``);
    otherwise they are drawn from ``seed`` with variance ``horizon/n_steps``
    per step.  Output values are clamped at zero.
    """
    if form not in _ROUGH_FORMS:
        raise ValueError(f"form must be one of {_ROUGH_FORMS}, got {form!r}")
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    _require_positive(horizon, "horizon")
    increments = _rough_noise(n_steps, horizon, seed, noise)
    v = _rough_cir_batch(
        params, n_steps, horizon, increments[np.newaxis, :], form
    )[0]
    times = (horizon / n_steps) * np.arange(n_steps + 1)
    return PathGrid(times=times, values=np.maximum(v, 0.0))


def _rough_pair_increments(
    beta: float, db1: np.ndarray, db2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Combine independent Brownian increments into the correlated pair.

    The variance driver weights the two sources ``(1, beta)`` and the price
    driver ``(1, -1)`` (both normalized), which makes the quadratic
    covariation slope exactly ``(1 - beta) / sqrt(2 * (1 + beta**2))`` --
    jointly Gaussian drivers need no further correlation adjustment.
    """
    d_b = (db1 + beta * db2) / math.sqrt(1.0 + beta * beta)
    d_w = (db1 - db2) / math.sqrt(2.0)
    return d_w, d_b


def simulate_rough_heston(
    params: RoughHestonParams,
    n_steps: int = DEFAULT_ROUGH_STEPS,
    horizon: float = 1.0,
    seed=None,
    *,
    form: str = "mittag-leffler",
) -> RoughHestonPaths:
    """Simulate one rough price/variance pair on a uniform grid.

    Two independent Brownian motions are combined with weights ``(1,
    asymmetry)`` (variance driver) and ``(1, -1)`` (price driver), giving
    the drivers a quadratic covariation slope of exactly
    ``(1 - asymmetry) / sqrt(2 * (1 + asymmetry**2))``; the stored
    ``correlation`` field is that same value for maps built from a
    microscopic model.  The variance follows the rough square-root equation
    (see :func:`simulate_rough_cir`) and the price accumulates
    ``price_scale * sqrt(variance)`` increments against the price driver.
    """
    prices, variances = rough_heston_batch(
        params, 1, n_steps, horizon, seed, form=form
    )
    times = (horizon / n_steps) * np.arange(n_steps + 1)
    return RoughHestonPaths(
        price=PathGrid(times=times, values=prices[0]),
        variance=PathGrid(times=times, values=variances[0]),
    )


def rough_heston_batch(
    params: RoughHestonParams,
    n_paths: int,
    n_steps: int = DEFAULT_ROUGH_STEPS,
    horizon: float = 1.0,
    seed=None,
    *,
    form: str = "mittag-leffler",
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate many independent rough price/variance pairs at once.

    Returns ``(prices, variances)`` of shape ``(n_paths, n_steps + 1)``;
    rows are mutually independent paths on the shared uniform grid.  The
    per-path construction matches :func:`simulate_rough_heston` exactly.
    """
    if form not in _ROUGH_FORMS:
        raise ValueError(f"form must be one of {_ROUGH_FORMS}, got {form!r}")
    if n_paths < 1:
        raise ValueError("n_paths must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be positive")
    _require_positive(horizon, "horizon")
    gen = _rng.as_generator(seed)
    root_h = math.sqrt(horizon / n_steps)
    db1 = gen.standard_normal((n_paths, n_steps)) * root_h
    db2 = gen.standard_normal((n_paths, n_steps)) * root_h
    d_w, d_b = _rough_pair_increments(params.asymmetry, db1, db2)
    generic = generic_rough_cir_params(params)
    v = _rough_cir_batch(generic, n_steps, horizon, d_b, form)
    vol = np.sqrt(np.maximum(v[:, :-1], 0.0))
    prices = np.concatenate(
        (
            np.zeros((n_paths, 1)),
            params.price_scale * np.cumsum(vol * d_w, axis=1),
        ),
        axis=1,
    )
    return prices, np.maximum(v, 0.0)
