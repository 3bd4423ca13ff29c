"""End-to-end experiment orchestration for scaling-limit studies.

This module turns a single JSON configuration into reproducible Monte
Carlo runs: seeded simulation of the event-stream model across a ladder of
horizons, simulation of the matched limit models, estimator sweeps, and a
verification report whose every number can be recomputed from the emitted
data files with library functions alone.

Reproducibility contract
------------------------
Each (horizon index, path index) pair owns the seed key ``[master_seed,
horizon_index, path_index]``; limit-model runs use horizon index equal to
the ladder length and beyond.  Results are therefore identical for any
worker count, and reruns of the same configuration produce byte-identical
data files (manifests differ only in wall-clock fields).

Output layout (per run directory)::

    outdir/
      manifest.json     run provenance: config hash, seeds, files, timings
      params.json       limit-map parameters (limit / verify commands)
      paths/*.csv       data files referenced by the manifest
      report.json       verification rows (verify command)
      report.txt        the same rows as an aligned text table
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .engine import (
    embedded_brownians,
    rescale_heavy,
    rescale_light,
    rescaled_intensity,
    simulate,
)
from .estimators import (
    EstimateWithCI,
    estimate_record,
    hurst_moment_scaling,
    ks_distance,
    leverage_correlation,
    quadratic_covariation,
    realized_variance,
)
from .grids import PathGrid
from .kernels import (
    KernelFunction,
    KernelMatrixSpec,
    ScalingRegime,
    build_kernel_matrix,
    eigen_structure,
    exponential_resolvent,
    resolvent_matrix,
    wiener_hopf_residual,
)
from .limits import (
    heston_params_from_micro,
    heston_terminal_sample,
    rough_heston_batch,
    rough_params_from_micro,
    simulate_heston,
)
from .specfun import (
    MittagLefflerParams,
    fractional_integral,
    ml_cdf,
    ml_density,
    ml_laplace_residuals,
    mittag_leffler,
)

__all__ = [
    "ConfigError",
    "EstimatorSettings",
    "ExperimentConfig",
    "LimitSettings",
    "ModelConfig",
    "RunManifest",
    "Tolerances",
    "run_estimate",
    "run_limit",
    "run_ml_eval",
    "run_simulate",
    "run_verify",
]

#: Scale used by the deterministic resolvent identity rows; close enough to
#: criticality to exercise the slow decay, far enough to keep the closed
#: form well conditioned.
IDENTITY_RESOLVENT_SCALE = 0.9

#: Default Mittag-Leffler index for the identity rows when the configured
#: regime carries no tail exponent of its own.
IDENTITY_DEFAULT_ALPHA = 0.6


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


def _require(mapping: dict, key: str, where: str = "") -> object:
    if key not in mapping:
        name = f"{where}.{key}" if where else key
        raise ConfigError(f"missing config field '{name}'")
    return mapping[key]


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class ModelConfig:
    """Kernel-matrix description: shape family, weights, and asymmetry."""

    kernel: str
    principal_weight: float
    secondary_weight: float
    asymmetry: float
    decay: float = 1.0

    def __post_init__(self) -> None:
        if self.kernel not in ("exponential", "power-law"):
            raise ConfigError(
                f"model.kernel must be 'exponential' or 'power-law', got {self.kernel!r}"
            )
        if self.kernel == "exponential" and self.decay <= 0.0:
            raise ConfigError("model.decay must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "ModelConfig":
        return cls(
            kernel=str(_require(raw, "kernel", "model")),
            principal_weight=float(_require(raw, "principal_weight", "model")),
            secondary_weight=float(_require(raw, "secondary_weight", "model")),
            asymmetry=float(_require(raw, "asymmetry", "model")),
            decay=float(raw.get("decay", 1.0)),
        )

    def to_dict(self) -> dict:
        return {
            "kernel": self.kernel,
            "principal_weight": self.principal_weight,
            "secondary_weight": self.secondary_weight,
            "asymmetry": self.asymmetry,
            "decay": self.decay,
        }


@dataclass(frozen=True)
class LimitSettings:
    """Limit-model simulation sizes used by the limit and verify commands."""

    n_paths: int = 200
    step: float = 1e-3
    n_steps: int = 2048
    horizon: float = 1.0
    terminal_samples: int = 10_000

    def __post_init__(self) -> None:
        if self.n_paths < 1 or self.n_steps < 1 or self.terminal_samples < 1:
            raise ConfigError("limit sizes must be positive")
        if self.step <= 0.0 or self.horizon <= 0.0:
            raise ConfigError("limit.step and limit.horizon must be positive")

    @classmethod
    def from_dict(cls, raw: dict) -> "LimitSettings":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown limit settings: {sorted(unknown)}")
        return cls(**{k: v for k, v in raw.items()})

    def to_dict(self) -> dict:
        return {
            "n_paths": self.n_paths,
            "step": self.step,
            "n_steps": self.n_steps,
            "horizon": self.horizon,
            "terminal_samples": self.terminal_samples,
        }


@dataclass(frozen=True)
class EstimatorSettings:
    """Estimator knobs threaded through verify and estimate commands."""

    leverage_window: float | None = None
    hurst_burn_in: float = 0.5

    @classmethod
    def from_dict(cls, raw: dict) -> "EstimatorSettings":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown estimator settings: {sorted(unknown)}")
        return cls(**{k: v for k, v in raw.items()})

    def to_dict(self) -> dict:
        return {
            "leverage_window": self.leverage_window,
            "hurst_burn_in": self.hurst_burn_in,
        }


@dataclass(frozen=True)
class Tolerances:
    """Pass/fail thresholds for verification rows.

    ``bracket``, ``hurst_halfwidth``, and ``ks_statistic`` govern the
    statistical rows (``ks_statistic = None`` means "no rejection at the
    1% level" instead of an explicit bound); the remaining fields govern
    the deterministic identity rows.
    """

    bracket: float = 0.05
    hurst_halfwidth: float = 0.05
    ks_statistic: float | None = None
    ml_laplace: float = 1e-6
    fractional: float = 1e-4
    resolvent: float = 1e-6
    wiener_hopf: float = 1e-8

    @classmethod
    def from_dict(cls, raw: dict) -> "Tolerances":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown tolerance settings: {sorted(unknown)}")
        return cls(**{k: v for k, v in raw.items()})

    def to_dict(self) -> dict:
        return {
            "bracket": self.bracket,
            "hurst_halfwidth": self.hurst_halfwidth,
            "ks_statistic": self.ks_statistic,
            "ml_laplace": self.ml_laplace,
            "fractional": self.fractional,
            "resolvent": self.resolvent,
            "wiener_hopf": self.wiener_hopf,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """One JSON document describing a full experiment.

    Invariants: the horizon ladder is strictly increasing, every per-horizon
    path count is at least one, and ``from_dict(to_dict())`` is the
    identity (lossless serialization).
    """

    model: ModelConfig
    regime: ScalingRegime
    horizons: tuple[float, ...]
    paths: tuple[int, ...]
    master_seed: int
    outdir: str
    limit: LimitSettings = field(default_factory=LimitSettings)
    estimators: EstimatorSettings = field(default_factory=EstimatorSettings)
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self) -> None:
        if not self.horizons:
            raise ConfigError("horizons must be a nonempty list")
        if any(b <= a for a, b in zip(self.horizons, self.horizons[1:])):
            raise ConfigError("horizons must be strictly increasing")
        if len(self.paths) != len(self.horizons):
            raise ConfigError("paths must give one count per horizon")
        if any(p < 1 for p in self.paths):
            raise ConfigError("path counts must be >= 1")
        if self.model.kernel == "power-law" and self.regime.kind != "heavy":
            raise ConfigError("power-law kernels require the heavy regime")
        if self.model.kernel == "exponential" and self.regime.kind != "light":
            raise ConfigError("exponential kernels require the light regime")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        model = ModelConfig.from_dict(dict(_require(raw, "model")))
        regime_raw = dict(_require(raw, "regime"))
        kind = str(_require(regime_raw, "kind", "regime"))
        gap = float(_require(regime_raw, "gap", "regime"))
        base_rate = float(_require(regime_raw, "base_rate", "regime"))
        try:
            if kind == "heavy":
                tail = float(_require(regime_raw, "tail_exponent", "regime"))
                regime = ScalingRegime.heavy(tail, gap=gap, base_rate=base_rate)
            else:
                if "tail_exponent" in regime_raw:
                    raise ConfigError(
                        "regime.tail_exponent applies to the heavy regime only"
                    )
                regime = ScalingRegime(kind, gap, base_rate)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        horizons = tuple(float(t) for t in _require(raw, "horizons"))
        paths_raw = _require(raw, "paths")
        if isinstance(paths_raw, (int, float)):
            paths = (int(paths_raw),) * len(horizons)
        else:
            paths = tuple(int(p) for p in paths_raw)
        return cls(
            model=model,
            regime=regime,
            horizons=horizons,
            paths=paths,
            master_seed=int(_require(raw, "master_seed")),
            outdir=str(_require(raw, "outdir")),
            limit=LimitSettings.from_dict(dict(raw.get("limit", {}))),
            estimators=EstimatorSettings.from_dict(dict(raw.get("estimators", {}))),
            tolerances=Tolerances.from_dict(dict(raw.get("tolerances", {}))),
        )

    def to_dict(self) -> dict:
        regime = {
            "kind": self.regime.kind,
            "gap": self.regime.gap,
            "base_rate": self.regime.base_rate,
        }
        if self.regime.kind == "heavy":
            regime["tail_exponent"] = self.regime.tail_exponent
        return {
            "model": self.model.to_dict(),
            "regime": regime,
            "horizons": list(self.horizons),
            "paths": list(self.paths),
            "master_seed": self.master_seed,
            "outdir": self.outdir,
            "limit": self.limit.to_dict(),
            "estimators": self.estimators.to_dict(),
            "tolerances": self.tolerances.to_dict(),
        }

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config document must be a JSON object")
        return cls.from_dict(raw)

    def config_hash(self) -> str:
        """Digest identifying the experiment content.

        The output directory is excluded: the same experiment written to a
        different location is still the same experiment.
        """
        doc = self.to_dict()
        doc.pop("outdir")
        canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def build_spec(self) -> KernelMatrixSpec:
        m = self.model
        if m.kernel == "exponential":
            principal = KernelFunction.exponential(m.principal_weight, m.decay)
            secondary = KernelFunction.exponential(m.secondary_weight, m.decay)
        else:
            alpha = self.regime.tail_exponent
            principal = KernelFunction.power_law(m.principal_weight, alpha)
            secondary = KernelFunction.power_law(m.secondary_weight, alpha)
        try:
            return build_kernel_matrix(principal, secondary, m.asymmetry)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def bracket_target(self) -> float:
        beta = self.model.asymmetry
        return (1.0 - beta) / math.sqrt(2.0 * (1.0 + beta * beta))


def path_seed_key(master_seed: int, horizon_index: int, path_index: int) -> list[int]:
    """Seed-sequence key owned by one (horizon, path) pair."""
    return [int(master_seed), int(horizon_index), int(path_index)]


# ---------------------------------------------------------------------------
# manifest


@dataclass
class RunManifest:
    """Provenance record for one run directory.

    Every data file a command emits (everything except the manifest itself)
    is listed in ``files``; wall-clock fields are the only entries allowed
    to differ between reruns of the same configuration.
    """

    command: str
    config_hash: str
    version: str
    created_utc: str
    wall_clock_seconds: float
    seeds: dict
    files: list
    summaries: dict

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_hash": self.config_hash,
            "version": self.version,
            "created_utc": self.created_utc,
            "wall_clock_seconds": self.wall_clock_seconds,
            "seeds": self.seeds,
            "files": list(self.files),
            "summaries": self.summaries,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "RunManifest":
        return cls(
            command=raw["command"],
            config_hash=raw["config_hash"],
            version=raw["version"],
            created_utc=raw["created_utc"],
            wall_clock_seconds=raw["wall_clock_seconds"],
            seeds=raw["seeds"],
            files=list(raw["files"]),
            summaries=raw["summaries"],
        )

    def save(self, outdir) -> Path:
        target = Path(outdir) / "manifest.json"
        with open(target, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return target

    @classmethod
    def load(cls, outdir) -> "RunManifest":
        with open(Path(outdir) / "manifest.json", "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _prepare_outdir(config: ExperimentConfig) -> Path:
    outdir = Path(config.outdir)
    (outdir / "paths").mkdir(parents=True, exist_ok=True)
    return outdir


def _horizon_tag(horizon: float) -> str:
    return f"{horizon:g}"


# ---------------------------------------------------------------------------
# worker pool


def _run_jobs(worker, payloads, workers: int):
    """Order-preserving map with an optional process pool.

    Work is stolen from a shared queue by up to ``workers`` processes; the
    result order is fixed by the payload order, so the output is identical
    for every worker count.
    """
    if workers <= 1:
        return [worker(p) for p in payloads]
    results = [None] * len(payloads)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(worker, p): i for i, p in enumerate(payloads)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return results


def _simulate_payloads(config: ExperimentConfig, write_streams: bool):
    raw = config.to_dict()
    return [
        {
            "config": raw,
            "horizon_index": t_idx,
            "path_index": p_idx,
            "write_stream": write_streams,
        }
        for t_idx in range(len(config.horizons))
        for p_idx in range(config.paths[t_idx])
    ]


def _micro_worker(payload: dict) -> dict:
    """Simulate one (horizon, path) pair and reduce it to summary scalars.

    Runs inside pool workers: everything needed is rebuilt from the plain
    config dictionary, and nothing mutable is shared.
    """
    config = ExperimentConfig.from_dict(payload["config"])
    t_idx = payload["horizon_index"]
    p_idx = payload["path_index"]
    horizon = config.horizons[t_idx]
    spec = config.build_spec()
    seed = path_seed_key(config.master_seed, t_idx, p_idx)
    try:
        stream = simulate(spec, config.regime, horizon, seed)
    except (ValueError, RuntimeError) as exc:
        if "budget" in str(exc) or "max_events" in str(exc):
            raise RuntimeError(
                f"budget guard tripped at horizon T={_horizon_tag(horizon)}: {exc}"
            ) from exc
        raise
    out = {
        "horizon_index": t_idx,
        "path_index": p_idx,
        "seed": seed,
        "n_events": int(stream.n_events),
    }
    if payload["write_stream"]:
        name = f"paths/micro_T{_horizon_tag(horizon)}_p{p_idx:04d}.csv"
        stream.to_csv(str(Path(config.outdir) / name))
        out["file"] = name
        price = rescale_light(stream) if config.regime.kind == "light" else None
        if price is not None:
            out["terminal_rescaled"] = float(price.values[-1])
        else:
            out["terminal_rescaled"] = float(
                rescale_heavy(stream, config.regime).price.values[-1]
            )
    else:
        emb = embedded_brownians(stream, spec, config.regime)
        out["bracket"] = quadratic_covariation(
            emb.volatility_brownian, emb.price_brownian
        )
        observable = rescaled_intensity(stream, spec, config.regime)
        if config.regime.kind == "light":
            track = observable.values
            out["terminal_rescaled"] = float(rescale_light(stream).values[-1])
        else:
            track = observable.counts.values
            out["terminal_rescaled"] = float(
                rescale_heavy(stream, config.regime).price.values[-1]
            )
        out["secondary_sup"] = float(np.max(np.abs(track[:, 0] - track[:, 1])))
        price = rescale_light(stream)
        try:
            lev = leverage_correlation(price, config.estimators.leverage_window)
            out["leverage"] = lev.point
        except ValueError:
            out["leverage"] = math.nan
    return out


def _group_by_horizon(config: ExperimentConfig, rows: list) -> dict:
    grouped = {t_idx: [] for t_idx in range(len(config.horizons))}
    for row in rows:
        grouped[row["horizon_index"]].append(row)
    for bucket in grouped.values():
        bucket.sort(key=lambda r: r["path_index"])
    return grouped


# ---------------------------------------------------------------------------
# simulate command


def run_simulate(config: ExperimentConfig, workers: int = 1) -> RunManifest:
    """Simulate the event-stream model over the horizon ladder.

    Emits one CSV per (horizon, path) pair under ``paths/`` plus the run
    manifest; reruns with the same configuration are byte-identical.
    """
    start = time.perf_counter()
    outdir = _prepare_outdir(config)
    rows = _run_jobs(_micro_worker, _simulate_payloads(config, True), workers)
    grouped = _group_by_horizon(config, rows)
    seeds, files, summaries = {}, [], {}
    for t_idx, bucket in grouped.items():
        tag = _horizon_tag(config.horizons[t_idx])
        seeds[tag] = [row["seed"] for row in bucket]
        files.extend(row["file"] for row in bucket)
        events = np.array([row["n_events"] for row in bucket])
        terminals = np.array([row["terminal_rescaled"] for row in bucket])
        summaries[tag] = {
            "n_paths": len(bucket),
            "mean_events": float(events.mean()),
            "min_events": int(events.min()),
            "max_events": int(events.max()),
            "mean_terminal_rescaled": float(terminals.mean()),
        }
    manifest = RunManifest(
        command="simulate",
        config_hash=config.config_hash(),
        version=__version__,
        created_utc=_utc_now(),
        wall_clock_seconds=time.perf_counter() - start,
        seeds=seeds,
        files=files,
        summaries=summaries,
    )
    manifest.save(outdir)
    return manifest


# ---------------------------------------------------------------------------
# limit command


def _limit_params(config: ExperimentConfig):
    spec = config.build_spec()
    spectral = eigen_structure(spec, config.regime)
    if config.regime.kind == "light":
        return heston_params_from_micro(spec, config.regime, spectral)
    return rough_params_from_micro(spec, config.regime, spectral)


def _limit_ensemble(config: ExperimentConfig, seed_branch: int):
    """Simulate the limit-model ensemble: (times, prices, variances)."""
    settings = config.limit
    params = _limit_params(config)
    if config.regime.kind == "light":
        n_steps = int(round(settings.horizon / settings.step))
        times = np.linspace(0.0, settings.horizon, n_steps + 1)
        prices = np.empty((settings.n_paths, n_steps + 1))
        variances = np.empty((settings.n_paths, n_steps + 1))
        for i in range(settings.n_paths):
            seed = path_seed_key(config.master_seed, seed_branch, i)
            paths = simulate_heston(params, settings.step, settings.horizon, seed)
            prices[i] = paths.price.values
            variances[i] = paths.variance.values
        return params, times, prices, variances
    times = np.linspace(0.0, settings.horizon, settings.n_steps + 1)
    prices, variances = rough_heston_batch(
        params,
        settings.n_paths,
        n_steps=settings.n_steps,
        horizon=settings.horizon,
        seed=path_seed_key(config.master_seed, seed_branch, 0),
    )
    return params, times, prices, variances


def _write_wide(outdir: Path, name: str, times: np.ndarray, rows: np.ndarray) -> str:
    """One CSV holding a whole ensemble: column j is path j."""
    PathGrid(times, rows.T).to_csv(str(outdir / name))
    return name


def run_limit(config: ExperimentConfig, workers: int = 1) -> RunManifest:
    """Simulate the macroscopic limit model matched to the configuration.

    Emits the mapped parameters (``params.json``), one wide CSV each for
    the price and variance ensembles, and the manifest.
    """
    del workers  # limit ensembles are cheap; kept for CLI symmetry
    start = time.perf_counter()
    outdir = _prepare_outdir(config)
    seed_branch = len(config.horizons)
    params, times, prices, variances = _limit_ensemble(config, seed_branch)
    params_payload = {
        "kind": "heston" if config.regime.kind == "light" else "rough-heston",
        "params": params.to_dict(),
        "config_hash": config.config_hash(),
    }
    with open(outdir / "params.json", "w", encoding="utf-8") as fh:
        json.dump(params_payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files = ["params.json"]
    files.append(_write_wide(outdir / "paths", "limit_price.csv", times, prices))
    files[-1] = f"paths/{files[-1]}"
    files.append(_write_wide(outdir / "paths", "limit_variance.csv", times, variances))
    files[-1] = f"paths/{files[-1]}"
    if config.regime.kind == "light":
        seeds = {
            "limit": [
                path_seed_key(config.master_seed, seed_branch, i)
                for i in range(config.limit.n_paths)
            ]
        }
    else:
        seeds = {"limit": [path_seed_key(config.master_seed, seed_branch, 0)]}
    manifest = RunManifest(
        command="limit",
        config_hash=config.config_hash(),
        version=__version__,
        created_utc=_utc_now(),
        wall_clock_seconds=time.perf_counter() - start,
        seeds=seeds,
        files=files,
        summaries={
            "mean_terminal_price": float(prices[:, -1].mean()),
            "mean_terminal_variance": float(variances[:, -1].mean()),
            "n_paths": config.limit.n_paths,
        },
    )
    manifest.save(outdir)
    return manifest


# ---------------------------------------------------------------------------
# verify command


def _identity_rows(config: ExperimentConfig) -> list:
    """Deterministic special-function and resolvent identity checks."""
    tol = config.tolerances
    alpha = (
        config.regime.tail_exponent
        if config.regime.kind == "heavy"
        else IDENTITY_DEFAULT_ALPHA
    )
    params = MittagLefflerParams(alpha)
    z_grid = np.round(np.arange(0.1, 10.0 + 1e-9, 0.1), 10)
    ml_value = float(np.max(ml_laplace_residuals(params, z_grid)))

    t = np.linspace(0.0, 1.0, 1001)
    density = np.zeros_like(t)
    density[1:] = ml_density(params, t[1:])
    integrated = fractional_integral(
        PathGrid(t, density),
        1.0 - alpha,
        singular_exponent=alpha - 1.0,
        substitution_power=alpha,
    )
    survival = np.array([mittag_leffler(alpha, 1.0, -ti**alpha) for ti in t[1:]])
    frac_value = float(np.max(np.abs(integrated.values[1:] - survival)))

    # Resolvent identities always run on exponential kernels (the closed
    # form exists there); a power-law configuration borrows its weights.
    weights = (config.model.principal_weight, config.model.secondary_weight)
    decay = config.model.decay if config.model.kernel == "exponential" else 1.0
    ref_spec = build_kernel_matrix(
        KernelFunction.exponential(weights[0], decay),
        KernelFunction.exponential(weights[1], decay),
        config.model.asymmetry,
    )
    h = 1e-3
    grid = np.arange(0.0, 5.0 + h / 2, h)
    psi = resolvent_matrix(ref_spec, IDENTITY_RESOLVENT_SCALE, grid)
    beta = config.model.asymmetry
    principal_weight = weights[0] + beta * weights[1]
    secondary_weight = weights[0] - weights[1]
    res_value = 0.0
    for direction, weight in (
        (np.array([1.0, beta]), principal_weight),
        (np.array([1.0, -1.0]), secondary_weight),
    ):
        action = np.einsum("i,tij->tj", direction, psi)
        closed = np.outer(
            exponential_resolvent(weight, decay, IDENTITY_RESOLVENT_SCALE, grid),
            direction,
        )
        res_value = max(res_value, float(np.max(np.abs(action - closed))))
    wh_value = float(wiener_hopf_residual(ref_spec, IDENTITY_RESOLVENT_SCALE, grid))

    def row(name, value, tolerance, details):
        return {
            "name": name,
            "kind": "identity",
            "value": value,
            "target": 0.0,
            "tolerance": tolerance,
            "passed": bool(value < tolerance),
            "details": details,
        }

    return [
        row(
            "ml-laplace-identity",
            ml_value,
            tol.ml_laplace,
            {"alpha": alpha, "z_grid": [0.1, 10.0, 0.1]},
        ),
        row(
            "fractional-identity",
            frac_value,
            tol.fractional,
            {"alpha": alpha, "grid_step": 1e-3},
        ),
        row(
            "resolvent-closed-form",
            res_value,
            tol.resolvent,
            {"scale": IDENTITY_RESOLVENT_SCALE, "kernel": "exponential reference"},
        ),
        row(
            "wiener-hopf-residual",
            wh_value,
            tol.wiener_hopf,
            {"scale": IDENTITY_RESOLVENT_SCALE, "kernel": "exponential reference"},
        ),
    ]


def _write_summary_tables(
    config: ExperimentConfig, outdir: Path, grouped: dict
) -> list:
    files = []
    header = "path,n_events,bracket,secondary_sup,terminal_rescaled,leverage"
    for t_idx, bucket in grouped.items():
        tag = _horizon_tag(config.horizons[t_idx])
        table = np.array(
            [
                [
                    row["path_index"],
                    row["n_events"],
                    row["bracket"],
                    row["secondary_sup"],
                    row["terminal_rescaled"],
                    row["leverage"],
                ]
                for row in bucket
            ]
        )
        name = f"paths/summary_T{tag}.csv"
        np.savetxt(
            outdir / name,
            table,
            delimiter=",",
            header=header,
            comments="",
            fmt="%.17g",
        )
        files.append(name)
    return files


def _statistical_rows(
    config: ExperimentConfig,
    grouped: dict,
    variance_ensemble: list,
    limit_terminal: np.ndarray,
) -> list:
    tol = config.tolerances
    last = len(config.horizons) - 1
    per_horizon_bracket = {
        _horizon_tag(config.horizons[t]): float(
            np.mean([r["bracket"] for r in bucket])
        )
        for t, bucket in grouped.items()
    }
    brackets = np.array([r["bracket"] for r in grouped[last]])
    bracket_mean = float(brackets.mean())
    target = config.bracket_target()
    rows = [
        {
            "name": "leverage-bracket",
            "kind": "statistical",
            "value": bracket_mean,
            "target": target,
            "tolerance": tol.bracket,
            "passed": bool(abs(bracket_mean - target) <= tol.bracket),
            "details": {
                "per_horizon_mean": per_horizon_bracket,
                "n_paths": int(brackets.size),
                "stderr": float(brackets.std(ddof=1) / math.sqrt(brackets.size))
                if brackets.size > 1
                else None,
            },
        }
    ]

    sups = [
        float(np.mean([r["secondary_sup"] for r in grouped[t]]))
        for t in range(len(config.horizons))
    ]
    decreasing = all(b < a for a, b in zip(sups, sups[1:]))
    rows.append(
        {
            "name": "secondary-direction-contraction",
            "kind": "property",
            "value": sups[-1],
            "target": "strictly decreasing across the horizon ladder",
            "tolerance": None,
            "passed": bool(decreasing) if len(sups) > 1 else True,
            "details": {
                "per_horizon_mean_sup": {
                    _horizon_tag(T): s for T, s in zip(config.horizons, sups)
                },
                "note": "single horizon: nothing to compare"
                if len(sups) == 1
                else None,
            },
        }
    )

    micro_terminal = np.array([r["terminal_rescaled"] for r in grouped[last]])
    ks = ks_distance(micro_terminal, limit_terminal)
    if tol.ks_statistic is None:
        ks_passed = not ks.reject_at_1pct
        ks_tolerance = "no rejection at 1%"
    else:
        ks_passed = ks.statistic <= tol.ks_statistic
        ks_tolerance = tol.ks_statistic
    rows.append(
        {
            "name": "marginal-law-ks",
            "kind": "statistical",
            "value": float(ks.statistic),
            "target": 0.0,
            "tolerance": ks_tolerance,
            "passed": bool(ks_passed),
            "details": {
                "reject_at_1pct": bool(ks.reject_at_1pct),
                "n_micro": int(micro_terminal.size),
                "n_limit": int(limit_terminal.size),
            },
        }
    )

    hurst = hurst_moment_scaling(
        variance_ensemble, burn_in=config.estimators.hurst_burn_in
    )
    hurst_target = (
        0.5
        if config.regime.kind == "light"
        else config.regime.tail_exponent - 0.5
    )
    rows.append(
        {
            "name": "variance-roughness",
            "kind": "statistical",
            "value": hurst.point,
            "target": hurst_target,
            "tolerance": tol.hurst_halfwidth,
            "passed": bool(abs(hurst.point - hurst_target) <= tol.hurst_halfwidth),
            "details": {
                "stderr": hurst.stderr,
                "n_paths": hurst.n,
                "band": [
                    hurst_target - tol.hurst_halfwidth,
                    hurst_target + tol.hurst_halfwidth,
                ],
            },
        }
    )
    return rows


def _format_report_text(report: dict) -> str:
    lines = [
        f"verification report  config={report['config_hash'][:12]}  "
        f"version={report['version']}",
        "",
        f"{'row':34s} {'value':>12s} {'target':>12s} {'tol':>12s} {'status':>7s}",
        "-" * 80,
    ]
    for row in report["rows"]:
        target = row["target"]
        target_text = (
            f"{target:12.5g}" if isinstance(target, (int, float)) else f"{'see row':>12s}"
        )
        tol = row["tolerance"]
        tol_text = f"{tol:12.5g}" if isinstance(tol, (int, float)) else f"{'--':>12s}"
        status = "PASS" if row["passed"] else "FAIL"
        lines.append(
            f"{row['name']:34s} {row['value']:12.5g} {target_text} {tol_text} "
            f"{status:>7s}"
        )
    lines.append("-" * 80)
    lines.append(f"overall: {'PASS' if report['passed'] else 'FAIL'}")
    lines.append("")
    return "\n".join(lines)


def run_verify(config: ExperimentConfig, workers: int = 1):
    """Run the full verification experiment and emit its report.

    Returns ``(manifest, report)``; ``report['passed']`` is True only when
    every row passes its configured tolerance.  Per-path statistics land in
    ``paths/summary_T*.csv``, the limit ensembles in wide CSVs, and every
    report number is recomputable from those files.
    """
    start = time.perf_counter()
    outdir = _prepare_outdir(config)
    rows = _run_jobs(_micro_worker, _simulate_payloads(config, False), workers)
    grouped = _group_by_horizon(config, rows)
    files = _write_summary_tables(config, outdir, grouped)

    seed_branch = len(config.horizons)
    params, times, prices, variances = _limit_ensemble(config, seed_branch)
    files.append("paths/" + _write_wide(outdir / "paths", "limit_variance.csv", times, variances))
    variance_ensemble = [PathGrid(times, variances[i]) for i in range(variances.shape[0])]

    if config.regime.kind == "light":
        limit_terminal = heston_terminal_sample(
            params,
            config.limit.terminal_samples,
            config.limit.step,
            config.limit.horizon,
            path_seed_key(config.master_seed, seed_branch + 1, 0),
        )
        terminal_seed = [path_seed_key(config.master_seed, seed_branch + 1, 0)]
    else:
        limit_terminal = prices[:, -1]
        terminal_seed = [path_seed_key(config.master_seed, seed_branch, 0)]
    name = "paths/limit_terminal.csv"
    np.savetxt(
        outdir / name,
        limit_terminal,
        delimiter=",",
        header="terminal",
        comments="",
        fmt="%.17g",
    )
    files.append(name)

    report_rows = _statistical_rows(config, grouped, variance_ensemble, limit_terminal)
    report_rows.extend(_identity_rows(config))
    report = {
        "config_hash": config.config_hash(),
        "version": __version__,
        "regime": config.regime.kind,
        "rows": report_rows,
        "passed": bool(all(row["passed"] for row in report_rows)),
    }
    with open(outdir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(outdir / "report.txt", "w", encoding="utf-8") as fh:
        fh.write(_format_report_text(report))
    files.extend(["report.json", "report.txt"])

    params_payload = {
        "kind": "heston" if config.regime.kind == "light" else "rough-heston",
        "params": params.to_dict(),
        "config_hash": config.config_hash(),
    }
    with open(outdir / "params.json", "w", encoding="utf-8") as fh:
        json.dump(params_payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append("params.json")

    seeds = {
        _horizon_tag(config.horizons[t]): [r["seed"] for r in bucket]
        for t, bucket in grouped.items()
    }
    if config.regime.kind == "light":
        seeds["limit"] = [
            path_seed_key(config.master_seed, seed_branch, i)
            for i in range(config.limit.n_paths)
        ]
    else:
        seeds["limit"] = [path_seed_key(config.master_seed, seed_branch, 0)]
    seeds["limit_terminal"] = terminal_seed
    manifest = RunManifest(
        command="verify",
        config_hash=config.config_hash(),
        version=__version__,
        created_utc=_utc_now(),
        wall_clock_seconds=time.perf_counter() - start,
        seeds=seeds,
        files=files,
        summaries={
            row["name"]: {"value": row["value"], "passed": row["passed"]}
            for row in report_rows
        },
    )
    manifest.save(outdir)
    return manifest, report


# ---------------------------------------------------------------------------
# ml-eval command


def run_ml_eval(
    alpha: float,
    rate: float = 1.0,
    t_max: float = 2.0,
    n_points: int = 201,
    outdir: str = "ml-eval",
) -> dict:
    """Tabulate the heavy-tail density/CDF pair and its identity residuals.

    Emits ``paths/ml_table.csv`` (columns ``t, density, cdf``), a residual
    summary in ``report.json``, and a manifest.  The returned dict mirrors
    ``report.json``; ``passed`` reflects the default identity tolerances.
    """
    start = time.perf_counter()
    params = MittagLefflerParams(alpha, rate=rate)
    out = Path(outdir)
    (out / "paths").mkdir(parents=True, exist_ok=True)
    t = np.linspace(0.0, t_max, n_points)
    density = np.zeros_like(t)
    density[1:] = ml_density(params, t[1:])
    cdf = ml_cdf(params, t)
    np.savetxt(
        out / "paths" / "ml_table.csv",
        np.column_stack([t, density, cdf]),
        delimiter=",",
        header="t,density,cdf",
        comments="",
        fmt="%.17g",
    )
    z_grid = np.round(np.arange(0.1, 10.0 + 1e-9, 0.1), 10)
    laplace = float(np.max(ml_laplace_residuals(params, z_grid)))
    tolerances = Tolerances()
    report = {
        "alpha": alpha,
        "rate": rate,
        "max_laplace_residual": laplace,
        "cdf_monotone": bool(np.all(np.diff(cdf) >= -1e-12)),
        "passed": bool(laplace < tolerances.ml_laplace),
    }
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = RunManifest(
        command="ml-eval",
        config_hash=hashlib.sha256(
            json.dumps(
                {"alpha": alpha, "rate": rate, "t_max": t_max, "n_points": n_points},
                sort_keys=True,
            ).encode()
        ).hexdigest(),
        version=__version__,
        created_utc=_utc_now(),
        wall_clock_seconds=time.perf_counter() - start,
        seeds={},
        files=["paths/ml_table.csv", "report.json"],
        summaries=report,
    )
    manifest.save(out)
    return report


# ---------------------------------------------------------------------------
# estimate command


def _load_sample(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)[:, -1]


def run_estimate(
    kind: str,
    input_path: str,
    outdir: str,
    *,
    input_b: str | None = None,
    window: float | None = None,
    burn_in: float = 0.5,
) -> dict:
    """Run one estimator on existing CSV data and persist the record.

    ``kind`` selects the estimator: ``realized-variance`` and ``leverage``
    read a single path CSV; ``qcov`` and ``ks`` need ``input_b``; ``hurst``
    reads a wide ensemble CSV (one column per path).  The JSON record lands
    in ``estimate.json`` next to a manifest.
    """
    start = time.perf_counter()
    out = Path(outdir)
    (out / "paths").mkdir(parents=True, exist_ok=True)
    files = ["estimate.json"]
    params: dict = {"input": str(input_path)}
    if kind == "realized-variance":
        if window is None:
            raise ConfigError("realized-variance needs an explicit window")
        grid = realized_variance(PathGrid.from_csv(input_path), window)
        grid.to_csv(str(out / "paths" / "realized_variance.csv"))
        files.append("paths/realized_variance.csv")
        params["window"] = window
        mean = float(np.mean(grid.values))
        estimate = EstimateWithCI(
            mean,
            float(np.std(grid.values, ddof=1) / math.sqrt(grid.values.size))
            if grid.values.size > 1
            else 0.0,
            int(grid.values.size),
        )
    elif kind == "leverage":
        params["window"] = window
        estimate = leverage_correlation(PathGrid.from_csv(input_path), window)
    elif kind == "qcov":
        if input_b is None:
            raise ConfigError("qcov needs a second input file")
        params["input_b"] = str(input_b)
        value = quadratic_covariation(
            PathGrid.from_csv(input_path), PathGrid.from_csv(input_b)
        )
        estimate = EstimateWithCI(value, 0.0, 1)
    elif kind == "hurst":
        wide = PathGrid.from_csv(input_path)
        if wide.n_components < 2:
            raise ConfigError("hurst needs a wide ensemble CSV (one column per path)")
        ensemble = [
            PathGrid(wide.times, wide.values[:, j])
            for j in range(wide.n_components)
        ]
        params["burn_in"] = burn_in
        estimate = hurst_moment_scaling(ensemble, burn_in=burn_in)
    elif kind == "ks":
        if input_b is None:
            raise ConfigError("ks needs a second input file")
        params["input_b"] = str(input_b)
        sample_a, sample_b = _load_sample(input_path), _load_sample(input_b)
        result = ks_distance(sample_a, sample_b)
        params["reject_at_1pct"] = bool(result.reject_at_1pct)
        estimate = EstimateWithCI(
            result.statistic, 0.0, int(sample_a.size + sample_b.size)
        )
    else:
        raise ConfigError(
            "estimator kind must be one of realized-variance, leverage, qcov, "
            f"hurst, ks; got {kind!r}"
        )
    record = estimate_record(kind, params, estimate, seed_manifest=None)
    with open(out / "estimate.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = RunManifest(
        command="estimate",
        config_hash=hashlib.sha256(
            json.dumps({"kind": kind, **params}, sort_keys=True).encode()
        ).hexdigest(),
        version=__version__,
        created_utc=_utc_now(),
        wall_clock_seconds=time.perf_counter() - start,
        seeds={},
        files=files,
        summaries={"point": estimate.point, "n": estimate.n},
    )
    manifest.save(out)
    return record
