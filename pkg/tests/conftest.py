"""Shared fixtures for the acceptance suite plus its terminal report.

The acceptance checks share a handful of expensive Monte Carlo ensembles;
they are built once per session, reduced immediately to per-path scalars,
and the event streams are discarded.  Each acceptance test registers one
line with :func:`record_acceptance`, and the terminal summary prints every
registered line so a full run ends with a visible pass/fail scoreboard.
"""

import time

import numpy as np
import pytest

import hawkeslim as hl

# one seed family per ensemble, disjoint from every unit-test family
SEED_LEVERAGE = 201
SEED_SYMMETRIC = 202
SEED_SHORT_HORIZON = 203
SEED_HEAVY = 204
SEED_POISSON = 205
SEED_REFERENCE = 206

_ACCEPTANCE_RESULTS = {}


def record_acceptance(index: int, label: str, passed: bool, detail: str) -> None:
    """Register one scoreboard line; the terminal summary prints them all."""
    _ACCEPTANCE_RESULTS[index] = (label, bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="=")
    for index in sorted(_ACCEPTANCE_RESULTS):
        label, passed, detail = _ACCEPTANCE_RESULTS[index]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(
            f"ACCEPTANCE {index:02d} {status}  {label}: {detail}"
        )


def light_spec(principal: float, secondary: float, asymmetry: float):
    return hl.build_kernel_matrix(
        hl.KernelFunction.exponential(principal, 1.0),
        hl.KernelFunction.exponential(secondary, 1.0),
        asymmetry,
    )


def heavy_spec(principal: float, secondary: float, asymmetry: float, tail: float):
    return hl.build_kernel_matrix(
        hl.KernelFunction.power_law(principal, tail),
        hl.KernelFunction.power_law(secondary, tail),
        asymmetry,
    )


LIGHT_REGIME = hl.ScalingRegime.light(1.0, 1.0)
HEAVY_REGIME = hl.ScalingRegime.heavy(0.6, 1.0, 1.0)


def _light_path_scalars(spec, horizon, seed, with_drivers):
    """One simulated path reduced to scalars; streams are not retained."""
    start = time.perf_counter()
    stream = hl.simulate(spec, LIGHT_REGIME, horizon, seed)
    row = {
        "n_up": int(np.count_nonzero(stream.marks == 1)),
        "n_down": int(np.count_nonzero(stream.marks == -1)),
        "terminal": float(hl.rescale_light(stream).values[-1]),
    }
    if with_drivers:
        emb = hl.embedded_brownians(stream, spec, LIGHT_REGIME)
        row["bracket"] = hl.quadratic_covariation(
            emb.volatility_brownian, emb.price_brownian
        )
        track = hl.rescaled_intensity(stream, spec, LIGHT_REGIME).values
        row["secondary_sup"] = float(np.max(np.abs(track[:, 0] - track[:, 1])))
    row["seconds"] = time.perf_counter() - start
    return row


@pytest.fixture(scope="session")
def leverage_ensemble():
    """Asymmetric light model at the long horizon: 500 paths of scalars.

    Paths 0..199 also carry the embedded-driver bracket and the secondary
    intensity sup; paths 200..499 carry counts and terminals only (they
    widen the marginal-law sample).
    """
    spec = light_spec(0.4, 0.2, 3.0)
    return [
        _light_path_scalars(spec, 2000.0, [SEED_LEVERAGE, i], with_drivers=i < 200)
        for i in range(500)
    ]


@pytest.fixture(scope="session")
def symmetric_ensemble():
    """Symmetric (asymmetry 1) light model, 200 paths with brackets."""
    spec = light_spec(0.5, 0.5, 1.0)
    return [
        _light_path_scalars(spec, 2000.0, [SEED_SYMMETRIC, i], with_drivers=True)
        for i in range(200)
    ]


@pytest.fixture(scope="session")
def short_horizon_sups():
    """Secondary-direction sups at the shorter horizon (100 paths)."""
    spec = light_spec(0.4, 0.2, 3.0)
    sups = []
    for i in range(100):
        stream = hl.simulate(spec, LIGHT_REGIME, 500.0, [SEED_SHORT_HORIZON, i])
        track = hl.rescaled_intensity(stream, spec, LIGHT_REGIME).values
        sups.append(float(np.max(np.abs(track[:, 0] - track[:, 1]))))
    return np.array(sups)


@pytest.fixture(scope="session")
def heavy_terminals():
    """Heavy-regime rescaled price terminals at the reduced scale."""
    spec = heavy_spec(0.4, 0.2, 3.0, 0.6)
    terms = []
    for i in range(300):
        stream = hl.simulate(spec, HEAVY_REGIME, 500.0, [SEED_HEAVY, i])
        terms.append(float(hl.rescale_heavy(stream, HEAVY_REGIME).price.values[-1]))
    return np.array(terms)
