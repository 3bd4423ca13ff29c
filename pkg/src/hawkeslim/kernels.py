"""Excitation kernels, the structured two-sided kernel matrix, near-critical
scaling sequences, and resolvent machinery.

The microscopic model couples upward and downward event streams through a
2x2 matrix of nonnegative kernels built from two components — a
same-direction kernel and a cross-direction kernel — with an asymmetry
factor >= 1 that tilts the reaction to downward events.  The matrix has
constant left eigenvectors, so its spectral content (first moment, tail
constant, resolvent) reduces to two scalar eigen-kernels: a unit-mass
principal combination and a signed secondary difference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

__all__ = [
    "EXPONENTIAL_MIXTURE",
    "SHIFTED_POWER_LAW",
    "CRITICALITY_TOL",
    "KernelFunction",
    "CombinedKernel",
    "KernelMatrixSpec",
    "ScalingRegime",
    "SpectralData",
    "AssumptionCheck",
    "AssumptionReport",
    "l1_norm",
    "build_kernel_matrix",
    "eigen_structure",
    "scalar_resolvent",
    "exponential_resolvent",
    "resolvent_matrix",
    "wiener_hopf_residual",
    "validate_assumptions",
]

EXPONENTIAL_MIXTURE = "exponential-mixture"
SHIFTED_POWER_LAW = "shifted-power-law"

#: tolerance on |branching ratio - 1| enforced by build_kernel_matrix
CRITICALITY_TOL = 1e-6


@dataclass(frozen=True)
class KernelFunction:
    """A nonnegative kernel on [0, oo) from one of two closed-form families.

    exponential-mixture
        ``k(x) = sum_i c_i exp(-r_i x)`` with (coefficient, rate) pairs;
        mass ``sum_i c_i / r_i``.
    shifted-power-law
        ``k(x) = w * a * (1 + x)^(-1-a)`` with tail exponent a in (1/2, 1);
        mass ``w``.

    ``weight`` declares the L1 mass and must agree with the shape
    parameters; the classmethod constructors compute it.
    """

    family: str
    weight: float
    coefficients: tuple[float, ...] = ()
    rates: tuple[float, ...] = ()
    tail_exponent: float | None = None

    def __post_init__(self) -> None:
        if self.family == EXPONENTIAL_MIXTURE:
            if not self.coefficients or len(self.coefficients) != len(self.rates):
                raise ValueError(
                    "exponential mixture needs matching (coefficient, rate) pairs"
                )
            if any(r <= 0.0 for r in self.rates):
                raise ValueError("exponential rates must be positive")
            mass = sum(c / r for c, r in zip(self.coefficients, self.rates))
            if abs(mass - self.weight) > 1e-8 * max(1.0, abs(mass)):
                raise ValueError(
                    f"declared weight {self.weight!r} does not match the "
                    f"integrated mass {mass!r}"
                )
            scale = max(abs(c) for c in self.coefficients)
            probe = np.concatenate([[0.0], np.geomspace(1e-6, 1e4, 256)])
            if np.any(self(probe) < -1e-12 * scale):
                raise ValueError("kernel must be pointwise nonnegative")
        elif self.family == SHIFTED_POWER_LAW:
            a = self.tail_exponent
            if a is None or not 0.5 < a < 1.0:
                raise ValueError(
                    "shifted power law needs a tail exponent in (1/2, 1)"
                )
            if self.weight < 0.0:
                raise ValueError("weight must be nonnegative")
            if self.coefficients or self.rates:
                raise ValueError("power-law kernels take no mixture terms")
        else:
            raise ValueError(f"unknown kernel family {self.family!r}")

    @classmethod
    def exponential(cls, weight: float, rate: float) -> "KernelFunction":
        """Single exponential with L1 mass ``weight``: weight*rate*exp(-rate x)."""
        weight = float(weight)
        rate = float(rate)
        return cls(EXPONENTIAL_MIXTURE, weight, (weight * rate,), (rate,))

    @classmethod
    def exponential_mixture(cls, terms) -> "KernelFunction":
        """Mixture ``sum_i c_i exp(-r_i x)`` from (coefficient, rate) pairs."""
        coefficients = tuple(float(c) for c, _ in terms)
        rates = tuple(float(r) for _, r in terms)
        weight = sum(c / r for c, r in zip(coefficients, rates))
        return cls(EXPONENTIAL_MIXTURE, weight, coefficients, rates)

    @classmethod
    def power_law(cls, weight: float, tail_exponent: float) -> "KernelFunction":
        """Shifted power law ``weight * a * (1+x)^(-1-a)``."""
        return cls(SHIFTED_POWER_LAW, float(weight), tail_exponent=float(tail_exponent))

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        xv = np.atleast_1d(x_arr)
        if self.family == EXPONENTIAL_MIXTURE:
            vals = np.zeros_like(xv)
            for c, r in zip(self.coefficients, self.rates):
                vals += c * np.exp(-r * xv)
        else:
            a = self.tail_exponent
            vals = self.weight * a * (1.0 + xv) ** (-1.0 - a)
        return float(vals[0]) if x_arr.ndim == 0 else vals

    @property
    def first_moment(self) -> float:
        """``int x k(x) dx``; infinite for the power-law family."""
        if self.family == EXPONENTIAL_MIXTURE:
            return sum(c / r**2 for c, r in zip(self.coefficients, self.rates))
        return math.inf

    @property
    def is_nonincreasing(self) -> bool:
        """Sufficient condition for a non-increasing kernel."""
        if self.family == EXPONENTIAL_MIXTURE:
            return all(c >= 0.0 for c in self.coefficients)
        return True

    def tail_integral(self, x):
        """``int_x^oo k(s) ds``."""
        x_arr = np.asarray(x, dtype=float)
        xv = np.atleast_1d(x_arr)
        if self.family == EXPONENTIAL_MIXTURE:
            vals = np.zeros_like(xv)
            for c, r in zip(self.coefficients, self.rates):
                vals += (c / r) * np.exp(-r * xv)
        else:
            vals = self.weight * (1.0 + xv) ** (-self.tail_exponent)
        return float(vals[0]) if x_arr.ndim == 0 else vals

    def to_dict(self) -> dict:
        if self.family == EXPONENTIAL_MIXTURE:
            params = {
                "terms": [[c, r] for c, r in zip(self.coefficients, self.rates)]
            }
        else:
            params = {"tail_exponent": self.tail_exponent}
        return {"family": self.family, "weight": self.weight, "params": params}

    @classmethod
    def from_dict(cls, doc: dict) -> "KernelFunction":
        family = doc["family"]
        weight = float(doc["weight"])
        params = doc["params"]
        if family == EXPONENTIAL_MIXTURE:
            coefficients = tuple(float(c) for c, _ in params["terms"])
            rates = tuple(float(r) for _, r in params["terms"])
            return cls(family, weight, coefficients, rates)
        if family == SHIFTED_POWER_LAW:
            return cls(family, weight, tail_exponent=float(params["tail_exponent"]))
        raise ValueError(f"unknown kernel family {family!r}")


def l1_norm(kernel: KernelFunction, *, numerical: bool = False) -> float:
    """Total mass ``int_0^oo k``.

    Closed form by default; ``numerical=True`` recomputes it by adaptive
    quadrature (used to cross-check the closed forms).
    """
    if numerical:
        from scipy.integrate import quad

        val, _ = quad(kernel, 0.0, np.inf, epsabs=1e-11, epsrel=1e-11, limit=400)
        return float(val)
    if kernel.family == EXPONENTIAL_MIXTURE:
        return float(sum(c / r for c, r in zip(kernel.coefficients, kernel.rates)))
    if kernel.tail_exponent is None or kernel.tail_exponent <= 0.0:
        raise ValueError("power-law mass diverges for tail exponent <= 0")
    return float(kernel.weight)


@dataclass(frozen=True)
class CombinedKernel:
    """A fixed linear combination of component kernels (possibly signed)."""

    kernels: tuple[KernelFunction, ...]
    coefficients: tuple[float, ...]

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        xv = np.atleast_1d(x_arr)
        vals = np.zeros_like(xv)
        for c, k in zip(self.coefficients, self.kernels):
            vals += c * k(xv)
        return float(vals[0]) if x_arr.ndim == 0 else vals

    @property
    def mass(self) -> float:
        """Signed integral of the combination."""
        return float(sum(c * k.weight for c, k in zip(self.coefficients, self.kernels)))

    @property
    def first_moment(self) -> float:
        if any(k.family == SHIFTED_POWER_LAW for k in self.kernels):
            return math.inf
        return float(
            sum(c * k.first_moment for c, k in zip(self.coefficients, self.kernels))
        )

    def tail_integral(self, x):
        x_arr = np.asarray(x, dtype=float)
        xv = np.atleast_1d(x_arr)
        vals = np.zeros_like(xv)
        for c, k in zip(self.coefficients, self.kernels):
            vals += c * k.tail_integral(xv)
        return float(vals[0]) if x_arr.ndim == 0 else vals


@dataclass(frozen=True)
class KernelMatrixSpec:
    """The structured 2x2 excitation-kernel matrix, rows/columns = (up, down).

    ::

        [[self_kernel,               asymmetry * cross_kernel         ],
         [cross_kernel,              self_kernel + (asymmetry - 1) * cross_kernel]]

    Both rows sum to the principal combination self + asymmetry*cross, so up
    and down streams stay balanced in the mean while asymmetry > 1 makes
    downward events the stronger exciters — the microscopic source of the
    leverage effect.

    Direct construction records — but does not reject — departures from
    criticality, so near-violations can be explored deliberately; use
    :func:`build_kernel_matrix` for the validating constructor and
    :func:`validate_assumptions` for the advisory report.
    """

    self_kernel: KernelFunction
    cross_kernel: KernelFunction
    asymmetry: float

    def __post_init__(self) -> None:
        if self.asymmetry < 1.0:
            raise ValueError("asymmetry must be >= 1")

    @property
    def branching_ratio(self) -> float:
        """Spectral radius of the integrated kernel matrix."""
        return self.self_kernel.weight + self.asymmetry * self.cross_kernel.weight

    @property
    def criticality_residual(self) -> float:
        return abs(self.branching_ratio - 1.0)

    def matrix_values(self, x) -> np.ndarray:
        """Evaluate the 2x2 matrix on ``x``; returns shape ``x.shape + (2, 2)``."""
        xv = np.asarray(x, dtype=float)
        k1 = np.atleast_1d(self.self_kernel(xv))
        k2 = np.atleast_1d(self.cross_kernel(xv))
        b = self.asymmetry
        out = np.empty(k1.shape + (2, 2))
        out[..., 0, 0] = k1
        out[..., 0, 1] = b * k2
        out[..., 1, 0] = k2
        out[..., 1, 1] = k1 + (b - 1.0) * k2
        return out

    def to_dict(self) -> dict:
        return {
            "self": self.self_kernel.to_dict(),
            "cross": self.cross_kernel.to_dict(),
            "asymmetry": self.asymmetry,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "KernelMatrixSpec":
        return cls(
            KernelFunction.from_dict(doc["self"]),
            KernelFunction.from_dict(doc["cross"]),
            float(doc["asymmetry"]),
        )


def build_kernel_matrix(
    self_kernel: KernelFunction,
    cross_kernel: KernelFunction,
    asymmetry: float,
) -> KernelMatrixSpec:
    """Validating constructor: requires the matrix to sit at criticality."""
    spec = KernelMatrixSpec(self_kernel, cross_kernel, float(asymmetry))
    if spec.criticality_residual > CRITICALITY_TOL:
        raise ValueError(
            "kernel matrix is not critically normalized: "
            f"|branching ratio - 1| = {spec.criticality_residual:.6g}"
        )
    return spec


@dataclass(frozen=True)
class ScalingRegime:
    """Horizon-indexed near-critical scaling of excitation strength and baseline.

    kind ``"light"``
        kernel scale ``1 - gap/T`` and constant baseline: short-memory
        kernels, diffusive limit.
    kind ``"heavy"``
        kernel scale ``1 - gap/T**tail_exponent`` and baseline
        ``base_rate * T**(tail_exponent - 1)``: fat-tailed kernels, rough
        limit.

    By construction ``T * (1 - scale)`` (light) and ``T**a * (1 - scale)``
    (heavy) equal ``gap`` identically, and the scale increases to one with
    the horizon.
    """

    kind: str
    gap: float
    base_rate: float
    tail_exponent: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("light", "heavy"):
            raise ValueError(f"unknown regime kind {self.kind!r}")
        if self.gap <= 0.0:
            raise ValueError("gap must be positive")
        if self.base_rate <= 0.0:
            raise ValueError("base rate must be positive")
        if self.kind == "heavy":
            a = self.tail_exponent
            if a is None or not 0.5 < a < 1.0:
                raise ValueError("heavy regime needs a tail exponent in (1/2, 1)")
        elif self.tail_exponent is not None:
            raise ValueError("light regime takes no tail exponent")

    @classmethod
    def light(cls, gap: float, base_rate: float) -> "ScalingRegime":
        return cls("light", float(gap), float(base_rate))

    @classmethod
    def heavy(
        cls, tail_exponent: float, gap: float, base_rate: float
    ) -> "ScalingRegime":
        return cls("heavy", float(gap), float(base_rate), float(tail_exponent))

    @property
    def min_horizon(self) -> float:
        """Smallest horizon at which the kernel scale is nonnegative."""
        if self.kind == "light":
            return self.gap
        return self.gap ** (1.0 / self.tail_exponent)

    def kernel_scale(self, horizon: float) -> float:
        """The factor in [0, 1) multiplying the kernel matrix at this horizon."""
        if self.kind == "light":
            scale = 1.0 - self.gap / horizon
        else:
            scale = 1.0 - self.gap / horizon**self.tail_exponent
        if scale < 0.0:
            raise ValueError(
                f"horizon {horizon} is below the minimum {self.min_horizon:.6g} "
                "for this regime"
            )
        return scale

    def baseline(self, horizon: float) -> float:
        """Baseline event rate at this horizon."""
        if self.kind == "light":
            return self.base_rate
        return self.base_rate * horizon ** (self.tail_exponent - 1.0)

    def to_dict(self) -> dict:
        params = {"gap": self.gap, "base_rate": self.base_rate}
        if self.kind == "heavy":
            params["tail_exponent"] = self.tail_exponent
        return {"regime": self.kind, "params": params}

    @classmethod
    def from_dict(cls, doc: dict) -> "ScalingRegime":
        params = doc["params"]
        if doc["regime"] == "light":
            return cls.light(params["gap"], params["base_rate"])
        return cls.heavy(params["tail_exponent"], params["gap"], params["base_rate"])


@dataclass(frozen=True)
class SpectralData:
    """Spectral decomposition of a kernel matrix under a scaling regime.

    The constant left row-eigenvector directions diagonalize the matrix:
    ``direction @ matrix(x) = eigenkernel(x) * direction`` pointwise.  The
    symmetric unit vector spans the direction orthogonal to the secondary
    one (it loads up and down streams equally) and is normalized so its dot
    product with the principal direction is positive.
    """

    principal_kernel: CombinedKernel
    secondary_kernel: CombinedKernel
    principal_direction: tuple[float, float]
    secondary_direction: tuple[float, float]
    symmetric_unit: tuple[float, float]
    first_moment: float | None = None
    tail_exponent: float | None = None
    tail_constant: float | None = None


def eigen_structure(spec: KernelMatrixSpec, regime: ScalingRegime) -> SpectralData:
    """Eigen-kernels, eigen-directions, and the regime's scalar constants.

    Light regime requires exponential mixtures (the power-law first moment
    diverges); heavy regime requires shifted power laws with one shared
    tail exponent equal to the regime's (the tail constant is undefined or
    zero otherwise).
    """
    b = spec.asymmetry
    k1, k2 = spec.self_kernel, spec.cross_kernel
    principal = CombinedKernel((k1, k2), (1.0, b))
    secondary = CombinedKernel((k1, k2), (1.0, -1.0))
    inv_root2 = 1.0 / math.sqrt(2.0)
    common = dict(
        principal_kernel=principal,
        secondary_kernel=secondary,
        principal_direction=(1.0, b),
        secondary_direction=(1.0, -1.0),
        symmetric_unit=(inv_root2, inv_root2),
    )
    families = {k1.family, k2.family}
    if regime.kind == "light":
        if families != {EXPONENTIAL_MIXTURE}:
            raise ValueError(
                "light regime requires exponential-mixture kernels "
                "(power-law first moment diverges)"
            )
        return SpectralData(first_moment=principal.first_moment, **common)
    if families != {SHIFTED_POWER_LAW}:
        raise ValueError(
            "heavy regime requires shifted-power-law kernels "
            "(tail constant undefined for exponential tails)"
        )
    exponents = {k.tail_exponent for k in (k1, k2) if k.weight > 0.0}
    if len(exponents) != 1:
        raise ValueError("heavy regime requires a single shared tail exponent")
    (alpha,) = exponents
    if abs(alpha - regime.tail_exponent) > 1e-12:
        raise ValueError(
            f"kernel tail exponent {alpha} does not match the regime's "
            f"{regime.tail_exponent}"
        )
    return SpectralData(
        tail_exponent=alpha,
        tail_constant=alpha * principal.mass,
        **common,
    )


def _uniform_step(grid) -> tuple[np.ndarray, float]:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or grid[0] != 0.0:
        raise ValueError("grid must be 1-d, start at 0, and have >= 2 points")
    steps = np.diff(grid)
    h = float(steps[0])
    if h <= 0.0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise ValueError("grid must be uniform with positive step")
    return grid, h


def _causal_convolve(f: np.ndarray, g: np.ndarray, step: float) -> np.ndarray:
    """Trapezoidal approximation of ``int_0^t f(t-s) g(s) ds`` on the grid."""
    full = fftconvolve(f, g)[: len(f)]
    return step * (full - 0.5 * (f[0] * g + g[0] * f))


def scalar_resolvent(
    values, step: float, *, tol: float = 1e-12, max_iter: int = 1_000_000
) -> np.ndarray:
    """Resolvent ``sum_{k>=1} k^{*k}`` of a scalar kernel sampled on a grid.

    Fixed-point iteration ``d <- k + k*d`` with trapezoidal convolution,
    stopped when successive iterates differ by less than ``tol`` in sup
    norm.  The kernel may be signed; convergence needs total mass of the
    absolute value below one.
    """
    g = np.asarray(values, dtype=float)
    d = g.copy()
    diff = math.inf
    for _ in range(max_iter):
        d_next = g + _causal_convolve(g, d, step)
        diff = float(np.max(np.abs(d_next - d)))
        d = d_next
        if diff < tol:
            return d
    raise RuntimeError(
        f"resolvent iteration did not reach {tol:g} within {max_iter} "
        f"iterations (last sup-difference {diff:.3g})"
    )


def exponential_resolvent(weight, rate, scale, grid) -> np.ndarray:
    """Closed-form resolvent of ``scale * weight * rate * exp(-rate x)``."""
    grid = np.asarray(grid, dtype=float)
    eff = scale * weight
    return eff * rate * np.exp(-rate * (1.0 - eff) * grid)


def _spectral_projectors(asymmetry: float) -> tuple[np.ndarray, np.ndarray]:
    b = asymmetry
    p1 = np.array([[1.0, b], [1.0, b]]) / (1.0 + b)
    p2 = np.array([[b, -b], [-1.0, 1.0]]) / (1.0 + b)
    return p1, p2


def resolvent_matrix(
    spec: KernelMatrixSpec,
    scale: float,
    grid,
    *,
    tol: float = 1e-12,
    max_iter: int = 1_000_000,
) -> np.ndarray:
    """Matrix resolvent ``sum_{k>=1} (scale*K)^{*k}`` on a uniform grid.

    The structured matrix has constant eigenvectors, so the matrix fixed
    point reduces exactly to two scalar resolvents recombined through the
    spectral projectors; returns shape ``(len(grid), 2, 2)``.
    """
    if not 0.0 <= scale < 1.0:
        raise ValueError(
            f"kernel scale must lie in [0, 1) for the resolvent to converge; "
            f"got {scale}"
        )
    grid, h = _uniform_step(grid)
    b = spec.asymmetry
    principal = spec.self_kernel(grid) + b * spec.cross_kernel(grid)
    secondary = spec.self_kernel(grid) - spec.cross_kernel(grid)
    d1 = scalar_resolvent(scale * principal, h, tol=tol, max_iter=max_iter)
    d2 = scalar_resolvent(scale * secondary, h, tol=tol, max_iter=max_iter)
    p1, p2 = _spectral_projectors(b)
    return d1[:, None, None] * p1 + d2[:, None, None] * p2


def wiener_hopf_residual(
    spec: KernelMatrixSpec, scale: float, grid, resolvent: np.ndarray | None = None
) -> float:
    """Sup-norm on-grid residual of ``R * K - (R - K)`` with ``K = scale*matrix``.

    Uses the same trapezoidal convolution as the fixed point, so the
    residual measures convergence of the iteration rather than the O(h^2)
    discretization error.
    """
    grid, h = _uniform_step(grid)
    if resolvent is None:
        resolvent = resolvent_matrix(spec, scale, grid)
    scaled = scale * spec.matrix_values(grid)
    conv = np.zeros_like(scaled)
    for i in range(2):
        for j in range(2):
            acc = np.zeros(len(grid))
            for mid in range(2):
                acc += _causal_convolve(resolvent[:, i, mid], scaled[:, mid, j], h)
            conv[:, i, j] = acc
    return float(np.max(np.abs(conv - (resolvent - scaled))))


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class AssumptionReport:
    """Advisory report on the modeling assumptions; never raises."""

    checks: tuple[AssumptionCheck, ...]
    criticality_residual: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __str__(self) -> str:
        return "\n".join(
            f"[{'ok' if c.passed else 'FAIL'}] {c.name}: {c.detail}"
            for c in self.checks
        )


def validate_assumptions(
    spec: KernelMatrixSpec, regime: ScalingRegime
) -> AssumptionReport:
    """Report criticality, monotonicity, and regime-specific tail/moment checks."""
    checks = []
    residual = spec.criticality_residual
    checks.append(
        AssumptionCheck(
            "criticality",
            residual <= CRITICALITY_TOL,
            f"|branching ratio - 1| = {residual:.3g}",
        )
    )
    mono = spec.self_kernel.is_nonincreasing and spec.cross_kernel.is_nonincreasing
    checks.append(
        AssumptionCheck(
            "monotonicity",
            mono,
            "component kernels are non-increasing"
            if mono
            else "a mixture coefficient is negative; monotonicity not guaranteed",
        )
    )
    principal = CombinedKernel(
        (spec.self_kernel, spec.cross_kernel), (1.0, spec.asymmetry)
    )
    if regime.kind == "light":
        m = principal.first_moment
        finite = math.isfinite(m)
        checks.append(
            AssumptionCheck(
                "first-moment",
                finite,
                f"principal first moment = {m:.6g}"
                if finite
                else "principal first moment diverges",
            )
        )
    else:
        alpha = regime.tail_exponent
        xs = np.geomspace(1e2, 1e4, 25)
        vals = alpha * xs**alpha * principal.tail_integral(xs)
        ref = float(vals[-1])
        if ref <= 1e-12:
            checks.append(
                AssumptionCheck(
                    "tail-limit",
                    False,
                    "tail constant limit is 0 (kernel tails decay too fast)",
                )
            )
        else:
            drift = float(np.max(np.abs(vals / ref - 1.0)))
            checks.append(
                AssumptionCheck(
                    "tail-limit",
                    drift < 0.01,
                    f"relative tail drift {drift:.3g} toward constant {ref:.4g}",
                )
            )
    return AssumptionReport(tuple(checks), residual)
