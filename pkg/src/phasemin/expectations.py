"""Monte-Carlo realization of the one-step expectation gains f and g.

For correlation level ``c`` and independent standard complex normals
``x0, x1`` with ``s = c x0 + sqrt(1-c^2) x1``:

* ``f(c) = (1/c)   E[ phase(s) |x0| conj(x0) ]`` - mean gain of the
  iterate coefficient aligned with the truth;
* ``g(c) = (1/sqrt(1-c^2)) E[ phase(s) |x0| conj(x1) ]`` - mean gain of an
  orthogonal coefficient.

Both expectations are real by rotational invariance; the imaginary part is
estimated alongside as a diagnostic. Useful anchors (closed-form moment
computations, cross-checked by quadrature in the tests):

* ``g(0) = (E|x0|)^2 = pi/4``,
* ``f(c) -> 1`` as ``c -> 1`` (the integrand degenerates to ``|x0|^2``),
* ``f(c) -> 3*pi/8`` as ``c -> 0``. Differentiating the exchangeable form
  ``E[phase(x0) |s| conj(s)]`` at c = 0 gives
  ``E[phase(x0) (Re(conj(x1) x0) conj(x1)/|x1| + |x1| conj(x0))]
  = pi/8 + pi/4``. (A naive interchange that treats ``d|s|/dc`` as
  ``|x0|`` yields ``2 E|x0||x1| = pi/2`` instead; that value does not
  match the integral and is kept out of every numeric path here.)

``certify_constants`` turns grid evaluations plus a configured Lipschitz
bound and Monte-Carlo error bars into certified constants: a floor
``C_f > 1`` for f, a floor ``C_g > 0`` for g, and the ratio property
``f/g >= 1``, all over ``[0, C0]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .sensing import spawn_seed

__all__ = [
    "F_LIMIT_AT_ZERO",
    "G_AT_ZERO",
    "BASIN_THRESHOLD",
    "DEFAULT_LIPSCHITZ_BOUND",
    "CERTIFIED_ALIGNED_GAIN",
    "FgEstimate",
    "CurvePoint",
    "CertificationReport",
    "estimate_f",
    "estimate_g",
    "fg_curve",
    "certify_constants",
]

#: c -> 0 limit of f (see module docstring).
F_LIMIT_AT_ZERO = 3.0 * math.pi / 8.0
#: g(0) = (E|x0|)^2.
G_AT_ZERO = math.pi / 4.0
#: Default correlation threshold C0 for certification and for declaring an
#: iterate inside the convergence basin.
BASIN_THRESHOLD = 0.9
#: Slope bound used to propagate grid values to the continuum. The measured
#: max |f'| and |g'| on [0, 0.9] are below 0.7 (finite differences on the
#: quadrature curve); 2.0 keeps a ~3x safety factor while leaving the
#: certification margin meaningful at the default grid step.
DEFAULT_LIPSCHITZ_BOUND = 2.0
#: Frozen certified floor for f on [0, 0.9] at the default settings
#: (measured certification value ~1.021 +- 0.004 across seeds at 1e6
#: samples; 1.01 keeps ~3 sigma of cushion). The acceptance suite
#: re-derives it and asserts the certification reproduces at least this
#: value. Used for the default instrumentation basis depth.
CERTIFIED_ALIGNED_GAIN = 1.01

# Below this c the direct 1/c estimator is replaced by the difference
# quotient of the exchangeable integrand to avoid variance amplification.
_SMALL_C_SWITCH = 0.02
_CHUNK = 1 << 19
_FG_STREAM_TAG = 0xF6


@dataclass(frozen=True)
class FgEstimate:
    """One Monte-Carlo estimate: value, standard error, and the imaginary
    part of the (theoretically real) expectation as a symmetry diagnostic."""

    c: float
    value: float
    stderr: float
    imag: float
    imag_stderr: float
    n_samples: int


def _cn(rng: np.random.Generator, size: int) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * np.sqrt(0.5)


def _phase(z: np.ndarray) -> np.ndarray:
    a = np.abs(z)
    out = np.ones_like(z)
    nz = a > 0.0
    out[nz] = z[nz] / a[nz]
    return out


def _mc_mean(integrand, n_samples: int, rng: np.random.Generator, c: float) -> FgEstimate:
    """Chunked antithetic Monte Carlo of a complex integrand h(x0, x1).

    ``n_samples`` counts base draws; each contributes the pair average
    ``(h(x0, x1) + h(x0, -x1)) / 2``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    s_re = s_re2 = s_im = s_im2 = 0.0
    remaining = n_samples
    while remaining > 0:
        size = min(remaining, _CHUNK)
        x0 = _cn(rng, size)
        x1 = _cn(rng, size)
        h = 0.5 * (integrand(x0, x1) + integrand(x0, -x1))
        s_re += float(h.real.sum())
        s_re2 += float((h.real ** 2).sum())
        s_im += float(h.imag.sum())
        s_im2 += float((h.imag ** 2).sum())
        remaining -= size
    n = n_samples
    mean_re = s_re / n
    mean_im = s_im / n
    var_re = max(s_re2 - n * mean_re**2, 0.0) / (n - 1)
    var_im = max(s_im2 - n * mean_im**2, 0.0) / (n - 1)
    return FgEstimate(
        c=float(c),
        value=mean_re,
        stderr=math.sqrt(var_re / n),
        imag=mean_im,
        imag_stderr=math.sqrt(var_im / n),
        n_samples=n,
    )


def estimate_f(c: float, n_samples: int, rng: np.random.Generator) -> FgEstimate:
    """Monte-Carlo estimate of f(c) for 0 < c < 1.

    For ``c <= 0.02`` the estimator switches to the difference quotient of
    the exchangeable integrand ``phase(x0) |s| conj(s)`` against its c = 0
    value with common random numbers; the direct form divides by c and its
    variance blows up as c -> 0, while the difference is O(c) pathwise.
    """
    if not 0.0 < c < 1.0:
        raise ValueError(f"f is defined for 0 < c < 1, got c={c}")
    t = math.sqrt(1.0 - c * c)
    if c <= _SMALL_C_SWITCH:

        def integrand(x0, x1):
            s = c * x0 + t * x1
            return _phase(x0) * (np.abs(s) * np.conj(s) - np.abs(x1) * np.conj(x1)) / c

    else:

        def integrand(x0, x1):
            s = c * x0 + t * x1
            return _phase(s) * np.abs(x0) * np.conj(x0) / c

    return _mc_mean(integrand, n_samples, rng, c)


def _estimate_f_limit(n_samples: int, rng: np.random.Generator) -> FgEstimate:
    """Monte-Carlo estimate of the c -> 0 limit of f (expected 3*pi/8).

    Integrates the pathwise c-derivative of the exchangeable integrand at
    c = 0: ``phase(x0) (Re(conj(x1) x0) conj(x1)/|x1| + |x1| conj(x0))``.
    """

    def integrand(x0, x1):
        a1 = np.abs(x1)
        ph1 = _phase(x1)
        return _phase(x0) * (
            (np.conj(x1) * x0).real * np.conj(ph1) + a1 * np.conj(x0)
        )

    return _mc_mean(integrand, n_samples, rng, 0.0)


def estimate_g(c: float, n_samples: int, rng: np.random.Generator) -> FgEstimate:
    """Monte-Carlo estimate of g(c) for 0 <= c < 1."""
    if not 0.0 <= c < 1.0:
        raise ValueError(f"g is defined for 0 <= c < 1, got c={c}")
    t = math.sqrt(1.0 - c * c)

    def integrand(x0, x1):
        s = c * x0 + t * x1
        return _phase(s) * np.abs(x0) * np.conj(x1) / t

    return _mc_mean(integrand, n_samples, rng, c)


@dataclass(frozen=True)
class CurvePoint:
    c: float
    f_hat: float
    f_stderr: float
    g_hat: float
    g_stderr: float

    @property
    def ratio(self) -> float:
        return self.f_hat / self.g_hat


def fg_curve(grid, n_samples: int, seed: int) -> list[CurvePoint]:
    """Evaluate f and g over a grid of c values in [0, 1).

    Each grid point gets an independent child stream derived from ``seed``
    and its index, so points can be evaluated in any order (or in
    parallel) with identical results. At c = 0 the f column carries the
    limit estimator.
    """
    points = []
    for idx, c in enumerate(grid):
        c = float(c)
        if not 0.0 <= c < 1.0:
            raise ValueError(f"grid values must lie in [0, 1), got {c}")
        rng_f = np.random.default_rng(spawn_seed(seed, _FG_STREAM_TAG, 2 * idx))
        rng_g = np.random.default_rng(spawn_seed(seed, _FG_STREAM_TAG, 2 * idx + 1))
        ef = _estimate_f_limit(n_samples, rng_f) if c == 0.0 else estimate_f(c, n_samples, rng_f)
        eg = estimate_g(c, n_samples, rng_g)
        points.append(
            CurvePoint(
                c=c, f_hat=ef.value, f_stderr=ef.stderr, g_hat=eg.value, g_stderr=eg.stderr
            )
        )
    return points


@dataclass(frozen=True)
class CertificationReport:
    """Grid-plus-Lipschitz certification of the gain constants on [0, C0].

    ``c_f``/``c_g`` are the grid minima of f/g minus the margin
    ``lipschitz_bound * grid_step + 3 * max stderr``; certification
    succeeds only if the margins still clear the targets (f > 1, g > 0,
    f/g >= 1).
    """

    c0: float
    grid_step: float
    lipschitz_bound_used: float
    n_samples: int
    seed: int
    min_f: float
    min_g: float
    max_g: float
    min_ratio: float
    margin_f: float
    margin_g: float
    c_f: float
    c_g: float
    certified_eq1: bool
    certified_eq2: bool
    points: list[CurvePoint] = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "C0": float(self.c0),
            "grid_step": float(self.grid_step),
            "L": float(self.lipschitz_bound_used),
            "n_samples": int(self.n_samples),
            "seed": int(self.seed),
            "min_f": float(self.min_f),
            "min_g": float(self.min_g),
            "max_g": float(self.max_g),
            "min_ratio": float(self.min_ratio),
            "margin_f": float(self.margin_f),
            "margin_g": float(self.margin_g),
            "C_f": float(self.c_f),
            "C_g": float(self.c_g),
            "certified_eq1": bool(self.certified_eq1),
            "certified_eq2": bool(self.certified_eq2),
        }


def certify_constants(
    c0: float,
    grid_step: float,
    n_samples: int,
    seed: int,
    lipschitz_bound: float = DEFAULT_LIPSCHITZ_BOUND,
) -> CertificationReport:
    """Certify gain constants over [0, C0] from a dense grid.

    f is evaluated on the grid excluding c = 0 (where it is defined only
    as a limit); the Lipschitz margin covers the gap down to 0 as it
    covers every other inter-point interval. Certification failure is a
    report outcome, not an exception.
    """
    if not 0.0 < c0 < 1.0:
        raise ValueError("C0 must lie in (0, 1)")
    if not 0.0 < grid_step <= 0.01:
        raise ValueError("grid_step must lie in (0, 0.01]")
    steps = int(round(c0 / grid_step))
    grid = [i * grid_step for i in range(steps + 1)]
    if abs(grid[-1] - c0) > 1e-12:
        grid.append(c0)
    grid = [c for c in grid if c <= c0 + 1e-12]

    points = fg_curve(grid, n_samples, seed)
    f_points = [p for p in points if p.c > 0.0]
    margin_f = lipschitz_bound * grid_step + 3.0 * max(p.f_stderr for p in f_points)
    margin_g = lipschitz_bound * grid_step + 3.0 * max(p.g_stderr for p in points)
    min_f = min(p.f_hat for p in f_points)
    min_g = min(p.g_hat for p in points)
    max_g = max(p.g_hat for p in points)
    min_ratio = min(p.ratio for p in f_points)
    c_f = min_f - margin_f
    c_g = min_g - margin_g
    certified_eq1 = c_f > 1.0 and c_g > 0.0
    min_ratio_lower = min(
        (p.f_hat - margin_f) / (p.g_hat + margin_g) for p in f_points
    )
    certified_eq2 = min_ratio_lower >= 1.0
    return CertificationReport(
        c0=float(c0),
        grid_step=float(grid_step),
        lipschitz_bound_used=float(lipschitz_bound),
        n_samples=int(n_samples),
        seed=int(seed),
        min_f=min_f,
        min_g=min_g,
        max_g=max_g,
        min_ratio=min_ratio,
        margin_f=margin_f,
        margin_g=margin_g,
        c_f=c_f,
        c_g=c_g,
        certified_eq1=certified_eq1,
        certified_eq2=certified_eq2,
        points=points,
    )
