"""Executable statistical and deterministic property probes.

Each probe checks one distributional or geometric fact the solver's
behavior rests on, over freshly drawn randomness:

* deterministic inequalities (phase/unit-vector perturbation bounds,
  projection-direction decomposition) must hold on every single draw;
* probability bounds (small-ball, norm concentration, count-below-radius)
  are tested one-sidedly: the observed violation count must be consistent
  with the claimed bound under a binomial test at significance
  ``ALPHA = 1e-3``. Bounds with unspecified universal constants are
  probed directionally (rates shrink at the predicted scale) instead of
  absolutely, since asserting an unspecified constant is unfalsifiable.

Every probe owns a child stream of the master seed, so the whole battery
is reproducible and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .core import phase_vec
from .sensing import sample_complex_gaussian, spawn_seed

__all__ = [
    "ALPHA",
    "ProbeResult",
    "probe_phase_perturbation",
    "probe_unit_perturbation",
    "probe_small_ball",
    "probe_projection_direction",
    "probe_norm_concentration",
    "probe_order_statistic",
    "probe_phase_perturbation_l1",
    "run_all_probes",
]

#: One-sided binomial significance for the statistical probes.
ALPHA = 1e-3

# Additive guard for comparing deterministically-true inequalities in
# floating point.
_FP_SLACK = 1e-9

_PROBE_STREAM_TAG = 0x9B


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of one probe.

    ``violations`` counts draws breaking the probed bound; ``bound_rhs``
    is the probability bound the count is tested against (0.0 for
    deterministic probes, where any violation fails). ``details`` holds
    per-configuration rates for inspection and serialization.
    """

    probe: str
    trials: int
    violations: int
    bound_rhs: float
    empirical_rate: float
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "probe": self.probe,
            "trials": int(self.trials),
            "violations": int(self.violations),
            "bound_rhs": float(self.bound_rhs),
            "empirical_rate": float(self.empirical_rate),
            "passed": bool(self.passed),
            "details": self.details,
        }


def consistent_with_bound(violations: int, trials: int, p_bound: float) -> bool:
    """One-sided test: is the violation count consistent with rate <= p_bound?

    Fails only when observing >= violations is improbable (< ALPHA) under
    Binomial(trials, p_bound).
    """
    if p_bound >= 1.0:
        return True
    return float(stats.binom.sf(violations - 1, trials, p_bound)) >= ALPHA


def probe_phase_perturbation(
    trials: int = 1_000_000, rng: np.random.Generator | None = None
) -> ProbeResult:
    """Scalar phase stability: |phase(x+y) - phase(x)| <= min(2|y|/|x|, 2).

    Draws pairs with magnitude ratio log-uniform in [1e-3, 1e3] (both
    sides of the inequality are invariant under common scaling and global
    rotation, so unit |x| is general). Deterministic: zero violations
    required.
    """
    rng = rng or np.random.default_rng(0)
    x = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, trials))
    ratio = 10.0 ** rng.uniform(-3.0, 3.0, trials)
    y = ratio * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, trials))
    lhs = np.abs(phase_vec(x + y) - phase_vec(x))
    bound = np.minimum(2.0 * ratio, 2.0)
    violations = int(np.sum(lhs > bound + _FP_SLACK))
    return ProbeResult(
        probe="phase_perturbation_scalar",
        trials=trials,
        violations=violations,
        bound_rhs=0.0,
        empirical_rate=violations / trials,
        passed=violations == 0,
        details={"max_excess": float(np.max(lhs - bound))},
    )


def probe_unit_perturbation(
    trials: int = 100_000,
    dims: tuple[int, ...] = (2, 8, 64),
    rng: np.random.Generator | None = None,
) -> ProbeResult:
    """Vector version: ||(u+v)/||u+v|| - v/||v|||| <= min(2||u||/||v||, 2)."""
    rng = rng or np.random.default_rng(0)
    per_dim = trials // len(dims)
    total = 0
    violations = 0
    max_excess = -np.inf
    for dim in dims:
        v = sample_complex_gaussian(rng, per_dim, dim)
        u = sample_complex_gaussian(rng, per_dim, dim)
        ratio = 10.0 ** rng.uniform(-3.0, 3.0, per_dim)
        vn = np.linalg.norm(v, axis=1)
        un = np.linalg.norm(u, axis=1)
        u *= (ratio * vn / un)[:, np.newaxis]
        s = u + v
        sn = np.linalg.norm(s, axis=1)
        sn_safe = np.where(sn == 0.0, 1.0, sn)
        lhs = np.linalg.norm(s / sn_safe[:, np.newaxis] - v / vn[:, np.newaxis], axis=1)
        bound = np.minimum(2.0 * ratio, 2.0)
        violations += int(np.sum(lhs > bound + _FP_SLACK))
        max_excess = max(max_excess, float(np.max(lhs - bound)))
        total += per_dim
    return ProbeResult(
        probe="unit_vector_perturbation",
        trials=total,
        violations=violations,
        bound_rhs=0.0,
        empirical_rate=violations / total,
        passed=violations == 0,
        details={"dims": list(dims), "max_excess": max_excess},
    )


def probe_small_ball(
    trials: int = 1_000_000,
    r_values: tuple[float, ...] = (0.1, 0.3, 0.5, 1.0),
    rng: np.random.Generator | None = None,
) -> ProbeResult:
    """Small-ball bound for the complex normal: Pr(|x| <= r) < r^2.

    The exact probability is ``1 - exp(-r^2)``, strictly below ``r^2``, so
    the one-sided binomial test should pass with margin at every r.
    """
    rng = rng or np.random.default_rng(0)
    moduli = np.abs(sample_complex_gaussian(rng, trials, 1)[:, 0])
    details = {}
    all_ok = True
    worst = 0.0
    for r in r_values:
        count = int(np.sum(moduli <= r))
        ok = consistent_with_bound(count, trials, r * r)
        details[str(r)] = {"count": count, "rate": count / trials, "bound": r * r, "consistent": ok}
        all_ok &= ok
        worst = max(worst, (count / trials) / (r * r))
    return ProbeResult(
        probe="small_ball",
        trials=trials,
        violations=sum(0 if d["consistent"] else 1 for d in details.values()),
        bound_rhs=1.0,
        empirical_rate=worst,
        passed=all_ok,
        details=details,
    )


def probe_projection_direction(
    trials: int = 2_000,
    m: int = 64,
    n: int = 8,
    rng: np.random.Generator | None = None,
) -> ProbeResult:
    """Projection geometry: ``P_L x / ||P_L x|| = a x + sqrt(1-a^2) v``.

    For random unit x and random n-dim subspace L, the coefficient of the
    normalized projection along x must equal ``a = ||P_L x||`` and the
    remainder must be orthogonal to x, both to 1e-10. Draws with a < 1e-8
    (x essentially orthogonal to L) are excluded and redrawn.
    """
    rng = rng or np.random.default_rng(0)
    violations = 0
    done = 0
    max_dev = 0.0
    while done < trials:
        A = sample_complex_gaussian(rng, m, n)
        q, _ = np.linalg.qr(A)
        x = sample_complex_gaussian(rng, m, 1)[:, 0]
        x /= np.linalg.norm(x)
        coords = q.conj().T @ x
        a = float(np.linalg.norm(coords))
        if a < 1e-8:
            continue
        done += 1
        pn = (q @ coords) / a
        along = np.vdot(x, pn)
        remainder = pn - along * x
        dev = max(abs(along - a), abs(np.vdot(x, remainder)))
        max_dev = max(max_dev, float(dev))
        if dev > 1e-10:
            violations += 1
    return ProbeResult(
        probe="projection_direction",
        trials=trials,
        violations=violations,
        bound_rhs=0.0,
        empirical_rate=violations / trials,
        passed=violations == 0,
        details={"m": m, "n": n, "max_deviation": max_dev},
    )


def _squared_norms(rng: np.random.Generator, trials: int, m: int) -> np.ndarray:
    """||v||^2 for CN(0, I_m) rows, drawn honestly in chunks."""
    out = np.empty(trials)
    done = 0
    chunk = max(1, (1 << 22) // (2 * m))
    while done < trials:
        size = min(chunk, trials - done)
        g = rng.standard_normal((size, 2 * m))
        out[done : done + size] = 0.5 * np.sum(g * g, axis=1)
        done += size
    return out


def probe_norm_concentration(
    trials: int = 20_000,
    m_values: tuple[int, ...] = (64, 256, 1024),
    t_values: tuple[float, ...] = (0.2, 0.3),
    rng: np.random.Generator | None = None,
) -> ProbeResult:
    """Concentration of ||v||^2/m around 1 for v ~ CN(0, I_m).

    The claimed bound is exponential in m with unspecified constants, so
    the probe is directional: exceedance frequencies at fixed t must
    strictly decrease along increasing m (first t value), and the largest
    m must show an exceedance rate below 1e-3 at the last t value.
    """
    rng = rng or np.random.default_rng(0)
    m_values = tuple(sorted(m_values))
    rates = {}
    for m in m_values:
        stat = np.abs(_squared_norms(rng, trials, m) / m - 1.0)
        rates[m] = {t: float(np.mean(stat > t)) for t in t_values}
    t_chain, t_tail = t_values[0], t_values[-1]
    chain = [rates[m][t_chain] for m in m_values]
    # non-increasing in m, with a real decrease end to end (adjacent ties
    # happen at small trial counts once both rates are below resolution)
    chain_ok = all(a >= b for a, b in zip(chain, chain[1:])) and chain[0] > chain[-1]
    tail_rate = rates[m_values[-1]][t_tail]
    tail_ok = tail_rate < 1e-3
    return ProbeResult(
        probe="norm_concentration",
        trials=trials * len(m_values),
        violations=int(tail_rate * trials),
        bound_rhs=1e-3,
        empirical_rate=tail_rate,
        passed=chain_ok and tail_ok,
        details={
            "rates": {str(m): {str(t): r for t, r in d.items()} for m, d in rates.items()},
            "monotone_in_m": chain_ok,
        },
    )


def probe_order_statistic(
    trials: int = 20_000,
    r_values: tuple[float, ...] = (0.1, 0.2),
    m: int = 1024,
    rng: np.random.Generator | None = None,
) -> ProbeResult:
    """Count of small moduli: Pr(#{|x_i| <= r} >= 2 r^2 m) <= exp(-r^2 m / 3)."""
    rng = rng or np.random.default_rng(0)
    details = {}
    all_ok = True
    total_viol = 0
    worst_bound = 1.0
    done = 0
    counts = {r: np.empty(trials, dtype=np.int64) for r in r_values}
    chunk = max(1, (1 << 22) // (2 * m))
    while done < trials:
        size = min(chunk, trials - done)
        g = rng.standard_normal((size, 2 * m))
        mod_sq = 0.5 * (g[:, :m] ** 2 + g[:, m:] ** 2)
        for r in r_values:
            counts[r][done : done + size] = np.sum(mod_sq <= r * r, axis=1)
        done += size
    for r in r_values:
        threshold = 2.0 * r * r * m
        viol = int(np.sum(counts[r] >= threshold))
        bound = float(np.exp(-r * r * m / 3.0))
        ok = consistent_with_bound(viol, trials, bound)
        details[str(r)] = {
            "violations": viol,
            "rate": viol / trials,
            "bound": bound,
            "consistent": ok,
        }
        all_ok &= ok
        total_viol += viol
        worst_bound = min(worst_bound, bound)
    return ProbeResult(
        probe="count_below_radius",
        trials=trials,
        violations=total_viol,
        bound_rhs=worst_bound,
        empirical_rate=total_viol / (trials * len(r_values)),
        passed=all_ok,
        details=details,
    )


def probe_phase_perturbation_l1(
    trials: int = 200,
    m_values: tuple[int, ...] = (256, 1024),
    t_values: tuple[float, ...] = (0.02, 0.05, 0.1, 0.2, 0.5),
    rng: np.random.Generator | None = None,
) -> ProbeResult:
    """Averaged phase perturbation: smoke probe of the l1 bound.

    For x ~ CN(0, I/m) and a perturbation of norm t, the average
    ``(1/m) sum_i |phase(x_i + y_i) - phase(x_i)|`` is expected to be
    O(t log m) (in fact ~ pi * t for small t, since the per-entry ratio
    of moduli has mean pi/2). Checks that the statistic grows with t and
    stays below ``max(t, 1/m) * log m`` at every grid point.
    """
    rng = rng or np.random.default_rng(0)
    details = {}
    passed = True
    worst_ratio = 0.0
    for m in m_values:
        stats_t = []
        for t in t_values:
            acc = 0.0
            for _ in range(trials):
                x = sample_complex_gaussian(rng, m, 1, variance_per_entry=1.0 / m)[:, 0]
                y = sample_complex_gaussian(rng, m, 1)[:, 0]
                y *= t / np.linalg.norm(y)
                acc += float(np.mean(np.abs(phase_vec(x + y) - phase_vec(x))))
            stat = acc / trials
            stats_t.append(stat)
            bound = max(t, 1.0 / m) * np.log(m)
            worst_ratio = max(worst_ratio, stat / bound)
            if stat > bound:
                passed = False
        if not all(a < b for a, b in zip(stats_t, stats_t[1:])):
            passed = False
        details[str(m)] = {str(t): s for t, s in zip(t_values, stats_t)}
    return ProbeResult(
        probe="phase_perturbation_l1_average",
        trials=trials * len(m_values) * len(t_values),
        violations=0 if passed else 1,
        bound_rhs=1.0,
        empirical_rate=worst_ratio,
        passed=passed,
        details=details,
    )


_PROBES = (
    ("phase_perturbation_scalar", probe_phase_perturbation),
    ("unit_vector_perturbation", probe_unit_perturbation),
    ("small_ball", probe_small_ball),
    ("projection_direction", probe_projection_direction),
    ("norm_concentration", probe_norm_concentration),
    ("count_below_radius", probe_order_statistic),
    ("phase_perturbation_l1_average", probe_phase_perturbation_l1),
)


def run_all_probes(master_seed: int, trials_scale: float = 1.0) -> list[ProbeResult]:
    """Run the full battery, each probe on its own child stream.

    ``trials_scale`` shrinks or grows every probe's default trial count
    (floored at 100); sub-1.0 values weaken the statistical power and are
    meant for smoke runs only.
    """
    results = []
    for idx, (_, fn) in enumerate(_PROBES):
        rng = np.random.default_rng(spawn_seed(master_seed, _PROBE_STREAM_TAG, idx))
        if trials_scale == 1.0:
            results.append(fn(rng=rng))
        else:
            default = fn.__defaults__[0]
            results.append(fn(trials=max(100, int(default * trials_scale)), rng=rng))
    return results
