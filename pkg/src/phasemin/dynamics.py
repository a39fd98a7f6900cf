"""Instrumentation of the iterate dynamics in an evolving orthonormal basis.

A ``CoefficientTrace`` attaches to a solve as its observer. Starting from
``u0 = Q z`` (the lifted truth, unit norm by construction), each new
iterate w^(k) contributes, via Gram-Schmidt, one new basis direction u_k,
and the trace records the coordinates ``c_i^(k) = <u_i, w^(k)>``. Late in
a run the iterates concentrate near span(u0) and stop producing
numerically independent directions; the basis then saturates, which is
flagged and tolerated (coefficients keep being recorded on the frozen
basis).

``verify_coefficient_recursion`` replays the one-step coefficient
recursion

    ct_i^(k+1) = <u_i, (sum_j c_j^(k) u_j) (*) y>,   0 <= i <= k
    ct_{k+1}^(k+1) = || P_L[ (w (*) y) - sum_{i<=k} ct_i u_i ] ||

from the recorded coefficients alone and compares against the same
quantities recovered from the actual next iterate, along with the energy
budget ``sum |ct_i|^2 <= ||y||^2 = 1`` and the head-tail bound
``0 <= ct_{k+1} <= sqrt(1 - sum_{i<=k} |ct_i|^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DegenerateDirectionError, OrthonormalBasis, odot, orthogonalize_against
from .expectations import CERTIFIED_ALIGNED_GAIN
from .sensing import SensingInstance

__all__ = [
    "basis_depth",
    "TraceRow",
    "CoefficientTrace",
    "RecursionCheck",
    "verify_coefficient_recursion",
    "tail_coefficient_stats",
    "first_crossing",
]


def basis_depth(n: int, m: int, gain_floor: float = CERTIFIED_ALIGNED_GAIN) -> int:
    """Default instrumentation depth d, logarithmic in n.

    ``d = ceil((1 / (2 log((gain+3)/4)) + 1) * log n)`` where ``gain`` is
    the certified floor of the aligned gain on the basin: the depth at
    which per-iteration growth by ``(gain+3)/4`` lifts the initial
    correlation scale ``1/(2 sqrt(n log n))`` above the basin threshold.
    Capped at ``m - 1`` (the basis lives in C^m alongside u0).
    """
    if gain_floor <= 1.0:
        raise ValueError("gain_floor must exceed 1")
    growth = (gain_floor + 3.0) / 4.0
    cd = 1.0 / (2.0 * math.log(growth)) + 1.0
    return max(1, min(math.ceil(cd * math.log(n)), m - 1))


@dataclass(frozen=True)
class TraceRow:
    """Coordinates of w^(k) on the recorded basis plus the off-basis rest."""

    k: int
    coeffs: np.ndarray = field(repr=False)
    residual: float


class CoefficientTrace:
    """Grows the u-basis alongside a solve and records coefficients.

    Pass ``trace.observe`` as the ``observer`` argument of ``solve``.
    Iterates are kept (for recursion verification) while the basis is
    still growing, plus one extra after saturation.
    """

    def __init__(
        self,
        inst: SensingInstance,
        depth: int | None = None,
        keep_iterates: bool = True,
    ):
        self.n = inst.n
        self.m = inst.m
        self.y = inst.y
        self.depth = basis_depth(inst.n, inst.m) if depth is None else int(depth)
        if not 1 <= self.depth < inst.m:
            raise ValueError(f"depth must lie in [1, m), got {self.depth}")
        # column buffer grows in place (doubling); a fresh append per
        # iterate would copy the whole basis every iteration
        self._cols = np.zeros((inst.m, 8), dtype=np.complex128, order="F")
        self._cols[:, 0] = inst.lifted_truth
        self._count = 1
        self.rows: list[TraceRow] = []
        self.iterates: dict[int, np.ndarray] = {}
        self.saturated = False
        self._keep_iterates = keep_iterates
        self._kept_after_saturation = 0

    @property
    def basis(self) -> OrthonormalBasis:
        """The recorded u-basis (snapshot copy)."""
        return OrthonormalBasis(self._cols[:, : self._count])

    def _append(self, v: np.ndarray) -> None:
        r, rn = orthogonalize_against(self._cols[:, : self._count], v)
        if self._count == self._cols.shape[1]:
            grown = np.zeros(
                (self.m, min(2 * self._count, self.depth + 1)),
                dtype=np.complex128,
                order="F",
            )
            grown[:, : self._count] = self._cols[:, : self._count]
            self._cols = grown
        self._cols[:, self._count] = r / rn
        self._count += 1

    def observe(self, k: int, w: np.ndarray) -> None:
        """Record iterate w^(k); grows the basis while k <= depth."""
        if self.rows and k != self.rows[-1].k + 1:
            raise ValueError(f"iterates must be observed consecutively, got k={k}")
        if not self.saturated and self._count <= min(k, self.depth):
            try:
                self._append(w)
            except DegenerateDirectionError:
                self.saturated = True
        cols = self._cols[:, : self._count]
        coeffs = cols.conj().T @ w
        residual = float(np.linalg.norm(w - cols @ coeffs))
        self.rows.append(TraceRow(k=k, coeffs=coeffs, residual=residual))
        if self._keep_iterates:
            if not self.saturated:
                self.iterates[k] = np.array(w)
            elif self._kept_after_saturation < 1:
                self.iterates[k] = np.array(w)
                self._kept_after_saturation += 1

    @property
    def growth_ratios(self) -> np.ndarray:
        """|c0^(k+1)| / |c0^(k)| over consecutive recorded iterates."""
        c0 = np.array([abs(row.coeffs[0]) for row in self.rows])
        if len(c0) < 2:
            return np.empty(0)
        return c0[1:] / c0[:-1]

    @property
    def correlation(self) -> np.ndarray:
        return np.array([abs(row.coeffs[0]) for row in self.rows])

    def csv_rows(self, trial: int) -> list[tuple]:
        """(trial, k, i, re(c), im(c), |c|) rows, one per coefficient."""
        out = []
        for row in self.rows:
            for i, c in enumerate(row.coeffs):
                out.append((trial, row.k, i, c.real, c.imag, abs(c)))
        return out


@dataclass(frozen=True)
class RecursionCheck:
    """Worst-case outcomes of replaying the coefficient recursion."""

    ks_checked: list[int]
    max_discrepancy: float
    min_bound_slack: float
    max_energy: float

    def to_dict(self) -> dict:
        return {
            "ks_checked": [int(k) for k in self.ks_checked],
            "max_discrepancy": float(self.max_discrepancy),
            "min_bound_slack": float(self.min_bound_slack),
            "max_energy": float(self.max_energy),
        }


def verify_coefficient_recursion(
    inst: SensingInstance, trace: CoefficientTrace, k_max: int | None = None
) -> RecursionCheck:
    """Compare the coefficient recursion against the actual iterates.

    For each transition k -> k+1 with stored iterates and a basis covering
    u_0..u_k, computes the predicted coefficients two independent ways:
    from the recorded coordinates via the recursion formula, and from the
    actual next iterate rescaled by the projection norm. Reports the
    worst absolute discrepancy, the minimum slack of the head-tail bound
    ``ct_{k+1} <= sqrt(1 - sum_{i<=k} |ct_i|^2)``, and the maximum total
    energy ``sum_{i<=k+1} |ct_i|^2`` (must stay <= 1).
    """
    Q = inst.basis.columns
    U = trace.basis.columns
    count = U.shape[1]
    rows_by_k = {row.k: row for row in trace.rows}
    ks = sorted(
        k
        for k in trace.iterates
        if k + 1 in trace.iterates
        and k in rows_by_k
        and k + 1 in rows_by_k
        and count >= k + 1
        and (k_max is None or k <= k_max)
    )
    max_disc = 0.0
    min_slack = np.inf
    max_energy = 0.0
    for k in ks:
        head = U[:, : k + 1]
        ck = rows_by_k[k].coeffs[: k + 1]
        w_hat = head @ ck
        s_hat = odot(w_hat, trace.y)
        ct = head.conj().T @ s_hat
        ct_next = float(np.linalg.norm(Q.conj().T @ (s_hat - head @ ct)))

        s_act = odot(trace.iterates[k], trace.y)
        proj_norm = float(np.linalg.norm(Q.conj().T @ s_act))
        ct_direct = (head.conj().T @ trace.iterates[k + 1]) * proj_norm

        max_disc = max(max_disc, float(np.max(np.abs(ct - ct_direct))))
        head_energy = float(np.sum(np.abs(ct) ** 2))
        slack = math.sqrt(max(1.0 - head_energy, 0.0)) - ct_next
        min_slack = min(min_slack, slack)
        max_energy = max(max_energy, head_energy + ct_next**2)
    return RecursionCheck(
        ks_checked=ks,
        max_discrepancy=max_disc,
        min_bound_slack=float(min_slack) if ks else 0.0,
        max_energy=max_energy,
    )


def tail_coefficient_stats(traces: list[CoefficientTrace]) -> dict:
    """Distribution of the late-coefficient maxima, scaled by sqrt(m/n).

    For every recorded iterate with index k >= 2, takes
    ``max_{2 <= j} |c_j^(k)|`` and scales by ``sqrt(m/n)``; the scaled
    statistic should have bounded quantiles independent of m at fixed n.
    Also returns the unscaled mean square for scaling regressions.
    """
    scaled = []
    raw_sq = []
    for trace in traces:
        factor = math.sqrt(trace.m / trace.n)
        for row in trace.rows:
            if row.k >= 2 and len(row.coeffs) >= 3:
                s = float(np.max(np.abs(row.coeffs[2:])))
                scaled.append(s * factor)
                raw_sq.append(s * s)
    if not scaled:
        return {"count": 0}
    arr = np.asarray(scaled)
    return {
        "count": len(arr),
        "q50": float(np.quantile(arr, 0.50)),
        "q90": float(np.quantile(arr, 0.90)),
        "q99": float(np.quantile(arr, 0.99)),
        "max": float(arr.max()),
        "mean_raw_sq": float(np.mean(raw_sq)),
    }


def first_crossing(values, threshold: float) -> int | None:
    """1-based index of the first entry exceeding ``threshold``, or None."""
    for i, v in enumerate(values):
        if v > threshold:
            return i + 1
    return None
