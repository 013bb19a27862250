"""Friedman test and Nemenyi post-hoc comparison over a cases x methods table.

Lower values are better: rank 1 goes to the smallest value in a row, tied
values share the average of their positions.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import rankdata

# Two-tailed Nemenyi critical values q_alpha (studentized range / sqrt 2),
# k = number of methods.
NEMENYI_Q = {
    0.05: {2: 1.960, 3: 2.343, 4: 2.569, 5: 2.728, 6: 2.850, 7: 2.949, 8: 3.031, 9: 3.102, 10: 3.164},
    0.10: {2: 1.645, 3: 2.052, 4: 2.291, 5: 2.459, 6: 2.589, 7: 2.693, 8: 2.780, 9: 2.855, 10: 2.920},
}


@dataclass(frozen=True)
class RankTable:
    ranks: np.ndarray  # (n cases, k methods)
    avg_ranks: np.ndarray  # (k,)

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def k(self) -> int:
        return self.ranks.shape[1]


def compute_ranks(values) -> RankTable:
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 2:
        raise ValueError("need a matrix with at least one row and two columns")
    if not np.all(np.isfinite(v)):
        raise ValueError("values must be finite")
    ranks = rankdata(v, method="average", axis=1)
    return RankTable(ranks, ranks.mean(axis=0))


def friedman_statistic(rt: RankTable) -> float:
    """Friedman statistic with the tie-aware denominator.

    ``n * sum_j (R_j - Rbar)^2`` divided by
    ``sum_ij (r_ij - Rbar)^2 / (n (k - 1))`` with ``Rbar = (k + 1) / 2``.
    Without ties this equals the textbook chi-square form.
    """
    n, k = rt.n, rt.k
    rbar = (k + 1) / 2.0
    between = n * np.sum((rt.avg_ranks - rbar) ** 2)
    within = np.sum((rt.ranks - rbar) ** 2) / (n * (k - 1))
    if within == 0:
        # every row fully tied: no evidence of any difference
        return 0.0
    return float(between / within)


def nemenyi_cd(k: int, n: int, q_alpha: float) -> float:
    """Critical difference ``q_alpha * sqrt(k (k + 1) / (6 n))``."""
    if k < 2 or n < 1 or q_alpha <= 0:
        raise ValueError("need k >= 2, n >= 1 and q_alpha > 0")
    return q_alpha * math.sqrt(k * (k + 1) / (6.0 * n))


def nemenyi_q(k: int, significance: float = 0.05) -> float:
    try:
        return NEMENYI_Q[significance][k]
    except KeyError:
        raise ValueError(f"no bundled Nemenyi value for k={k} at significance {significance} "
                         "(table covers k=2..10 at 0.05 and 0.10)") from None


@dataclass(frozen=True)
class SignificanceReport:
    methods: tuple[str, ...]
    ranks: RankTable
    statistic: float
    q_alpha: float
    cd: float
    significant: np.ndarray  # (k, k) bool: |AR_i - AR_j| > CD
    critical: float | None = None

    @property
    def rejects_null(self) -> bool | None:
        return None if self.critical is None else self.statistic > self.critical

    def pairs(self) -> list[tuple[str, str, float, bool]]:
        ar = self.ranks.avg_ranks
        out = []
        for i in range(len(self.methods)):
            for j in range(i + 1, len(self.methods)):
                out.append((self.methods[i], self.methods[j], abs(ar[i] - ar[j]), bool(self.significant[i, j])))
        return out

    def to_text(self) -> str:
        width = max(len(m) for m in self.methods)
        lines = [f"cases: {self.ranks.n}   methods: {self.ranks.k}", "", "average ranks:"]
        for m, r in zip(self.methods, self.ranks.avg_ranks):
            lines.append(f"  {m:<{width}}  {r:8.4f}")
        lines.append("")
        lines.append(f"Friedman statistic: {self.statistic:.4f}")
        if self.critical is not None:
            verdict = "rejected" if self.rejects_null else "not rejected"
            lines.append(f"critical value:     {self.critical:.4f}  (null hypothesis {verdict})")
        lines.append(f"Nemenyi CD:         {self.cd:.4f}  (q = {self.q_alpha})")
        if self.pairs():
            lines.append("")
            lines.append("pairwise |delta AR| vs CD:")
            for a, b, d, sig in self.pairs():
                lines.append(f"  {a:<{width}} vs {b:<{width}}  {d:7.4f}  {'significant' if sig else '-'}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# schema=1\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "a", "b", "value", "significant"])
        for m, r in zip(self.methods, self.ranks.avg_ranks):
            w.writerow(["avg_rank", m, "", repr(float(r)), ""])
        w.writerow(["friedman", "", "", repr(self.statistic), "" if self.critical is None else str(self.rejects_null).lower()])
        if self.critical is not None:
            w.writerow(["critical", "", "", repr(float(self.critical)), ""])
        w.writerow(["nemenyi_cd", "", "", repr(self.cd), ""])
        for a, b, d, sig in self.pairs():
            w.writerow(["pair", a, b, repr(float(d)), str(sig).lower()])
        return buf.getvalue()


def significance_report(values, method_names: Sequence[str], q_alpha: float,
                        critical: float | None = None) -> SignificanceReport:
    v = np.asarray(values, dtype=float)
    if v.ndim != 2 or v.shape[1] != len(method_names):
        raise ValueError("one column per method name is required")
    methods = tuple(method_names)
    k = len(methods)
    if k < 2:
        # nothing to compare
        rt = RankTable(np.ones((v.shape[0], k)), np.ones(k))
        return SignificanceReport(methods, rt, 0.0, q_alpha, 0.0, np.zeros((k, k), dtype=bool), critical)
    rt = compute_ranks(v)
    stat = friedman_statistic(rt) if rt.n >= 2 else 0.0
    cd = nemenyi_cd(k, rt.n, q_alpha)
    diff = np.abs(rt.avg_ranks[:, None] - rt.avg_ranks[None, :])
    return SignificanceReport(methods, rt, stat, q_alpha, cd, diff > cd, critical)
