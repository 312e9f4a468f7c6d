"""Nonparametric comparison battery and critical-difference diagrams.

Implements the tests used by the benchmark reports: two-sided Wilcoxon
signed-rank (exact enumeration up to n = 25, normal approximation with
continuity and tie corrections beyond), the wins/ties sign-test critical
value, the Friedman rank test with tie correction, the Nemenyi critical
difference, and the paired t-test. Distribution tails come from
``scipy.special``; everything else is implemented here.

Because Friedman p-values on large benchmarks underflow double precision,
every report also carries ``log10_p`` computed through an asymptotic tail
expansion, so magnitudes remain comparable after underflow.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import chdtrc, gammaln, ndtr, ndtri, stdtr

from .errors import ContractError


def midranks(values) -> np.ndarray:
    """1-based ranks with ties averaged."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class TestReport:
    """Outcome of one statistical test.

    ``p_value`` is None for the sign test, which is a critical-value rule
    rather than a p-value test; ``critical_value`` then carries the
    threshold the statistic is compared against.
    """

    method: str
    statistic: float
    p_value: float | None
    alpha: float
    reject: bool
    critical_value: float | None = None
    log10_p: float | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "reject": self.reject,
            "critical_value": self.critical_value,
            "log10_p": self.log10_p,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass(frozen=True)
class RankTable:
    """Per-block scores and ranks for k methods; rank 1 is best (highest score)."""

    methods: tuple[str, ...]
    blocks: tuple[str, ...]
    scores: np.ndarray
    ranks: np.ndarray = field(init=False)

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.shape != (len(self.blocks), len(self.methods)):
            raise ContractError(
                f"score matrix {scores.shape} does not match "
                f"{len(self.blocks)} blocks x {len(self.methods)} methods"
            )
        ranks = np.vstack([midranks(-row) for row in scores])
        scores.setflags(write=False)
        ranks.setflags(write=False)
        object.__setattr__(self, "scores", scores)
        object.__setattr__(self, "ranks", ranks)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def n_methods(self) -> int:
        return len(self.methods)

    @property
    def average_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=0)


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank

_WILCOXON_EXACT_LIMIT = 25


def _signed_rank_parts(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ContractError("paired samples must be 1-D and equal length")
    diffs = a - b
    diffs = diffs[diffs != 0.0]
    return diffs


def _exact_signed_rank_cdf(doubled_ranks: np.ndarray, w_doubled: int) -> float:
    """P(W <= w) under the null, by counting sign assignments.

    Ranks arrive doubled so midranks become integers; the distribution of
    the positive-rank sum is built by convolving one {0, r} term per pair.
    """
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    top = 0
    for r in doubled_ranks.astype(np.int64):
        new_top = top + r
        shifted = np.zeros(new_top + 1, dtype=np.float64)
        shifted[:top + 1] = counts[:top + 1]
        shifted[r:new_top + 1] += counts[:top + 1]
        counts = shifted
        top = new_top
    n = doubled_ranks.size
    return float(counts[: min(w_doubled, total) + 1].sum() / (2.0 ** n))


def wilcoxon_signed_rank(a, b, alpha: float = 0.10, method: str = "auto") -> TestReport:
    """Two-sided test on paired differences.

    Zero differences are dropped; tied absolute differences share averaged
    ranks. With 25 or fewer informative pairs the p-value is exact
    (2 * P(W <= min(W+, W-)), capped at 1); beyond that a normal
    approximation with continuity correction and the usual tie adjustment
    to the variance is used. ``method`` forces one mode ("exact" or
    "normal") instead of the size-based default.
    """
    if method not in ("auto", "exact", "normal"):
        raise ContractError(f"unknown method {method!r}")
    diffs = _signed_rank_parts(a, b)
    n = diffs.size
    if n == 0:
        return TestReport(
            method="wilcoxon", statistic=0.0, p_value=1.0, alpha=alpha,
            reject=False, log10_p=0.0,
        )
    if n < 6:
        raise ContractError(
            f"wilcoxon needs at least 6 nonzero differences, got {n}"
        )
    ranks = midranks(np.abs(diffs))
    w_plus = float(ranks[diffs > 0].sum())
    w_minus = float(ranks[diffs < 0].sum())
    w = min(w_plus, w_minus)

    exact = method == "exact" or (method == "auto" and n <= _WILCOXON_EXACT_LIMIT)
    if exact:
        doubled = np.rint(2.0 * ranks)
        p = min(1.0, 2.0 * _exact_signed_rank_cdf(doubled, int(round(2.0 * w))))
    else:
        mean = n * (n + 1) / 4.0
        _, tie_counts = np.unique(ranks, return_counts=True)
        tie_term = float(((tie_counts**3 - tie_counts).sum())) / 48.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
        z = (w - mean + 0.5) / math.sqrt(var)
        p = min(1.0, 2.0 * float(ndtr(z)))
    return TestReport(
        method="wilcoxon", statistic=w, p_value=p, alpha=alpha,
        reject=p < alpha, log10_p=math.log10(p) if p > 0 else -math.inf,
    )


# ---------------------------------------------------------------------------
# Sign test (critical-value rule)

# Conventional normal critical values at the standard levels; the published
# thresholds for 40 experiments (24.05 / 25.20 / 27.37) are reproduced by
# these table constants, not by the full-precision quantiles.
_Z_TABLE = {0.10: 1.28, 0.05: 1.645, 0.01: 2.33}


def sign_test_critical(n_exp: int, alpha: float) -> float:
    """Minimum wins + ties/2 needed to call one method better than another."""
    if n_exp < 1:
        raise ContractError("need at least one experiment")
    if not 0.0 < alpha < 0.5:
        raise ContractError("alpha must lie in (0, 0.5)")
    z = _Z_TABLE.get(round(alpha, 4), None)
    if z is None:
        z = float(ndtri(1.0 - alpha))
    return n_exp / 2.0 + z * math.sqrt(n_exp) / 2.0


def sign_test(wins: int, ties: int, losses: int, alpha: float = 0.10) -> TestReport:
    """Wins-plus-half-ties rule at level alpha."""
    n_exp = wins + ties + losses
    stat = wins + ties / 2.0
    crit = sign_test_critical(n_exp, alpha)
    return TestReport(
        method="sign", statistic=stat, p_value=None, alpha=alpha,
        reject=stat >= crit, critical_value=crit,
    )


# ---------------------------------------------------------------------------
# Friedman test

def _log10_chi2_sf(x: float, df: int) -> float:
    """log10 of the chi-square upper tail, stable far past underflow."""
    sf = float(chdtrc(df, x))
    if sf > 0.0:
        return math.log10(sf)
    # Asymptotic series for the regularized upper incomplete gamma,
    # Q(s, z) ~ z^(s-1) e^(-z) / Gamma(s) * sum_j prod_i (s-i) / z^j.
    s = df / 2.0
    z = x / 2.0
    series = 1.0
    term = 1.0
    for j in range(1, 12):
        term *= (s - j) / z
        series += term
    log_q = (s - 1.0) * math.log(z) - z - float(gammaln(s)) + math.log(max(series, 1e-300))
    return log_q / math.log(10.0)


def friedman(table: RankTable, alpha: float = 0.05) -> TestReport:
    """Rank-based test that the methods perform identically across blocks.

    Uses the classic statistic with the tie-correction divisor
    ``1 - sum(t^3 - t) / (N k (k^2 - 1))``; identical scores in every block
    degenerate to p = 1.
    """
    n, k = table.n_blocks, table.n_methods
    if n < 2 or k < 2:
        raise ContractError("friedman needs at least 2 blocks and 2 methods")
    avg = table.average_ranks
    stat = 12.0 * n / (k * (k + 1)) * float((avg**2).sum() - k * (k + 1) ** 2 / 4.0)

    ties = 0.0
    for row in table.ranks:
        _, counts = np.unique(row, return_counts=True)
        ties += float((counts**3 - counts).sum())
    correction = 1.0 - ties / (n * k * (k**2 - 1))
    if correction <= 0.0:
        return TestReport(
            method="friedman", statistic=0.0, p_value=1.0, alpha=alpha,
            reject=False, log10_p=0.0,
        )
    stat /= correction
    p = float(chdtrc(k - 1, stat))
    return TestReport(
        method="friedman", statistic=stat, p_value=p, alpha=alpha,
        reject=p < alpha, log10_p=_log10_chi2_sf(stat, k - 1),
    )


# ---------------------------------------------------------------------------
# Nemenyi critical difference

# Two-tailed studentized range quantiles at infinite degrees of freedom,
# divided by sqrt(2); rows are k = 2..20.
_Q_ALPHA = {
    0.05: (
        1.959964, 2.343701, 2.569032, 2.727774, 2.849705, 2.948320,
        3.030878, 3.101730, 3.163684, 3.218654, 3.268004, 3.312739,
        3.353618, 3.391230, 3.426041, 3.458425, 3.488685, 3.517073,
        3.543799,
    ),
    0.10: (
        1.644854, 2.052293, 2.291341, 2.459516, 2.588521, 2.692732,
        2.779884, 2.854606, 2.919889, 2.977768, 3.029694, 3.076733,
        3.119693, 3.159199, 3.195743, 3.229723, 3.261461, 3.291224,
        3.319233,
    ),
}


def nemenyi_cd(k: int, n_blocks: int, alpha: float = 0.10) -> float:
    """Minimum average-rank gap for a significant pairwise difference."""
    key = round(alpha, 4)
    if key not in _Q_ALPHA:
        raise ContractError(f"alpha {alpha} not tabulated; use 0.05 or 0.10")
    if not 2 <= k <= 20:
        raise ContractError(f"k={k} outside the tabulated range 2..20")
    if n_blocks < 1:
        raise ContractError("need at least one block")
    q = _Q_ALPHA[key][k - 2]
    return q * math.sqrt(k * (k + 1) / (6.0 * n_blocks))


# ---------------------------------------------------------------------------
# Paired t-test

def paired_t_test(a, b, alpha: float = 0.05) -> TestReport:
    """Two-sided paired t; degenerates to p = 1 on zero difference variance."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ContractError("paired t-test needs equal-length 1-D samples, n >= 2")
    d = a - b
    n = d.size
    sd = float(d.std(ddof=1))
    if sd == 0.0:
        return TestReport(
            method="paired_t", statistic=0.0, p_value=1.0, alpha=alpha,
            reject=False, log10_p=0.0,
        )
    t = float(d.mean()) / (sd / math.sqrt(n))
    p = 2.0 * float(stdtr(n - 1, -abs(t)))
    return TestReport(
        method="paired_t", statistic=t, p_value=p, alpha=alpha,
        reject=p < alpha, log10_p=math.log10(p) if p > 0 else -math.inf,
    )


# ---------------------------------------------------------------------------
# Critical-difference diagram

def rank_cliques(average_ranks, cd: float) -> list[tuple[int, ...]]:
    """Maximal groups of methods whose average ranks all lie within cd."""
    ranks = np.asarray(average_ranks, dtype=np.float64)
    order = np.argsort(ranks, kind="stable")
    groups: list[tuple[int, ...]] = []
    for start in range(order.size):
        end = start
        while end + 1 < order.size and ranks[order[end + 1]] - ranks[order[start]] <= cd:
            end += 1
        if end > start:
            groups.append(tuple(int(i) for i in order[start : end + 1]))
    # Keep only maximal groups (drop those contained in a longer one).
    maximal = [
        g for g in groups
        if not any(set(g) < set(h) for h in groups if h != g)
    ]
    out = []
    for g in maximal:
        if g not in out:
            out.append(g)
    return out


def cd_diagram_text(names, average_ranks, cd: float, width: int = 72) -> str:
    """Plain-text rendering: one line per method plus clique markers."""
    names = list(names)
    ranks = np.asarray(average_ranks, dtype=np.float64)
    if len(names) != ranks.size:
        raise ContractError("names and ranks must align")
    k = len(names)
    lo, hi = 1.0, float(k)
    span = max(hi - lo, 1e-9)

    def col(rank: float) -> int:
        return int(round((rank - lo) / span * (width - 1)))

    lines = [f"critical difference = {cd:.4f} (rank axis {lo:.0f}..{hi:.0f})"]
    axis = ["-"] * width
    for r in ranks:
        axis[col(r)] = "+"
    lines.append("".join(axis))
    for i in np.argsort(ranks, kind="stable"):
        marker = " " * col(ranks[i]) + "^"
        lines.append(f"{marker}  {names[i]} ({ranks[i]:.4f})")
    for gi, group in enumerate(rank_cliques(ranks, cd), start=1):
        members = ", ".join(names[i] for i in sorted(group, key=lambda i: ranks[i]))
        lines.append(f"group {gi}: {members}")
    return "\n".join(lines) + "\n"


def cd_diagram_svg(names, average_ranks, cd: float) -> str:
    """Deterministic SVG 1.1 rendering of the critical-difference diagram."""
    names = list(names)
    ranks = np.asarray(average_ranks, dtype=np.float64)
    if len(names) != ranks.size:
        raise ContractError("names and ranks must align")
    k = len(names)
    lo, hi = 1.0, float(k)
    span = max(hi - lo, 1e-9)

    width, margin = 640.0, 60.0
    axis_y = 60.0
    scale = (width - 2 * margin) / span

    def x(rank: float) -> float:
        return margin + (rank - lo) * scale

    order = np.argsort(ranks, kind="stable")
    cliques = rank_cliques(ranks, cd)
    clique_gap = 14.0
    label_gap = 18.0
    labels_top = axis_y + 24.0 + len(cliques) * clique_gap
    height = labels_top + k * label_gap + 30.0

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.0f}" height="{height:.0f}" '
        f'font-family="monospace" font-size="11">',
        f'<line x1="{margin:.2f}" y1="{axis_y:.2f}" x2="{width - margin:.2f}" '
        f'y2="{axis_y:.2f}" stroke="black" stroke-width="1"/>',
    ]
    for tick in range(1, k + 1):
        tx = x(float(tick))
        parts.append(
            f'<line x1="{tx:.2f}" y1="{axis_y - 4:.2f}" x2="{tx:.2f}" '
            f'y2="{axis_y + 4:.2f}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{tx:.2f}" y="{axis_y - 8:.2f}" text-anchor="middle">{tick}</text>'
        )
    # CD scale bar, anchored at rank 1.
    bar_y = axis_y - 34.0
    parts.append(
        f'<line x1="{x(lo):.2f}" y1="{bar_y:.2f}" x2="{x(lo + cd):.2f}" '
        f'y2="{bar_y:.2f}" stroke="black" stroke-width="2"/>'
    )
    parts.append(
        f'<text x="{x(lo):.2f}" y="{bar_y - 6:.2f}">CD = {cd:.4f}</text>'
    )
    for row, group in enumerate(cliques):
        gy = axis_y + 14.0 + row * clique_gap
        g_lo = min(ranks[i] for i in group)
        g_hi = max(ranks[i] for i in group)
        parts.append(
            f'<line x1="{x(g_lo):.2f}" y1="{gy:.2f}" x2="{x(g_hi):.2f}" '
            f'y2="{gy:.2f}" stroke="black" stroke-width="3"/>'
        )
    for slot, i in enumerate(order):
        ly = labels_top + slot * label_gap
        lx = x(ranks[i])
        parts.append(
            f'<line x1="{lx:.2f}" y1="{axis_y:.2f}" x2="{lx:.2f}" '
            f'y2="{ly - 10:.2f}" stroke="gray" stroke-width="0.5"/>'
        )
        parts.append(
            f'<text x="{lx:.2f}" y="{ly:.2f}" text-anchor="middle">'
            f"{names[i]} ({ranks[i]:.4f})</text>"
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
