"""The analysis battery: chi-squared with Yates correction, BH-FDR,
paired t, GEE logistic odds ratios, a random-intercept linear mixed
model, keyword/consensus metrics, and reader-profile classification.

All routines are pure functions over immutable observation sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AnalysisError
from .special import chi2_sf_1df, normal_two_sided, student_t_two_sided


@dataclass(frozen=True)
class ContingencyTable2x2:
    """Rows: styled / non-styled; columns: correct / incorrect."""

    a: int  # styled, correct
    b: int  # styled, incorrect
    c: int  # non-styled, correct
    d: int  # non-styled, incorrect

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise AnalysisError("contingency counts must be non-negative")
        if self.n == 0:
            raise AnalysisError("empty contingency table")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: float
    p: float | None
    effect: float  # delta in percentage points, or an odds ratio
    q: float | None = None
    flags: frozenset[str] = frozenset()


def chi2_yates(t: ContingencyTable2x2) -> TestResult:
    """2x2 chi-squared with Yates continuity correction, 1 df.

    Effect is the styled-minus-non-styled accuracy difference in
    percentage points.  Flags ``small-expected-count`` when any expected
    cell is below 5.
    """
    r1, r2 = t.a + t.b, t.c + t.d
    c1, c2 = t.a + t.c, t.b + t.d
    if r1 == 0 or r2 == 0 or c1 == 0 or c2 == 0:
        raise AnalysisError("chi-squared undefined with a zero marginal")
    n = t.n
    num = n * max(abs(t.a * t.d - t.b * t.c) - n / 2.0, 0.0) ** 2
    stat = num / (r1 * r2 * c1 * c2)
    flags = set()
    for row in (r1, r2):
        for col in (c1, c2):
            if row * col / n < 5:
                flags.add("small-expected-count")
    effect = 100.0 * (t.a / r1 - t.c / r2)
    return TestResult(stat, 1.0, chi2_sf_1df(stat), effect, flags=frozenset(flags))


def bh_fdr(p_values: list[float], m: int | None = None) -> list[float]:
    """Benjamini-Hochberg adjusted p-values (q-values), original order.

    q(i) = min over j >= i of p(j) * m / j after ascending sort, clipped
    to 1.
    """
    for p in p_values:
        if not 0.0 <= p <= 1.0:
            raise AnalysisError(f"p-value {p} outside [0, 1]")
    if m is None:
        m = len(p_values)
    if m < len(p_values):
        raise AnalysisError(f"family size m={m} smaller than {len(p_values)} p-values")
    order = sorted(range(len(p_values)), key=lambda i: p_values[i])
    q = [0.0] * len(p_values)
    running = 1.0
    for rank in range(len(order), 0, -1):
        idx = order[rank - 1]
        running = min(running, p_values[idx] * m / rank)
        q[idx] = running
    return q


def paired_t(differences: list[float]) -> TestResult:
    """One-sample t test on paired differences, two-sided p.

    Effect is the mean difference.  Raises on n < 2 or zero variance.
    """
    n = len(differences)
    if n < 2:
        raise AnalysisError(f"paired t needs at least 2 differences, got {n}")
    mean = sum(differences) / n
    ss = sum((d - mean) ** 2 for d in differences)
    if ss == 0.0:
        if mean == 0.0:
            # all differences identical at zero: no effect, no evidence
            return TestResult(0.0, n - 1, 1.0, 0.0)
        raise AnalysisError("zero variance in paired differences; t undefined")
    sd = math.sqrt(ss / (n - 1))
    t = mean * math.sqrt(n) / sd
    return TestResult(t, n - 1, student_t_two_sided(t, n - 1), mean)


# ---------------------------------------------------------------------------
# GEE logistic regression (population-averaged, clustered by participant)


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def gee_logistic(
    responses: list[list[tuple[int, int]]],
    corr: str = "exchangeable",
    max_iter: int = 100,
    tol: float = 1e-10,
) -> TestResult:
    """Odds of a correct answer, styled vs non-styled.

    ``responses``: per participant, a list of (condition, correct) pairs
    with condition 1 for styled.  Fits logit(P(correct)) = b0 + b1 *
    condition with the participant as the cluster and robust (sandwich)
    standard errors; effect is OR = exp(b1).

    Complete separation (0% or 100% pooled accuracy in either condition)
    is flagged and reported as OR = 0 or inf with no finite p.
    """
    if corr not in ("exchangeable", "independence"):
        raise AnalysisError(f"unknown working correlation {corr!r}")
    clusters = [c for c in responses if c]
    if len(clusters) < 2:
        raise AnalysisError("GEE needs at least 2 participants")
    flat = [obs for c in clusters for obs in c]
    conds = {cond for cond, _ in flat}
    if conds != {0, 1}:
        raise AnalysisError("GEE needs observations in both conditions")

    by_cond = {0: [0, 0], 1: [0, 0]}  # condition -> [correct, total]
    for cond, correct in flat:
        by_cond[cond][0] += int(bool(correct))
        by_cond[cond][1] += 1
    p1 = by_cond[1][0] / by_cond[1][1]
    p0 = by_cond[0][0] / by_cond[0][1]
    if p1 in (0.0, 1.0) or p0 in (0.0, 1.0):
        num = p1 / (1 - p1) if p1 < 1 else math.inf
        den = p0 / (1 - p0) if p0 < 1 else math.inf
        if num == 0.0 or den == math.inf:
            odds_ratio = 0.0
        else:
            odds_ratio = math.inf
        return TestResult(
            math.nan, 1.0, None, odds_ratio, flags=frozenset({"separation"})
        )

    xs = [np.column_stack([np.ones(len(c)), [cond for cond, _ in c]]) for c in clusters]
    ys = [np.array([float(bool(corr_)) for _, corr_ in c]) for c in clusters]

    beta = np.array(
        [math.log(p0 / (1 - p0)), math.log(p1 / (1 - p1)) - math.log(p0 / (1 - p0))]
    )
    alpha = 0.0
    for _ in range(max_iter):
        # working-correlation estimate from Pearson residuals
        if corr == "exchangeable":
            num = 0.0
            npairs = 0
            for X, y in zip(xs, ys):
                mu = _logistic(X @ beta)
                e = (y - mu) / np.sqrt(mu * (1 - mu))
                s = e.sum()
                num += (s * s - (e * e).sum()) / 2.0
                n_i = len(y)
                npairs += n_i * (n_i - 1) // 2
            alpha = num / max(npairs - 2, 1)
            alpha = min(max(alpha, -0.95), 0.95)

        bread = np.zeros((2, 2))
        score = np.zeros(2)
        for X, y in zip(xs, ys):
            mu = _logistic(X @ beta)
            var = mu * (1 - mu)
            a_sqrt = np.sqrt(var)
            n_i = len(y)
            R = np.full((n_i, n_i), alpha)
            np.fill_diagonal(R, 1.0)
            V = (a_sqrt[:, None] * R * a_sqrt[None, :])
            Vinv = np.linalg.inv(V)
            D = var[:, None] * X  # d mu / d beta
            bread += D.T @ Vinv @ D
            score += D.T @ Vinv @ (y - mu)
        step = np.linalg.solve(bread, score)
        beta = beta + step
        if float(np.abs(step).max()) < tol:
            break

    # robust sandwich covariance
    meat = np.zeros((2, 2))
    bread = np.zeros((2, 2))
    for X, y in zip(xs, ys):
        mu = _logistic(X @ beta)
        var = mu * (1 - mu)
        a_sqrt = np.sqrt(var)
        n_i = len(y)
        R = np.full((n_i, n_i), alpha)
        np.fill_diagonal(R, 1.0)
        Vinv = np.linalg.inv(a_sqrt[:, None] * R * a_sqrt[None, :])
        D = var[:, None] * X
        bread += D.T @ Vinv @ D
        u = D.T @ Vinv @ (y - mu)
        meat += np.outer(u, u)
    bread_inv = np.linalg.inv(bread)
    cov = bread_inv @ meat @ bread_inv
    se = math.sqrt(max(cov[1, 1], 0.0))
    z = beta[1] / se if se > 0 else math.inf
    return TestResult(z, 1.0, normal_two_sided(z), math.exp(beta[1]))


# ---------------------------------------------------------------------------
# Random-intercept linear mixed model, EM to REML stationarity


@dataclass(frozen=True)
class LmmResult:
    beta0: float
    beta1: float  # fixed styled-condition effect
    sigma_u2: float  # between-participant variance
    sigma_e2: float  # residual variance
    p: float  # Wald, normal approximation (no Satterthwaite df)
    loglik: float  # REML log-likelihood (up to a constant)
    n_iter: int
    converged: bool


def lmm_random_intercept(
    observations: list[list[tuple[int, float]]],
    max_iter: int = 5000,
    tol: float = 1e-8,
) -> LmmResult:
    """Fit y = b0 + b1*condition + u_participant + e by EM-REML.

    ``observations``: per participant, (condition, y) pairs.  Iterates
    EM updates of the two variance components until the REML
    log-likelihood moves by less than ``tol``.
    """
    clusters = [c for c in observations if c]
    if len(clusters) < 2:
        raise AnalysisError("mixed model needs at least 2 participants")
    if any(len(c) < 2 for c in clusters):
        raise AnalysisError("mixed model needs >= 2 observations per participant")
    xs = [np.column_stack([np.ones(len(c)), [cond for cond, _ in c]]) for c in clusters]
    ys = [np.array([y for _, y in c]) for c in clusters]
    all_cond = np.concatenate([X[:, 1] for X in xs])
    if np.ptp(all_cond) == 0:
        raise AnalysisError("degenerate design: condition never varies")
    n_total = sum(len(y) for y in ys)
    q = len(clusters)

    y_var = float(np.var(np.concatenate(ys)))
    if y_var == 0.0:
        beta = _gls_beta(xs, ys, 0.0, 1.0)[0]
        return LmmResult(beta[0], beta[1], 0.0, 0.0, 1.0, 0.0, 0, True)
    sigma_u2, sigma_e2 = _moment_start(xs, ys, y_var)
    stacked = _stacked(xs, ys)

    prev_ll = -math.inf
    converged = False
    it = 0
    trail: list[tuple[float, float]] = []
    for it in range(1, max_iter + 1):
        beta, a_inv, ll, parts = _reml_pass_stacked(stacked, sigma_u2, sigma_e2)
        sum_zvr2, tr_zpz, sum_vr2, tr_p = parts
        new_u2 = max(sigma_u2 + (sigma_u2**2 / q) * (sum_zvr2 - tr_zpz), 1e-12)
        new_e2 = max(sigma_e2 + (sigma_e2**2 / n_total) * (sum_vr2 - tr_p), 1e-12)
        step = max(abs(new_u2 - sigma_u2), abs(new_e2 - sigma_e2))
        sigma_u2, sigma_e2 = new_u2, new_e2
        if abs(ll - prev_ll) < tol and step < tol * max(y_var, 1.0):
            converged = True
            break
        prev_ll = ll
        # EM converges linearly; periodically try an Aitken-extrapolated
        # jump and keep it only when it does not lower the criterion
        trail.append((sigma_u2, sigma_e2))
        if len(trail) >= 3 and it % 3 == 0:
            acc = [_aitken(trail[-3][k], trail[-2][k], trail[-1][k]) for k in (0, 1)]
            if all(a is not None for a in acc):
                _, _, ll_acc, _ = _reml_pass_stacked(stacked, acc[0], acc[1])
                if ll_acc >= ll:
                    sigma_u2, sigma_e2 = acc
                    prev_ll = ll_acc
                    trail.clear()

    beta, a_inv, ll, _ = _reml_pass_stacked(stacked, sigma_u2, sigma_e2)
    se = math.sqrt(max(a_inv[1, 1], 0.0))
    z = beta[1] / se if se > 0 else 0.0
    return LmmResult(
        float(beta[0]),
        float(beta[1]),
        float(sigma_u2),
        float(sigma_e2),
        normal_two_sided(z),
        float(ll),
        it,
        converged,
    )


def _cluster_vinv(n_i: int, sigma_u2: float, sigma_e2: float):
    # Woodbury inverse of sigma_e2*I + sigma_u2*J
    gamma = sigma_u2 / (sigma_e2 + n_i * sigma_u2)
    return gamma  # V^-1 v = (v - gamma * sum(v)) / sigma_e2


def _stacked(xs, ys):
    """Group clusters by size so per-iteration work is a few array ops."""
    groups: dict[int, list] = {}
    for X, y in zip(xs, ys):
        groups.setdefault(len(y), []).append((X, y))
    return [
        (np.stack([X for X, _ in members]), np.stack([y for _, y in members]))
        for members in groups.values()
    ]


def _moment_start(xs, ys, y_var):
    """ANOVA-style starting values so EM converges in few iterations."""
    X = np.concatenate(xs)
    y = np.concatenate(ys)
    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    within = 0.0
    dof = 0
    cluster_means = []
    for Xc, yc in zip(xs, ys):
        e = yc - Xc @ beta
        within += float(((e - e.mean()) ** 2).sum())
        dof += len(yc) - 1
        cluster_means.append(float(e.mean()))
    sigma_e2 = max(within / max(dof, 1), 1e-8 * y_var)
    n_bar = sum(len(c) for c in ys) / len(ys)
    between = float(np.var(cluster_means, ddof=1)) if len(cluster_means) > 1 else 0.0
    sigma_u2 = max(between - sigma_e2 / n_bar, 1e-8 * y_var)
    return sigma_u2, sigma_e2


def _aitken(x0: float, x1: float, x2: float) -> float | None:
    """Aitken delta-squared fixed-point extrapolation, or None if unusable."""
    denom = (x2 - x1) - (x1 - x0)
    if denom == 0.0:
        return None
    acc = x2 - (x2 - x1) ** 2 / denom
    return acc if math.isfinite(acc) and acc > 0.0 else None


def _gls_beta(xs, ys, sigma_u2, sigma_e2):
    return _gls_beta_stacked(_stacked(xs, ys), sigma_u2, sigma_e2)


def _gls_beta_stacked(stacked, sigma_u2, sigma_e2):
    A = np.zeros((2, 2))
    b = np.zeros(2)
    for Xs, Ys in stacked:
        n_i = Xs.shape[1]
        gamma = _cluster_vinv(n_i, sigma_u2, sigma_e2)
        VinvX = (Xs - gamma * Xs.sum(axis=1, keepdims=True)) / sigma_e2
        A += np.einsum("gni,gnj->ij", Xs, VinvX)
        b += np.einsum("gni,gn->i", VinvX, Ys)
    a_inv = np.linalg.inv(A)
    return a_inv @ b, a_inv


def _reml_pass(xs, ys, sigma_u2, sigma_e2):
    return _reml_pass_stacked(_stacked(xs, ys), sigma_u2, sigma_e2)


def _reml_pass_stacked(stacked, sigma_u2, sigma_e2):
    beta, a_inv = _gls_beta_stacked(stacked, sigma_u2, sigma_e2)
    logdet_v = 0.0
    quad = 0.0
    sum_zvr2 = 0.0  # sum over clusters of (1' V^-1 r)^2
    sum_vr2 = 0.0  # sum of ||V^-1 r||^2
    tr_vinv = 0.0
    sum_zvz = 0.0  # sum of 1' V^-1 1
    xvx2 = np.zeros((2, 2))  # sum of X' V^-2 X
    xvz = np.zeros((2, 2))  # sum of (X' V^-1 1)(1' V^-1 X)
    for Xs, Ys in stacked:
        g, n_i = Ys.shape
        gamma = _cluster_vinv(n_i, sigma_u2, sigma_e2)
        r = Ys - Xs @ beta
        vinv_r = (r - gamma * r.sum(axis=1, keepdims=True)) / sigma_e2
        vinv_x = (Xs - gamma * Xs.sum(axis=1, keepdims=True)) / sigma_e2
        zv = (1.0 - gamma * n_i) / sigma_e2  # 1' V^-1 applied to the ones vector
        logdet_v += g * (
            (n_i - 1) * math.log(sigma_e2) + math.log(sigma_e2 + n_i * sigma_u2)
        )
        quad += float(np.einsum("gn,gn->", r, vinv_r))
        sum_zvr2 += float((vinv_r.sum(axis=1) ** 2).sum())
        sum_vr2 += float((vinv_r**2).sum())
        tr_vinv += g * ((n_i - 1) / sigma_e2 + 1.0 / (sigma_e2 + n_i * sigma_u2))
        sum_zvz += g * n_i * zv
        xvx2 += np.einsum("gni,gnj->ij", vinv_x, vinv_x)
        xz = vinv_x.sum(axis=1)
        xvz += np.einsum("gi,gj->ij", xz, xz)
    sign, logdet_a = np.linalg.slogdet(np.linalg.inv(a_inv))
    ll = -0.5 * (logdet_v + logdet_a + quad)
    tr_p = tr_vinv - float(np.trace(a_inv @ xvx2))
    tr_zpz = sum_zvz - float(np.trace(a_inv @ xvz))
    return beta, a_inv, ll, (sum_zvr2, tr_zpz, sum_vr2, tr_p)


# ---------------------------------------------------------------------------
# Keyword and consensus metrics


def keyword_score(
    selected: set[str], targets: set[str], distractors: set[str]
) -> float:
    """Hits plus correct rejections over all candidate judgments."""
    candidates = set(targets) | set(distractors)
    extra = set(selected) - candidates
    if extra:
        raise AnalysisError(f"selected keywords outside the candidate set: {extra}")
    hits = len(set(selected) & set(targets))
    rejections = len(set(distractors) - set(selected))
    return (hits + rejections) / len(candidates)


def crowd_consensus(selections: list[set[str]], candidates: list[str]) -> float:
    """Majority-agreement consensus over candidate keywords.

    Per candidate, f is the fraction of participants selecting it; item
    consensus is max(f, 1-f) and the group value is the mean over all
    candidates.  Always in [0.5, 1].
    """
    if len(selections) < 2:
        raise AnalysisError("consensus needs at least 2 participants")
    n = len(selections)
    total = 0.0
    for cand in candidates:
        f = sum(1 for sel in selections if cand in sel) / n
        total += max(f, 1.0 - f)
    return total / len(candidates)


# ---------------------------------------------------------------------------
# Reader profiles


PROFILE_LABELS = (
    "synergistic_adopter",
    "efficiency_seeker",
    "deep_processor",
    "overloaded_reader",
    "skimmer",
)

# Prototype (z-speed, z-difficulty) coordinates for the distance fallback.
_PROTOTYPES = {
    "synergistic_adopter": (0.0, -1.0),
    "deep_processor": (-1.0, 0.0),
    "overloaded_reader": (-1.0, 1.0),
    "skimmer": (1.0, 0.0),
    "efficiency_seeker": (1.0, 0.0),
}


def _zscores(values: list[float]) -> list[float]:
    arr = np.asarray(values, dtype=float)
    sd = float(arr.std(ddof=0))
    if sd == 0.0:
        return [0.0] * len(values)
    mean = float(arr.mean())
    return [(v - mean) / sd for v in values]


def classify_profiles(
    deltas: list[tuple[float, float, float]], dead_band: float = 0.2
) -> list[str]:
    """Label each participant from (dCPM, d-difficulty, d-accuracy)
    between styled and non-styled conditions.

    Speed and difficulty deltas are z-scored within the cohort; the
    dead-band marks "stable"/"moderate" bands.  Rules are tried in
    order, with a nearest-prototype fallback in the (speed, difficulty)
    plane (ties between the two fast profiles resolved by the accuracy
    sign).
    """
    if len(deltas) < 3:
        raise AnalysisError("profile classification needs a cohort of >= 3")
    for d in deltas:
        if not all(math.isfinite(x) for x in d):
            raise AnalysisError("profile deltas must be finite")
    z_cpm = _zscores([d[0] for d in deltas])
    z_diff = _zscores([d[1] for d in deltas])
    labels = []
    for (_, _, d_acc), zc, zd in zip(deltas, z_cpm, z_diff):
        if abs(zc) <= dead_band and zd < -dead_band:
            labels.append("synergistic_adopter")
        elif zc > dead_band and abs(zd) <= dead_band:
            labels.append("skimmer")
        elif zc > dead_band and d_acc < 0:
            labels.append("efficiency_seeker")
        elif zc < -dead_band and d_acc > 0:
            labels.append("deep_processor")
        elif zc < -dead_band and zd > dead_band:
            labels.append("overloaded_reader")
        else:
            best = min(
                PROFILE_LABELS,
                key=lambda name: (
                    (_PROTOTYPES[name][0] - zc) ** 2 + (_PROTOTYPES[name][1] - zd) ** 2,
                    # fast-profile tie: accuracy drop means rushing
                    0 if (name == "efficiency_seeker") == (d_acc < 0) else 1,
                ),
            )
            labels.append(best)
    return labels


# ---------------------------------------------------------------------------
# Temporal groupings


@dataclass(frozen=True)
class GroupSpec:
    """Positional filter over a participant's own reading order."""

    label: str
    lo: int
    hi: int

    def __post_init__(self):
        if not 1 <= self.lo <= self.hi <= 10:
            raise AnalysisError(f"group range [{self.lo}, {self.hi}] outside [1, 10]")

    def contains(self, position: int) -> bool:
        return self.lo <= position <= self.hi


GROUPS = {
    "all": GroupSpec("all", 1, 10),
    "3-8": GroupSpec("3-8", 3, 8),
    "5-8": GroupSpec("5-8", 5, 8),
}


def group_filter(items, g: GroupSpec):
    """Keep items whose position lies in the group's range."""
    return [item for item in items if g.contains(item.position)]
