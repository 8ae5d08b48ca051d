"""Error metrics, convergence statistics, and probe maps.

The headline metric is the worst-dimension absolute standardized error of
a sampler's running expectation against reference expectations,

    err_f(t) = max_d | mean_i f(draw_d_i) - mean f(ref_d) | / sd(f(ref_d)),

evaluated for f(x) = x (mean error) and f(x) = x^2 (variance error) on a
grid of gradient-evaluation budgets t.

Convergence statistics follow the standard split-chain rank-normalized
formulation.  Chains are split in half, all draws are replaced by normal
scores of their pooled average ranks z = Phi^-1((r - 3/8) / (S + 1/4)),
and on those scores:

    R-hat = sqrt(((n-1)/n W + B/n) / W)

with W the mean within-sequence variance and B = n Var(sequence means).
The effective sample size uses per-sequence FFT autocovariances combined
as rho_t = 1 - (W - mean_c acov_ct) / var_plus, truncated by Geyer's
initial monotone positive pair sequence; ess = S n / tau with
tau = -1 + 2 sum_k P_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

FUNCTIONS = ("theta", "theta_sq")


def _apply(f: str, values: np.ndarray) -> np.ndarray:
    if f == "theta":
        return values
    if f == "theta_sq":
        return values * values
    raise ValueError(f"unknown error function {f!r}; expected one of {FUNCTIONS}")


def reference_moments(ref_draws: np.ndarray, f: str):
    vals = _apply(f, np.asarray(ref_draws, dtype=float))
    mean = vals.mean(axis=0)
    sd = vals.std(axis=0)
    if np.any(sd <= 0.0):
        raise ValueError("reference draws have a zero-variance dimension")
    return mean, sd


def standardized_error_by_dim(draws, ref_mean, ref_sd, f: str) -> np.ndarray:
    draws = np.asarray(draws, dtype=float)
    if draws.ndim != 2 or draws.shape[0] < 1:
        raise ValueError("draws must be a non-empty (n, D) array")
    est = _apply(f, draws).mean(axis=0)
    return np.abs(est - ref_mean) / ref_sd


def standardized_error(draws, reference, f: str) -> float:
    """Worst-dimension absolute z-scored error of the empirical mean of f."""
    ref_mean, ref_sd = reference.moments(f)
    return float(np.max(standardized_error_by_dim(draws, ref_mean, ref_sd, f)))


def budget_grid(total: int, points: int = 50, start: int = 1000) -> np.ndarray:
    """Log-spaced integer budgets from ``start`` up to ``total``."""
    if total < 1:
        raise ValueError("budget must be at least 1")
    start = min(start, total)
    grid = np.unique(np.rint(np.geomspace(start, total, points)).astype(np.int64))
    return grid


@dataclass
class ErrorReport:
    """Standardized errors over a budget grid for one chain."""

    budgets: np.ndarray
    errors: dict  # f -> (n_grid,) worst-dimension error
    per_dim: dict  # f -> (n_grid, D) errors before the max
    worst_dim: dict  # f -> (n_grid,) argmax dimension index
    chain_id: int = 0


def error_curve(result, reference, budgets, chain_id: int = 0) -> ErrorReport:
    """Standardized errors of the running estimate at each budget point.

    Uses the cumulative gradient-count annotation to find the draws
    available under each budget; every point is recomputed from the raw
    draws so repeated evaluation cannot drift.
    """
    budgets = np.asarray(budgets, dtype=np.int64)
    if budgets.size == 0 or np.any(np.diff(budgets) < 0):
        raise ValueError("budgets must be a non-empty non-decreasing grid")
    errors = {f: np.empty(budgets.size) for f in FUNCTIONS}
    per_dim = {f: np.empty((budgets.size, result.draws.shape[1])) for f in FUNCTIONS}
    worst = {f: np.empty(budgets.size, dtype=np.int64) for f in FUNCTIONS}
    for f in FUNCTIONS:
        ref_mean, ref_sd = reference.moments(f)
        for j, t in enumerate(budgets):
            n = int(np.searchsorted(result.cum_grads, t, side="right"))
            rows = standardized_error_by_dim(result.draws[: max(n, 1)], ref_mean, ref_sd, f)
            per_dim[f][j] = rows
            errors[f][j] = rows.max()
            worst[f][j] = int(rows.argmax())
    return ErrorReport(budgets, errors, per_dim, worst, chain_id)


def marginal_histogram(draws, dim: int, bins: int = 60, value_range=(-12.0, 12.0)):
    """Fixed-bin histogram of one coordinate over pooled draws."""
    draws = np.asarray(draws, dtype=float)
    counts, edges = np.histogram(draws[:, dim], bins=bins, range=value_range)
    return counts, edges


def chi_square_gof(values, cdf, bins: int = 40, value_range=(-10.0, 10.0), min_expected: float = 5.0):
    """Chi-square goodness of fit against a fully specified distribution.

    The outermost bins are open-ended so all mass is accounted for; bins
    are merged left-to-right until every expected count reaches
    ``min_expected``.  Returns (statistic, p_value, dof).  Draws must be
    roughly independent for the test to be calibrated.
    """
    values = np.asarray(values, dtype=float)
    edges = np.linspace(value_range[0], value_range[1], bins + 1)
    observed = np.histogram(np.clip(values, edges[0], edges[-1]), bins=edges)[0].astype(float)
    cum = cdf(edges)
    expected = np.diff(cum) * values.size
    expected[0] += cum[0] * values.size
    expected[-1] += (1.0 - cum[-1]) * values.size

    merged_obs, merged_exp = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            merged_obs.append(acc_o)
            merged_exp.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and merged_obs:
        merged_obs[-1] += acc_o
        merged_exp[-1] += acc_e
    if len(merged_obs) < 2:
        raise ValueError("too few draws for a chi-square test at this bin count")
    obs = np.asarray(merged_obs)
    exp = np.asarray(merged_exp)
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = obs.size - 1
    return stat, float(stats.chi2.sf(stat, dof)), dof


# ---------------------------------------------------------------------------
# split-chain rank-normalized R-hat and effective sample size


def _split_chains(chains: np.ndarray) -> np.ndarray:
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    n = chains.shape[1]
    half = n // 2
    if half < 2:
        raise ValueError("chains too short to split")
    return np.vstack([chains[:, :half], chains[:, n - half :]])


def rank_normalize(x: np.ndarray) -> np.ndarray:
    flat = np.asarray(x, dtype=float).ravel()
    ranks = stats.rankdata(flat)
    z = stats.norm.ppf((ranks - 0.375) / (flat.size + 0.25))
    return z.reshape(np.shape(x))


def split_rhat(chains) -> float:
    """Split-chain rank-normalized potential scale reduction factor."""
    z = rank_normalize(_split_chains(chains))
    n = z.shape[1]
    within = float(np.mean(np.var(z, axis=1, ddof=1)))
    between = n * float(np.var(np.mean(z, axis=1), ddof=1))
    var_plus = (n - 1) / n * within + between / n
    return math.sqrt(var_plus / within)


def _autocov(row: np.ndarray) -> np.ndarray:
    n = row.size
    centered = row - row.mean()
    size = 1 << (2 * n - 1).bit_length()
    freq = np.fft.rfft(centered, size)
    acov = np.fft.irfft(freq * np.conj(freq), size)[:n].real
    return acov / n


def ess(chains) -> float:
    """Bulk effective sample size on rank-normalized split chains."""
    z = _split_chains(chains)
    if np.allclose(z, z.ravel()[0]):
        return float(z.size)
    z = rank_normalize(z)
    m, n = z.shape
    acov = np.vstack([_autocov(row) for row in z])
    within = float(np.mean(acov[:, 0] * n / (n - 1)))
    between = n * float(np.var(np.mean(z, axis=1), ddof=1)) if m > 1 else 0.0
    var_plus = (n - 1) / n * within + between / n
    if var_plus <= 0:
        return float(m * n)
    rho = 1.0 - (within - acov.mean(axis=0)) / var_plus
    # Geyer initial monotone positive sequence on paired sums
    tau = -1.0
    prev_pair = math.inf
    for k in range(0, n // 2):
        pair = rho[2 * k] + (rho[2 * k + 1] if 2 * k + 1 < n else 0.0)
        if pair < 0.0:
            break
        pair = min(pair, prev_pair)
        prev_pair = pair
        tau += 2.0 * pair
    tau = max(tau, 1.0 / math.log10(m * n + 10))
    return float(min(m * n, m * n / tau))


def autocorr_time(chains) -> float:
    """Integrated autocorrelation time implied by the bulk ess."""
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    return chains.size / max(ess(chains), 1.0)


def mcse_mean(chains) -> float:
    """Monte Carlo standard error of the pooled mean of one parameter."""
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    return float(chains.std(ddof=1)) / math.sqrt(max(ess(chains), 1.0))


# ---------------------------------------------------------------------------
# probe maps and box summaries


def stepsize_probe_map(
    x_values,
    y_values,
    dim: int = 10,
    trials: int = 100,
    seed: int = 0,
    step_size: float = 2.0,
    reduction: float = 4.0,
    max_proposals: int = 10,
):
    """Mean accepted step size from single iterations started on a grid.

    From each planar (x, y) coordinate, embedded into the funnel's full
    parameter space, one sampling iteration runs per trial with a fresh
    normal(0, M) momentum; the step size of the stage that got accepted is
    averaged over accepted trials.  Returns rows of
    (x, y, mean_accepted_eps, accepted, trials).
    """
    from .models.funnel import Funnel, embed_grid_point
    from .samplers import DrGhmcConfig, drghmc_step
    from .integrator import PhasePoint

    model = Funnel(dim)
    cfg = DrGhmcConfig(
        max_proposals=max_proposals,
        damping=1.0,
        step_size=step_size,
        reduction=reduction,
    )
    rows = []
    root = np.random.SeedSequence(seed)
    for xv in x_values:
        for yv in y_values:
            theta = embed_grid_point(xv, yv, dim)
            rng = np.random.default_rng(root.spawn(1)[0])
            accepted_eps = []
            for _ in range(trials):
                rho = rng.standard_normal(dim)
                outcome = drghmc_step(model, PhasePoint(theta, rho), cfg, rng)
                if outcome.accepted_stage > 0:
                    accepted_eps.append(outcome.accepted_step_size)
            mean_eps = float(np.mean(accepted_eps)) if accepted_eps else math.nan
            rows.append((float(xv), float(yv), mean_eps, len(accepted_eps), trials))
    return rows


def stepsize_chain_map(draws, accepted_eps, dim: int = 0, bins: int = 24, value_range=(-9.0, 9.0)):
    """Mean accepted step size binned by one position coordinate."""
    draws = np.asarray(draws, dtype=float)
    accepted_eps = np.asarray(accepted_eps, dtype=float)
    ok = np.isfinite(accepted_eps)
    coord = draws[ok, dim]
    eps = accepted_eps[ok]
    edges = np.linspace(value_range[0], value_range[1], bins + 1)
    rows = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = (coord >= lo) & (coord < hi)
        center = 0.5 * (lo + hi)
        mean_eps = float(eps[mask].mean()) if np.any(mask) else math.nan
        rows.append((center, mean_eps, int(mask.sum())))
    return rows


def condition_number_field(x_values, y_values, dim: int = 10):
    """Negative log density and Hessian condition number on a planar grid."""
    from .models.funnel import Funnel, embed_grid_point

    model = Funnel(dim)
    rows = []
    for xv in x_values:
        for yv in y_values:
            theta = embed_grid_point(xv, yv, dim)
            neg_log = -model.log_density(theta)
            hess = model.hessian_neg_log_density(theta)
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                cond = float(np.linalg.cond(hess))
            if not math.isfinite(cond):
                cond = math.inf
            rows.append((float(xv), float(yv), float(neg_log), cond))
    return rows


def box_summary(values) -> dict:
    """Tukey box-plot statistics: quartiles, 1.5 IQR whiskers, outliers."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        raise ValueError("box_summary needs at least one value")
    q25, q75 = np.percentile(values, [25.0, 75.0])
    iqr = q75 - q25
    lo_fence, hi_fence = q25 - 1.5 * iqr, q75 + 1.5 * iqr
    inside = values[(values >= lo_fence) & (values <= hi_fence)]
    return {
        "mean": float(values.mean()),
        "median": float(np.median(values)),
        "q25": float(q25),
        "q75": float(q75),
        "whisker_lo": float(inside.min()),
        "whisker_hi": float(inside.max()),
        "outliers": [float(v) for v in values[(values < lo_fence) | (values > hi_fence)]],
    }
