"""Self-checking statistical suites with in-repo quadrature oracles.

Each check draws from the samplers, compares against an independently
computed reference (composite Gauss-Legendre quadrature of the densities,
closed-form identities, or vectorised Monte Carlo), and reports a
pass/fail verdict with its statistic.  Checks consume disjoint Philox
streams jumped from one master seed, so a report is deterministic no
matter how the thread pool schedules them.
"""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .jumps import attach_gh_jumps, sample_gig
from .numerics import gh_pdf, gig_pdf, hankel1_abs_sq
from .params import GHParams, GIGParams, TruncationBudget
from .ssm import LangevinSSM

log = logging.getLogger(__name__)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    statistic: float
    threshold: float
    n: int
    detail: str

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "statistic", float(self.statistic))
        object.__setattr__(self, "threshold", float(self.threshold))
        object.__setattr__(self, "n", int(self.n))


def _segment_integrals(pdf, edges: np.ndarray) -> np.ndarray:
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = np.asarray(pdf(nodes.ravel())).reshape(nodes.shape)
    return (vals @ _GL_WEIGHTS) * half


def quadrature_cdf(pdf, start: float, xs_sorted: np.ndarray, max_width: float = 0.25):
    """CDF values at sorted points by cumulative Gauss-Legendre quadrature.

    Integrates pdf from ``start`` through each point, splitting any segment
    wider than ``max_width``.  The pdf must be vectorised and effectively
    zero below ``start``.
    """
    edges = [float(start)]
    marks = np.empty(xs_sorted.size, dtype=np.int64)
    prev = float(start)
    for i, x in enumerate(np.asarray(xs_sorted, dtype=np.float64)):
        if x <= prev:
            marks[i] = len(edges) - 1
            continue
        k = int(math.ceil((x - prev) / max_width))
        if k > 1:
            edges.extend(np.linspace(prev, x, k + 1)[1:].tolist())
        else:
            edges.append(float(x))
        marks[i] = len(edges) - 1
        prev = float(x)
    seg = _segment_integrals(pdf, np.asarray(edges))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    return cum[marks]


def ks_statistic(cdf_at_sorted: np.ndarray) -> float:
    """Two-sided Kolmogorov-Smirnov distance from the uniform order stats."""
    f = np.asarray(cdf_at_sorted, dtype=np.float64)
    n = f.size
    if n == 0:
        raise ValueError("KS statistic of an empty sample")
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


def ks_pvalue(d: float, n: int) -> float:
    """Asymptotic two-sided KS p-value with the Stephens size correction."""
    lam = (math.sqrt(n) + 0.12 + 0.11 / math.sqrt(n)) * d
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return min(1.0, max(0.0, total))


def _sum_draws(sampler, n: int, rng) -> np.ndarray:
    out = np.empty(n)
    for i in range(n):
        out[i] = sampler(rng)
    return out


def check_gig_ks(
    gig: GIGParams,
    n: int,
    gamma_max: float,
    rng,
    level: float = 0.01,
    name: str = "",
) -> CheckResult:
    """Sum of sampled jumps over a unit interval vs the quadrature CDF."""
    budget = TruncationBudget(gamma_max)

    def draw(r):
        return float(np.sum(sample_gig(gig, (0.0, 1.0), budget, r).sizes))

    t0 = time.perf_counter()
    xs = np.sort(_sum_draws(draw, n, rng))
    cdf = quadrature_cdf(lambda v: gig_pdf(v, gig.lam, gig.delta, gig.gamma), 0.0, xs)
    d = ks_statistic(cdf)
    p = ks_pvalue(d, n)
    log.info("%s: D=%.5f p=%.4f (%.1fs)", name or "gig_ks", d, p, time.perf_counter() - t0)
    return CheckResult(
        name=name or f"gig_ks(lam={gig.lam},delta={gig.delta},gamma={gig.gamma})",
        passed=p > level,
        statistic=p,
        threshold=level,
        n=n,
        detail=f"KS distance {d:.6f} against quadrature CDF, gamma_max={gamma_max}",
    )


def check_gh_ks(
    gh: GHParams,
    n: int,
    gamma_max: float,
    rng,
    level: float = 0.01,
    name: str = "",
) -> CheckResult:
    """Sum of attached GH jumps over a unit interval vs the density CDF."""
    budget = TruncationBudget(gamma_max)

    def draw(r):
        seq = attach_gh_jumps(sample_gig(gh.gig, (0.0, 1.0), budget, r), gh, r)
        return float(np.sum(seq.values)) if len(seq) else 0.0

    t0 = time.perf_counter()
    xs = np.sort(_sum_draws(draw, n, rng))
    rate = gh.alpha - abs(gh.beta)
    start = float(xs[0]) - 80.0 / rate
    cdf = quadrature_cdf(lambda v: gh_pdf(v, gh), start, xs)
    d = ks_statistic(cdf)
    p = ks_pvalue(d, n)
    log.info("%s: D=%.5f p=%.4f (%.1fs)", name or "gh_ks", d, p, time.perf_counter() - t0)
    return CheckResult(
        name=name or f"gh_ks(mu_w={gh.mu_w},sigma_w={gh.sigma_w})",
        passed=p > level,
        statistic=p,
        threshold=level,
        n=n,
        detail=f"KS distance {d:.6f} against quadrature CDF, gamma_max={gamma_max}",
    )


def check_hankel_identity(threshold: float = 1e-9) -> CheckResult:
    """Half-integer closed form |H_{1/2}(z)|^2 = 2 / (pi z) over a wide grid."""
    worst = 0.0
    zs = np.geomspace(1e-2, 1e3, 400)
    for z in zs:
        got = hankel1_abs_sq(0.5, float(z))
        want = 2.0 / (math.pi * z)
        worst = max(worst, abs(got - want) / want)
    return CheckResult(
        name="hankel_identity",
        passed=worst < threshold,
        statistic=worst,
        threshold=threshold,
        n=zs.size,
        detail="max relative error of the half-integer closed form",
    )


def check_hankel_seam(threshold: float = 1e-6) -> CheckResult:
    """Continuity of |H_nu(z)|^2 across the series/asymptotic switch point.

    The jump across the seam measures the truncation error of the
    asymptotic branch; it sits around 1e-8, orders of magnitude below the
    acceptance-probability sensitivity at those arguments.
    """
    worst = 0.0
    orders = (0.8, 1.7, 3.2)
    for nu in orders:
        seam = max(14.0, 2.0 * nu * nu)
        lo = hankel1_abs_sq(nu, seam * (1.0 - 1e-8))
        hi = hankel1_abs_sq(nu, seam * (1.0 + 1e-8))
        worst = max(worst, abs(hi - lo) / abs(lo))
    return CheckResult(
        name="hankel_seam",
        passed=worst < threshold,
        statistic=worst,
        threshold=threshold,
        n=len(orders),
        detail="max relative jump across the evaluation-branch seam",
    )


def check_cond_moments(
    rng,
    n_seq: int = 5,
    resamples: int = 20000,
    tol: float = 0.05,
) -> CheckResult:
    """Monte-Carlo mean/covariance of the jump-driven increment vs (m, S).

    Jump times and sizes are held fixed per sequence; only the Gaussian
    marks are resampled, which isolates the conditional-moment formulas.
    """
    gig = GIGParams(lam=-0.8, delta=1.0, gamma=2.0)
    # mu_w of order sigma_w keeps the mean's norm comparable to the noise
    # scale, so the relative-error statistic is not dominated by mean SNR.
    gh = GHParams(gig=gig, mu_w=1.0, sigma_w=1.1, mu=0.0)
    ssm = LangevinSSM(theta=-0.5, sigma_eps=0.1, gh=gh)
    budget = TruncationBudget(100.0)
    worst = 0.0
    for _ in range(n_seq):
        seq = sample_gig(gig, (0.0, 2.0), budget, rng)
        if len(seq) == 0:
            continue
        mom = ssm.cond_moments(seq, (0.0, 2.0))
        f = ssm.ft(2.0, seq.times)
        z = seq.sizes
        u = rng.standard_normal((resamples, z.size))
        w = gh.mu_w * z + gh.sigma_w * np.sqrt(z) * u
        x = w @ f
        rel_m = np.linalg.norm(x.mean(axis=0) - mom.m) / np.linalg.norm(mom.m)
        rel_s = np.linalg.norm(np.cov(x.T) - mom.S) / np.linalg.norm(mom.S)
        worst = max(worst, float(rel_m), float(rel_s))
    return CheckResult(
        name="cond_moments",
        passed=worst < tol,
        statistic=worst,
        threshold=tol,
        n=n_seq * resamples,
        detail="max relative error of MC mean/cov vs closed-form (m, S)",
    )


def run_all(
    seed: int,
    n_ks: int = 2000,
    gamma_max: float = 2000.0,
    resamples: int = 20000,
    max_workers: int = 4,
) -> list[CheckResult]:
    """Run every suite on worker threads with disjoint seeded streams."""

    def stream(k):
        return np.random.Generator(np.random.Philox(key=seed).jumped(k))

    gig_sets = [
        GIGParams(lam=-0.8, delta=1.0, gamma=2.0),
        GIGParams(lam=-1.5, delta=2.0, gamma=1.0),
        GIGParams(lam=-0.6, delta=1.0, gamma=3.0),
    ]
    gh_sets = [
        GHParams(gig=gig_sets[0], mu_w=0.0, sigma_w=1.0),
        GHParams(gig=gig_sets[0], mu_w=0.5, sigma_w=1.0),
    ]
    jobs = []
    for i, gig in enumerate(gig_sets):
        jobs.append(
            (
                check_gig_ks,
                dict(
                    gig=gig,
                    n=n_ks,
                    gamma_max=gamma_max,
                    rng=stream(i),
                    name=f"gig_ks_{i}",
                ),
            )
        )
    for i, gh in enumerate(gh_sets):
        jobs.append(
            (
                check_gh_ks,
                dict(
                    gh=gh,
                    n=n_ks,
                    gamma_max=gamma_max,
                    rng=stream(10 + i),
                    name=f"gh_ks_{i}",
                ),
            )
        )
    jobs.append((check_hankel_identity, {}))
    jobs.append((check_hankel_seam, {}))
    jobs.append((check_cond_moments, dict(rng=stream(20), resamples=resamples)))
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(fn, **kw) for fn, kw in jobs]
        return [f.result() for f in futures]


def report_json(results, seed: int) -> str:
    """Machine-readable report; deterministic for a given seed."""
    doc = {
        "generator": "philox",
        "seed": int(seed),
        "passed": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
    return json.dumps(doc, indent=2, sort_keys=True)
