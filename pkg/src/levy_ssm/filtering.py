"""Marginalised sequential inference for linear SDEs driven by GH noise.

Conditionally on the subordinator jumps of each inter-observation interval,
the model is linear-Gaussian, so the state can be integrated out exactly
with one Kalman predict/correct pass per candidate jump sequence.  Each
observation is absorbed by running a short independence Metropolis-Hastings
chain over jump sequences, scoring candidates by their marginal observation
likelihood, and collapsing the retained per-sequence posteriors into a
single Gaussian by moment matching.

All randomness flows through ``numpy.random.Generator``.  ``run_filter``
derives one generator per observation from a master seed via Philox
jump-ahead, so any step is reproducible in isolation:
``step_stream(seed, k)`` rebuilds the stream of step k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .jumps import JumpSequence, sample_gig
from .params import TruncationBudget
from .ssm import CondGaussMoments, LinearSSM

# A proposal draws a jump sequence from the unconditional subordinator law
# on a given interval, consuming randomness only through the generator.
Proposal = Callable[[np.random.Generator, tuple], JumpSequence]


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state belief N(mean, cov) at a point in time."""

    time: float
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.ascontiguousarray(self.mean, dtype=np.float64)
        cov = np.ascontiguousarray(self.cov, dtype=np.float64)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValueError("mean must be (D,) and cov must be (D, D)")
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class FilterConfig:
    """Knobs for the per-observation jump chain.

    ``n_iter`` is the total chain length including the initial unconditional
    draw, so ``n_iter=1`` degenerates to a single Kalman pass through one
    prior-sampled jump sequence.  ``burn_in`` entries are dropped before the
    mixture collapse.  ``keep_chain`` stores the per-iteration jump
    sequences on each step result.
    """

    n_iter: int = 100
    burn_in: int = 0
    budget: TruncationBudget = TruncationBudget()
    z1: object = "auto"
    seed: int = 0
    keep_chain: bool = False

    def __post_init__(self):
        if int(self.n_iter) != self.n_iter or self.n_iter < 1:
            raise ValueError(f"n_iter must be an integer >= 1, got {self.n_iter!r}")
        if int(self.burn_in) != self.burn_in or not 0 <= self.burn_in < self.n_iter:
            raise ValueError(
                f"burn_in must satisfy 0 <= burn_in < n_iter, got {self.burn_in!r}"
            )
        object.__setattr__(self, "n_iter", int(self.n_iter))
        object.__setattr__(self, "burn_in", int(self.burn_in))
        object.__setattr__(self, "seed", int(self.seed))


@dataclass(frozen=True)
class FilterStepResult:
    """Outcome of absorbing one observation."""

    collapsed: GaussianState
    acceptance_rate: float
    log_marginal: float
    chain_jumps: Optional[list] = None


@dataclass(frozen=True)
class ChainState:
    """Current point of the jump chain: a sequence with its cached scores."""

    seq: JumpSequence
    posterior: GaussianState
    log_lik: float


def step_stream(seed: int, k: int) -> np.random.Generator:
    """Independent generator for observation step k under a master seed."""
    return np.random.Generator(np.random.Philox(key=seed).jumped(k))


def gig_prior_proposal(ssm: LinearSSM, config: FilterConfig) -> Proposal:
    """Proposal drawing from the model's own subordinator under the budget."""
    gig = ssm.gh.gig

    def propose(rng: np.random.Generator, interval) -> JumpSequence:
        return sample_gig(gig, interval, config.budget, rng, z1=config.z1)

    return propose


def _predict_with(
    prior: GaussianState, t: float, F: np.ndarray, mom: CondGaussMoments
) -> GaussianState:
    mean = F @ prior.mean + mom.m
    cov = F @ prior.cov @ F.T + mom.S
    return GaussianState(t, mean, 0.5 * (cov + cov.T))


def kalman_predict(
    prior: GaussianState,
    ssm: LinearSSM,
    seq: JumpSequence,
    t: float,
    F: Optional[np.ndarray] = None,
) -> GaussianState:
    """Push the belief from prior.time to t given the jumps in between."""
    t = float(t)
    if t <= prior.time:
        raise ValueError(f"target time {t} must exceed prior time {prior.time}")
    if F is None:
        F = ssm.expm(t - prior.time)
    mom = ssm.cond_moments(seq, (prior.time, t))
    return _predict_with(prior, t, F, mom)


def _correct_with(
    pred: GaussianState, y: float, H: np.ndarray, sigma_eps: float
) -> tuple[GaussianState, float]:
    ch = pred.cov @ H
    ivar = float(H @ ch) + sigma_eps * sigma_eps
    if not ivar > 0.0:
        raise ValueError(f"innovation variance must be positive, got {ivar}")
    resid = float(y) - float(H @ pred.mean)
    log_lik = -0.5 * (math.log(2.0 * math.pi * ivar) + resid * resid / ivar)
    gain = ch / ivar
    mean = pred.mean + gain * resid
    cov = pred.cov - np.outer(gain, ch)
    return GaussianState(pred.time, mean, 0.5 * (cov + cov.T)), log_lik


def kalman_correct(
    pred: GaussianState, ssm: LinearSSM, y: float
) -> tuple[GaussianState, float]:
    """Condition on a scalar observation y = H x + N(0, sigma_eps^2).

    Returns the posterior state and the log marginal likelihood of y under
    the predictive belief.
    """
    return _correct_with(pred, float(y), ssm.H, ssm.sigma_eps)


def collapse(chain) -> GaussianState:
    """Moment-match an equally weighted Gaussian mixture to one Gaussian."""
    chain = list(chain)
    if len(chain) == 0:
        raise ValueError("cannot collapse an empty chain of states")
    t = chain[0].time
    for st in chain:
        if st.time != t:
            raise ValueError("all states must share the same timestamp")
    means = np.stack([st.mean for st in chain])
    mean = means.mean(axis=0)
    covs = np.stack(
        [st.cov + np.outer(st.mean - mean, st.mean - mean) for st in chain]
    )
    return GaussianState(t, mean, covs.mean(axis=0))


def log_mean_exp(values) -> float:
    """log of the mean of exp(values), stable against under/overflow."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("log_mean_exp of an empty array")
    m = float(arr.max())
    if m == -math.inf:
        return -math.inf
    return m + math.log(float(np.exp(arr - m).sum())) - math.log(arr.size)


def _score(
    ssm: LinearSSM,
    prior: GaussianState,
    t: float,
    y: float,
    seq: JumpSequence,
    F: np.ndarray,
) -> ChainState:
    mom = ssm.cond_moments(seq, (prior.time, t))
    pred = _predict_with(prior, t, F, mom)
    post, log_lik = _correct_with(pred, y, ssm.H, ssm.sigma_eps)
    return ChainState(seq, post, log_lik)


def mh_step(
    prior: GaussianState,
    ssm: LinearSSM,
    interval,
    y: float,
    current: ChainState,
    config: FilterConfig,
    rng: np.random.Generator,
    proposal: Optional[Proposal] = None,
    F: Optional[np.ndarray] = None,
) -> tuple[ChainState, bool]:
    """One independence MH move over the jump sequences of an interval.

    Proposals come from the unconditional jump law, so the acceptance
    probability reduces to min(1, likelihood ratio) of the observation y at
    the interval's right end.  A rejected move returns the cached
    ``current`` without rescoring it.  One uniform is always consumed for
    the accept decision, keeping the stream layout independent of the
    outcome.
    """
    s, t = float(interval[0]), float(interval[1])
    if s != prior.time or t <= s:
        raise ValueError(f"interval {interval!r} must run from prior.time to a later t")
    if proposal is None:
        proposal = gig_prior_proposal(ssm, config)
    if F is None:
        F = ssm.expm(t - s)
    cand = _score(ssm, prior, t, float(y), proposal(rng, (s, t)), F)
    u = rng.random()
    if cand.log_lik == -math.inf:
        accept = False
    elif cand.log_lik >= current.log_lik:
        accept = True
    else:
        accept = u < math.exp(cand.log_lik - current.log_lik)
    return (cand, True) if accept else (current, False)


def filter_step(
    prior: GaussianState,
    ssm: LinearSSM,
    y: float,
    t: float,
    config: FilterConfig,
    rng: np.random.Generator,
    proposal: Optional[Proposal] = None,
) -> FilterStepResult:
    """Absorb the observation y at time t by chaining over jump sequences.

    The chain starts from one unconditionally accepted prior draw followed
    by ``config.n_iter - 1`` MH moves; rejected moves duplicate the current
    entry so the retained chain is an equal-weight posterior mixture.
    """
    t = float(t)
    if t <= prior.time:
        raise ValueError(f"observation time {t} must exceed state time {prior.time}")
    if ssm.sigma_eps <= 0.0:
        raise ValueError("filtering requires sigma_eps > 0")
    if proposal is None:
        proposal = gig_prior_proposal(ssm, config)
    interval = (prior.time, t)
    F = ssm.expm(t - prior.time)
    current = _score(ssm, prior, t, float(y), proposal(rng, interval), F)
    posteriors = [current.posterior]
    log_liks = [current.log_lik]
    chain_jumps = [current.seq] if config.keep_chain else None
    accepted = 0
    for _ in range(config.n_iter - 1):
        current, moved = mh_step(
            prior, ssm, interval, y, current, config, rng, proposal=proposal, F=F
        )
        accepted += moved
        posteriors.append(current.posterior)
        log_liks.append(current.log_lik)
        if chain_jumps is not None:
            chain_jumps.append(current.seq)
    collapsed = collapse(posteriors[config.burn_in :])
    log_marginal = log_mean_exp(log_liks[config.burn_in :])
    rate = accepted / (config.n_iter - 1) if config.n_iter > 1 else 0.0
    return FilterStepResult(collapsed, rate, log_marginal, chain_jumps)


def run_filter(
    ssm: LinearSSM,
    observations,
    config: FilterConfig,
    init_state: Optional[GaussianState] = None,
    proposal: Optional[Proposal] = None,
) -> list[FilterStepResult]:
    """Filter a record of (time, value) pairs, one jump chain per entry.

    Observation times must be strictly ascending and later than the initial
    state's time (default: N(0, 100 I) at time 0).  Step k draws from
    ``step_stream(config.seed, k)``.  An empty record returns an empty list.
    """
    pairs = [(float(t), float(v)) for t, v in observations]
    if init_state is None:
        init_state = GaussianState(0.0, np.zeros(ssm.dim), 100.0 * np.eye(ssm.dim))
    last = init_state.time
    for t, _ in pairs:
        if t <= last:
            raise ValueError("observation times must be strictly ascending and start after the prior")
        last = t
    results = []
    state = init_state
    for k, (t, v) in enumerate(pairs):
        res = filter_step(
            state, ssm, v, t, config, step_stream(config.seed, k), proposal=proposal
        )
        results.append(res)
        state = res.collapsed
    return results
