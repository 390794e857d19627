"""Shot-noise jump samplers for tempered stable, gamma and GIG subordinators.

The GIG sampler splits the Levy density at a point z1 of the auxiliary
Bessel variable and simulates the two bands as marked point processes:

- the z < z1 band is dominated by two gamma processes whose candidates are
  thinned, marked with a truncated square-root gamma variable and thinned
  again with a Hankel-modulus ratio;
- the z >= z1 band is dominated by a tempered stable process with stability
  index 1/2, thinned with an incomplete-gamma ratio, marked on [z1, inf)
  and thinned with the Hankel-modulus ratio.

All candidate generation is driven by a single ``numpy.random.Generator``
consumed in a fixed documented order, so results are reproducible for a
given seed in both execution backends.  Every acceptance probability
computed along the way is tracked; values above 1 + 1e-9 raise
:class:`BoundViolationError` since they would signal a broken dominance
argument rather than roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .accel import jit_kernel
from .numerics import (
    _erfcinv_from_log,
    _erfcx,
    _hankel1_abs_sq,
    _log_erfc,
    _log_reg_lower_gamma,
    _normal_icdf,
    _reg_lower_over_pow,
)
from .params import GHParams, GIGParams, TruncationBudget

_PI = math.pi

ACCEPTANCE_TOL = 1.0e-9


class BoundViolationError(RuntimeError):
    """An acceptance probability exceeded 1 beyond numerical tolerance."""


@dataclass
class SamplerDiagnostics:
    """Candidate counts and the largest acceptance probability seen."""

    candidates: int = 0
    max_acceptance: float = 0.0

    def absorb(self, candidates: int, max_acceptance: float) -> None:
        self.candidates += int(candidates)
        if max_acceptance > self.max_acceptance:
            self.max_acceptance = float(max_acceptance)


@dataclass(frozen=True)
class JumpSequence:
    """Jumps of a driving process on the interval (s, t].

    ``times`` holds the jump locations V_i sorted ascending, ``sizes`` the
    subordinator jumps Z_i > 0 and ``values`` (optional) the attached GH
    jumps W_i.  Sequences are created by the samplers; direct construction
    validates the invariants.
    """

    s: float
    t: float
    times: np.ndarray
    sizes: np.ndarray
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        s = float(self.s)
        t = float(self.t)
        if not (math.isfinite(s) and math.isfinite(t)) or t < s:
            raise ValueError(f"invalid interval ({s}, {t}]")
        times = np.ascontiguousarray(self.times, dtype=np.float64)
        sizes = np.ascontiguousarray(self.sizes, dtype=np.float64)
        if times.ndim != 1 or sizes.shape != times.shape:
            raise ValueError("times and sizes must be 1-d arrays of equal length")
        if times.size:
            if np.any(np.diff(times) < 0.0):
                raise ValueError("jump times must be sorted ascending")
            if times[0] <= s or times[-1] > t:
                raise ValueError("jump times must lie in (s, t]")
            if not np.all(sizes > 0.0):
                raise ValueError("jump sizes must be strictly positive")
        values = self.values
        if values is not None:
            values = np.ascontiguousarray(values, dtype=np.float64)
            if values.shape != times.shape:
                raise ValueError("values must match times in shape")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.times.size)

    def merge(self, other: "JumpSequence") -> "JumpSequence":
        """Union of two sequences on the same interval, re-sorted by time."""
        if (self.s, self.t) != (other.s, other.t):
            raise ValueError("can only merge sequences on the same interval")
        if (self.values is None) != (other.values is None):
            raise ValueError("cannot merge a valued with an unvalued sequence")
        times = np.concatenate([self.times, other.times])
        sizes = np.concatenate([self.sizes, other.sizes])
        order = np.argsort(times, kind="stable")
        values = None
        if self.values is not None:
            values = np.concatenate([self.values, other.values])[order]
        return JumpSequence(self.s, self.t, times[order], sizes[order], values)


def _empty_sequence(s: float, t: float) -> JumpSequence:
    return JumpSequence(s, t, np.empty(0), np.empty(0))


@jit_kernel
def _poisson_epochs_kernel(rng, rate, ceiling):
    """Ascending epochs of a rate-`rate` Poisson process, cut at `ceiling`."""
    mean_count = rate * ceiling
    cap = int(mean_count + 4.0 * math.sqrt(mean_count + 1.0)) + 16
    buf = np.empty(cap)
    n = 0
    total = 0.0
    inv = 1.0 / rate
    while True:
        total += -math.log1p(-rng.random()) * inv
        if total > ceiling:
            break
        if n == cap:
            cap *= 2
            grown = np.empty(cap)
            grown[:n] = buf[:n]
            buf = grown
        buf[n] = total
        n += 1
    return buf[:n].copy()


@jit_kernel
def _ts_sizes_kernel(rng, c_eff, alpha, beta, ceiling):
    """Tempered stable jump sizes by thinning a stable shot-noise series.

    Candidates are x_i = (alpha Gamma_i / c_eff)^(-1/alpha) for unit-rate
    epochs Gamma_i, kept with probability exp(-beta x_i).  Epoch and
    thinning draws interleave per candidate.
    """
    cap = int(ceiling + 4.0 * math.sqrt(ceiling + 1.0)) + 16
    out = np.empty(cap)
    # Below this epoch scale the power overflows the double range; math.pow
    # raises on the uncompiled path where the compiled one returns inf.
    tiny = math.exp(-709.0 * alpha)
    m = 0
    n = 0
    max_acc = 0.0
    total = 0.0
    while True:
        total += -math.log1p(-rng.random())
        if total > ceiling:
            break
        n += 1
        base = alpha * total / c_eff
        if base < tiny:
            continue
        x = math.pow(base, -1.0 / alpha)
        acc = math.exp(-beta * x)
        if acc > max_acc:
            max_acc = acc
        if rng.random() < acc:
            if m == cap:
                cap *= 2
                grown = np.empty(cap)
                grown[:m] = out[:m]
                out = grown
            out[m] = x
            m += 1
    return out[:m].copy(), n, max_acc


@jit_kernel
def _gamma_sizes_kernel(rng, c_eff, beta, ceiling):
    """Gamma process jump sizes by thinning a dominating shot-noise series.

    Candidates are x_i = 1 / (beta (exp(Gamma_i / c_eff) - 1)), kept with
    probability (1 + beta x_i) exp(-beta x_i).  Sizes shrink monotonically
    with the epoch, so generation stops once they underflow to zero; the
    discarded remainder carries no mass.
    """
    cap = 64
    out = np.empty(cap)
    m = 0
    n = 0
    max_acc = 0.0
    total = 0.0
    while True:
        total += -math.log1p(-rng.random())
        if total > ceiling:
            break
        t = total / c_eff
        if t > 709.0:
            # Sizes from here on underflow to zero; expm1 would overflow on
            # the uncompiled path instead of returning inf.
            break
        denom = math.expm1(t)
        if denom <= 0.0:
            continue
        x = 1.0 / (beta * denom)
        if x <= 0.0:
            break
        n += 1
        bx = beta * x
        acc = (1.0 + bx) * math.exp(-bx)
        if acc > max_acc:
            max_acc = acc
        if rng.random() < acc:
            if m == cap:
                cap *= 2
                grown = np.empty(cap)
                grown[:m] = out[:m]
                out = grown
            out[m] = x
            m += 1
    return out[:m].copy(), n, max_acc


@jit_kernel
def _mark_sqrt_gamma_lower(rng, nu, w):
    """Mark z = z1 sqrt(y/w) with y ~ Gamma(nu, 1) conditioned on y <= w.

    Returns sqrt(y / w) in (0, 1]; inverse-CDF by bisection on log y to a
    relative tolerance of 1e-12.
    """
    u = rng.random()
    if u < 2.3e-16:
        u = 2.3e-16
    target = math.log(u) + _log_reg_lower_gamma(nu, w)
    hi = math.log(w)
    lo = hi
    flo = target + 0.0
    # Bracket downward; log P drops by about 8 nu per step.
    while True:
        flo = _log_reg_lower_gamma(nu, math.exp(lo))
        if flo <= target:
            break
        lo -= 8.0
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if _log_reg_lower_gamma(nu, math.exp(mid)) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1.0e-12:
            break
    return math.exp(0.25 * (lo + hi) - 0.5 * math.log(w))


@jit_kernel
def _gig_n1_sizes_kernel(rng, nu, delta, gamma, z1, dt, gamma_max):
    """GIG jumps from the z < z1 band (two thinned gamma dominating processes)."""
    two_d2 = 2.0 * delta * delta
    beta1 = 0.5 * gamma * gamma
    beta2 = beta1 + z1 * z1 / two_d2
    a1 = dt * z1 / (2.0 * _PI * nu * (1.0 + nu))
    a2 = dt * z1 / (2.0 * _PI * (1.0 + nu))
    ceiling = gamma_max * dt
    x1, n1, m1 = _gamma_sizes_kernel(rng, a1, beta1, ceiling)
    x2, n2, m2 = _gamma_sizes_kernel(rng, a2, beta2, ceiling)
    cand = np.concatenate((x1, x2))
    ncand = n1 + n2
    max_acc = max(m1, m2)
    lg_nu1 = math.lgamma(nu + 1.0)
    log_const6 = math.log(2.0) + (2.0 * nu - 1.0) * math.log(z1) - math.log(_PI)
    out = np.empty(cand.size)
    m = 0
    for i in range(cand.size):
        x = cand[i]
        w = x * z1 * z1 / two_d2
        # Ratio of the target band intensity to the dominating pair.
        acc = (
            _reg_lower_over_pow(nu, w)
            * math.exp(lg_nu1)
            * (1.0 + nu)
            / (1.0 + nu * math.exp(-w))
        )
        if acc > max_acc:
            max_acc = acc
        if rng.random() >= acc:
            continue
        ratio = _mark_sqrt_gamma_lower(rng, nu, w)
        z = z1 * ratio
        hsq = _hankel1_abs_sq(nu, z)
        log_acc6 = log_const6 - math.log(hsq) - 2.0 * nu * math.log(z)
        # Clamp before exponentiating: a grossly positive value means a broken
        # bound and is reported through the sentinel, not an overflow.
        acc6 = math.exp(min(log_acc6, 10.0))
        if acc6 > max_acc:
            max_acc = acc6
        if rng.random() < acc6:
            out[m] = x
            m += 1
    return out[:m].copy(), ncand, max_acc


@jit_kernel
def _gig_n2_sizes_kernel(rng, nu, delta, gamma, z1, dt, gamma_max):
    """GIG jumps from the z >= z1 band (thinned tempered stable dominator)."""
    two_d2 = 2.0 * delta * delta
    c_ts = dt * delta / math.sqrt(2.0 * _PI)
    beta_ts = z1 * z1 / two_d2 + 0.5 * gamma * gamma
    ceiling = gamma_max * dt
    xs, ncand, max_acc = _ts_sizes_kernel(rng, c_ts, 0.5, beta_ts, ceiling)
    out = np.empty(xs.size)
    m = 0
    for i in range(xs.size):
        x = xs[i]
        w = x * z1 * z1 / two_d2
        sw = math.sqrt(w)
        acc3 = _erfcx(sw)
        if acc3 > max_acc:
            max_acc = acc3
        if rng.random() >= acc3:
            continue
        v = rng.random()
        if v < 2.3e-16:
            v = 2.3e-16
        # Tail inverse-CDF: erfc(s) = v * erfc(sqrt(w)), s >= sqrt(w).
        s_mark = _erfcinv_from_log(math.log(v) + _log_erfc(sw))
        z = z1 * s_mark / sw
        if z < z1:
            z = z1
        acc5 = 2.0 / (_PI * z * _hankel1_abs_sq(nu, z))
        if acc5 > max_acc:
            max_acc = acc5
        if rng.random() < acc5:
            out[m] = x
            m += 1
    return out[:m].copy(), ncand, max_acc


@jit_kernel
def _attach_kernel(rng, sizes, mu_w, sigma_w):
    out = np.empty(sizes.size)
    for i in range(sizes.size):
        z = sizes[i]
        u = rng.random()
        if u <= 0.0:
            u = 2.3e-16
        elif u >= 1.0:
            u = 1.0 - 1.1e-16
        out[i] = mu_w * z + sigma_w * math.sqrt(z) * _normal_icdf(u)
    return out


def _check_bound(max_acc: float) -> None:
    if max_acc > 1.0 + ACCEPTANCE_TOL:
        raise BoundViolationError(
            f"acceptance probability {max_acc!r} exceeds 1 beyond tolerance; "
            "the dominating-process bound does not hold"
        )


def _check_interval(interval) -> tuple[float, float]:
    s, t = (float(interval[0]), float(interval[1]))
    if not (math.isfinite(s) and math.isfinite(t)):
        raise ValueError(f"interval endpoints must be finite, got {interval!r}")
    if t < s:
        raise ValueError(f"interval must satisfy s <= t, got ({s}, {t})")
    return s, t


def _draw_times(rng, s: float, t: float, n: int) -> np.ndarray:
    # t - (t - s) * u maps u in [0, 1) onto (s, t].
    return t - (t - s) * rng.random(n)


def _finish_sequence(rng, s, t, sizes) -> JumpSequence:
    times = _draw_times(rng, s, t, sizes.size)
    order = np.argsort(times, kind="stable")
    return JumpSequence(s, t, times[order], sizes[order])


def poisson_epochs(rate: float, budget: TruncationBudget, rng) -> np.ndarray:
    """Ascending unit-interval Poisson epochs, stopped at ``budget.gamma_max``.

    Increments are Exp(1)/rate; the first epoch past the ceiling is
    discarded along with everything after it.  Samplers fold interval
    lengths into their shape constants and scale the ceiling accordingly,
    so this building block always works on the unit epoch axis.
    """
    rate = float(rate)
    if not math.isfinite(rate) or rate <= 0.0:
        raise ValueError(f"rate must be finite and > 0, got {rate!r}")
    return _poisson_epochs_kernel(rng, rate, budget.gamma_max)


def sample_tempered_stable(
    c: float,
    alpha: float,
    beta: float,
    interval,
    budget: TruncationBudget,
    rng,
    return_diagnostics: bool = False,
):
    """Jumps of a tempered stable subordinator with density c x^(-1-alpha) e^(-beta x).

    Parameters
    ----------
    c, alpha, beta : float
        Levy density constants, 0 < alpha < 1, beta >= 0 (beta = 0 gives the
        plain stable series).
    interval : (float, float)
        Time interval (s, t]; jump times are uniform on it.
    budget : TruncationBudget
        Poisson epoch ceiling per unit time.
    rng : numpy.random.Generator
        Source of randomness, consumed in a fixed order.
    """
    s, t = _check_interval(interval)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if c <= 0.0 or beta < 0.0:
        raise ValueError("c must be > 0 and beta >= 0")
    dt = t - s
    if dt == 0.0:
        seq = _empty_sequence(s, t)
        return (seq, SamplerDiagnostics()) if return_diagnostics else seq
    sizes, ncand, max_acc = _ts_sizes_kernel(
        rng, c * dt, float(alpha), float(beta), budget.gamma_max * dt
    )
    _check_bound(max_acc)
    seq = _finish_sequence(rng, s, t, sizes)
    if return_diagnostics:
        return seq, SamplerDiagnostics(int(ncand), float(max_acc))
    return seq


def sample_gamma_process(
    c: float,
    beta: float,
    interval,
    budget: TruncationBudget,
    rng,
    return_diagnostics: bool = False,
):
    """Jumps of a gamma subordinator with Levy density c x^(-1) e^(-beta x)."""
    s, t = _check_interval(interval)
    if c <= 0.0 or beta <= 0.0:
        raise ValueError("c and beta must be > 0")
    dt = t - s
    if dt == 0.0:
        seq = _empty_sequence(s, t)
        return (seq, SamplerDiagnostics()) if return_diagnostics else seq
    sizes, ncand, max_acc = _gamma_sizes_kernel(
        rng, c * dt, float(beta), budget.gamma_max * dt
    )
    _check_bound(max_acc)
    seq = _finish_sequence(rng, s, t, sizes)
    if return_diagnostics:
        return seq, SamplerDiagnostics(int(ncand), float(max_acc))
    return seq


def z1_upper_bound(lam: float) -> float:
    """Largest admissible split point z1 for the GIG band construction.

    Defined for |lam| > 0.5; the exponent degenerates at |lam| = 0.5 where
    the bound expression is a 1^inf form and the construction itself is not
    available.
    """
    nu = abs(float(lam))
    if not math.isfinite(nu) or nu <= 0.5:
        raise ValueError(
            f"z1_upper_bound requires |lam| > 0.5, got lam = {lam!r}; "
            "the exponent 1/(1 - 2|lam|) degenerates at |lam| = 0.5"
        )
    base = math.pow(2.0, 1.0 - 2.0 * nu) * _PI / math.gamma(nu) ** 2
    return math.pow(base, 1.0 / (1.0 - 2.0 * nu))


def _resolve_z1(params: GIGParams, z1) -> float:
    bound = z1_upper_bound(params.lam)
    if isinstance(z1, str):
        if z1 == "auto":
            return bound
        raise ValueError(f"z1 must be a positive float or 'auto', got {z1!r}")
    z1 = float(z1)
    # Allow one ulp of slack so a round-tripped bound still validates.
    if not 0.0 < z1 <= bound * (1.0 + 1e-12):
        raise ValueError(f"z1 must lie in (0, {bound}], got {z1}")
    return min(z1, bound)


def sample_gig_n1(
    params: GIGParams,
    z1,
    interval,
    budget: TruncationBudget,
    rng,
    return_diagnostics: bool = False,
):
    """GIG jumps whose auxiliary Bessel variable falls below z1."""
    s, t = _check_interval(interval)
    z1 = _resolve_z1(params, z1)
    dt = t - s
    if dt == 0.0:
        seq = _empty_sequence(s, t)
        return (seq, SamplerDiagnostics()) if return_diagnostics else seq
    sizes, ncand, max_acc = _gig_n1_sizes_kernel(
        rng, params.abs_lam, params.delta, params.gamma, z1, dt, budget.gamma_max
    )
    _check_bound(max_acc)
    seq = _finish_sequence(rng, s, t, sizes)
    if return_diagnostics:
        return seq, SamplerDiagnostics(int(ncand), float(max_acc))
    return seq


def sample_gig_n2(
    params: GIGParams,
    z1,
    interval,
    budget: TruncationBudget,
    rng,
    return_diagnostics: bool = False,
):
    """GIG jumps whose auxiliary Bessel variable falls on [z1, inf)."""
    s, t = _check_interval(interval)
    z1 = _resolve_z1(params, z1)
    dt = t - s
    if dt == 0.0:
        seq = _empty_sequence(s, t)
        return (seq, SamplerDiagnostics()) if return_diagnostics else seq
    sizes, ncand, max_acc = _gig_n2_sizes_kernel(
        rng, params.abs_lam, params.delta, params.gamma, z1, dt, budget.gamma_max
    )
    _check_bound(max_acc)
    seq = _finish_sequence(rng, s, t, sizes)
    if return_diagnostics:
        return seq, SamplerDiagnostics(int(ncand), float(max_acc))
    return seq


def sample_gig(
    params: GIGParams,
    interval,
    budget: TruncationBudget,
    rng,
    z1="auto",
    return_diagnostics: bool = False,
):
    """Jumps of a GIG subordinator on (s, t], the union of both bands.

    Randomness is consumed in a fixed order: the z < z1 band first (its two
    dominating gamma series, then thinning and marking draws), the
    z >= z1 band second, jump times last.
    """
    s, t = _check_interval(interval)
    z1 = _resolve_z1(params, z1)
    dt = t - s
    if dt == 0.0:
        seq = _empty_sequence(s, t)
        return (seq, SamplerDiagnostics()) if return_diagnostics else seq
    sizes1, n1, m1 = _gig_n1_sizes_kernel(
        rng, params.abs_lam, params.delta, params.gamma, z1, dt, budget.gamma_max
    )
    sizes2, n2, m2 = _gig_n2_sizes_kernel(
        rng, params.abs_lam, params.delta, params.gamma, z1, dt, budget.gamma_max
    )
    max_acc = max(m1, m2)
    _check_bound(max_acc)
    seq = _finish_sequence(rng, s, t, np.concatenate((sizes1, sizes2)))
    if return_diagnostics:
        return seq, SamplerDiagnostics(int(n1 + n2), float(max_acc))
    return seq


def attach_gh_jumps(seq: JumpSequence, gh: GHParams, rng) -> JumpSequence:
    """Attach GH jump values W_i = mu_w Z_i + sigma_w sqrt(Z_i) U_i."""
    values = _attach_kernel(rng, seq.sizes, gh.mu_w, gh.sigma_w)
    return JumpSequence(seq.s, seq.t, seq.times, seq.sizes, values)


def shot_noise_path(seq: JumpSequence, query_times) -> np.ndarray:
    """Partial sums W(t) = sum of W_i over V_i <= t at the query times.

    Query times may fall anywhere in [s, t]; the path is a right-continuous
    step function starting at 0.
    """
    if seq.values is None:
        raise ValueError("sequence has no attached jump values; call attach_gh_jumps")
    q = np.atleast_1d(np.asarray(query_times, dtype=np.float64))
    cum = np.cumsum(seq.values)
    idx = np.searchsorted(seq.times, q, side="right")
    if cum.size == 0:
        out = np.zeros(q.shape)
    else:
        out = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)
    return out if np.ndim(query_times) else float(out[0])
