"""Linear SDEs driven by GH jump processes.

A model dx = A x dt + L dW with scalar noisy observations y = H x + eps has,
conditionally on the jumps (V_i, Z_i) of the driving subordinator on (s, t],
an exactly Gaussian transition

    x_t | x_s, jumps ~ N(F x_s + m, S),
    F = exp(A (t - s)),
    m = sum_i f_t(V_i) mu_w Z_i + mu (t - s) L,
    S = sum_i f_t(V_i) f_t(V_i)^T sigma_w^2 Z_i,

with f_t(u) = exp(A (t - u)) L.  The Langevin model (position/velocity with
mean-reverting velocity) carries closed forms for all of these and is the
hot path of the filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .accel import jit_kernel
from .jumps import JumpSequence, sample_gig
from .numerics import _normal_icdf
from .params import GHParams, TruncationBudget

# Pade-13 numerator coefficients for the scaling-and-squaring exponential.
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_PADE13_THETA = 5.371920351148152


def expm(M: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Pade approximant.

    Intended for the small (D <= 8) state matrices used here; relative
    accuracy is far better than the 1e-10 the transition math needs.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expm expects a square matrix, got shape {M.shape}")
    d = M.shape[0]
    eye = np.eye(d)
    norm = np.linalg.norm(M, 1)
    if norm == 0.0:
        return eye.copy()
    s = 0
    if norm > _PADE13_THETA:
        s = int(math.ceil(math.log2(norm / _PADE13_THETA)))
    A = M / (2.0**s)
    b = _PADE13
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A2 @ A4
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6
        + b[5] * A4
        + b[3] * A2
        + b[1] * eye
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6
        + b[4] * A4
        + b[2] * A2
        + b[0] * eye
    )
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


def langevin_expm(theta: float, dt: float) -> np.ndarray:
    """Closed-form exp(A dt) for A = [[0, 1], [0, theta]]."""
    g = math.expm1(theta * dt) / theta
    return np.array([[1.0, g], [0.0, 1.0 + theta * g]])


def langevin_ft(theta: float, t: float, times: np.ndarray) -> np.ndarray:
    """Rows f_t(V_i) = exp(A (t - V_i)) L for the Langevin model."""
    times = np.asarray(times, dtype=np.float64)
    g = np.expm1(theta * (t - times)) / theta
    return np.stack([g, 1.0 + theta * g], axis=-1)


@jit_kernel
def _langevin_moments_kernel(theta, mu_w, sigma_w, mu, s, t, times, sizes):
    m1 = 0.0
    m2 = 0.0
    s11 = 0.0
    s12 = 0.0
    s22 = 0.0
    for i in range(times.size):
        f1 = math.expm1(theta * (t - times[i])) / theta
        f2 = 1.0 + theta * f1
        z = sizes[i]
        m1 += f1 * z
        m2 += f2 * z
        s11 += f1 * f1 * z
        s12 += f1 * f2 * z
        s22 += f2 * f2 * z
    sw2 = sigma_w * sigma_w
    drift = mu * (t - s)
    return m1 * mu_w, m2 * mu_w + drift, s11 * sw2, s12 * sw2, s22 * sw2


@dataclass(frozen=True)
class CondGaussMoments:
    """Conditionally Gaussian transition moments given a jump sequence."""

    m: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        m = np.ascontiguousarray(self.m, dtype=np.float64)
        S = np.ascontiguousarray(self.S, dtype=np.float64)
        if m.ndim != 1 or S.shape != (m.size, m.size):
            raise ValueError("m must be (D,) and S must be (D, D)")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "S", S)


@dataclass(frozen=True)
class LinearSSM:
    """Linear SDE dx = A x dt + L dW with scalar observations y = H x + eps."""

    A: np.ndarray
    L: np.ndarray
    H: np.ndarray
    sigma_eps: float
    gh: GHParams

    def __post_init__(self):
        A = np.ascontiguousarray(self.A, dtype=np.float64)
        L = np.ascontiguousarray(self.L, dtype=np.float64).reshape(-1)
        H = np.ascontiguousarray(self.H, dtype=np.float64).reshape(-1)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        d = A.shape[0]
        if L.size != d or H.size != d:
            raise ValueError("L and H must have one entry per state dimension")
        sigma_eps = float(self.sigma_eps)
        if not math.isfinite(sigma_eps) or sigma_eps < 0.0:
            raise ValueError(f"sigma_eps must be finite and >= 0, got {sigma_eps!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "sigma_eps", sigma_eps)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def expm(self, dt: float) -> np.ndarray:
        """State transition matrix exp(A dt)."""
        return expm(self.A * float(dt))

    def ft(self, t: float, times: np.ndarray) -> np.ndarray:
        """Rows exp(A (t - V_i)) L for each jump time V_i."""
        times = np.asarray(times, dtype=np.float64)
        out = np.empty((times.size, self.dim))
        for i, v in enumerate(times):
            out[i] = expm(self.A * (t - v)) @ self.L
        return out

    def cond_moments(self, seq: JumpSequence, interval) -> CondGaussMoments:
        """Transition moments (m, S) given the jumps on the interval."""
        s, t = float(interval[0]), float(interval[1])
        gh = self.gh
        fs = self.ft(t, seq.times)
        wz = gh.mu_w * seq.sizes
        m = fs.T @ wz + gh.mu * (t - s) * self.L
        S = (fs.T * (gh.sigma_w**2 * seq.sizes)) @ fs
        return CondGaussMoments(m, 0.5 * (S + S.T))


class LangevinSSM(LinearSSM):
    """Position/velocity model with mean-reverting velocity driven by GH noise.

    The state matrix is A = [[0, 1], [0, theta]] with theta < 0, the noise
    enters through L = (0, 1) and position is observed: H = (1, 0).
    """

    theta: float

    def __init__(self, theta: float, sigma_eps: float, gh: GHParams):
        theta = float(theta)
        if not math.isfinite(theta) or theta >= 0.0:
            raise ValueError(f"theta must be finite and < 0, got {theta!r}")
        A = np.array([[0.0, 1.0], [0.0, theta]])
        L = np.array([0.0, 1.0])
        H = np.array([1.0, 0.0])
        super().__init__(A=A, L=L, H=H, sigma_eps=sigma_eps, gh=gh)
        object.__setattr__(self, "theta", theta)

    def expm(self, dt: float) -> np.ndarray:
        return langevin_expm(self.theta, float(dt))

    def ft(self, t: float, times: np.ndarray) -> np.ndarray:
        return langevin_ft(self.theta, float(t), times)

    def cond_moments(self, seq: JumpSequence, interval) -> CondGaussMoments:
        s, t = float(interval[0]), float(interval[1])
        gh = self.gh
        m1, m2, s11, s12, s22 = _langevin_moments_kernel(
            self.theta, gh.mu_w, gh.sigma_w, gh.mu, s, t, seq.times, seq.sizes
        )
        return CondGaussMoments(
            np.array([m1, m2]), np.array([[s11, s12], [s12, s22]])
        )


def _std_normal(rng) -> float:
    u = rng.random()
    if u < 2.3e-16:
        u = 2.3e-16
    elif u > 1.0 - 1.1e-16:
        u = 1.0 - 1.1e-16
    return _normal_icdf(u)


def psd_sqrt(S: np.ndarray, floor: float = -1.0e-12) -> np.ndarray:
    """Symmetric square root of a PSD matrix, clipping tiny negative modes.

    Eigenvalues below ``floor`` raise, since they indicate a genuinely
    indefinite matrix rather than roundoff.
    """
    S = np.asarray(S, dtype=np.float64)
    w, v = np.linalg.eigh(0.5 * (S + S.T))
    if w.min(initial=0.0) < floor:
        raise ValueError(f"matrix has eigenvalue {w.min()} below floor {floor}")
    w = np.clip(w, 0.0, None)
    return v * np.sqrt(w)


def transition_sample(ssm: LinearSSM, x_s: np.ndarray, seq: JumpSequence, rng) -> np.ndarray:
    """Draw x_t | x_s and the jumps on (seq.s, seq.t] from the exact Gaussian."""
    x_s = np.asarray(x_s, dtype=np.float64)
    mom = ssm.cond_moments(seq, (seq.s, seq.t))
    F = ssm.expm(seq.t - seq.s)
    root = psd_sqrt(mom.S)
    xi = np.array([_std_normal(rng) for _ in range(ssm.dim)])
    return F @ x_s + mom.m + root @ xi


def simulate_path(
    ssm: LinearSSM,
    x0: np.ndarray,
    times,
    budget: TruncationBudget,
    rng,
    t0: float = 0.0,
    z1="auto",
):
    """Forward-simulate states and noisy observations at the given times.

    Returns ``(states, observations, jump_sequences)`` where states has one
    row per requested time, observations are H x + sigma_eps * N(0, 1) and
    jump_sequences holds the subordinator jumps of each interval.  The
    generator is consumed sequentially: jumps, then state noise, then
    observation noise, interval by interval.
    """
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a non-empty 1-d array")
    if times[0] <= t0 or np.any(np.diff(times) <= 0.0):
        raise ValueError("times must be strictly ascending and start after t0")
    x = np.asarray(x0, dtype=np.float64).copy()
    if x.shape != (ssm.dim,):
        raise ValueError(f"x0 must have shape ({ssm.dim},)")
    states = np.empty((times.size, ssm.dim))
    obs = np.empty(times.size)
    seqs = []
    prev = float(t0)
    for k, t in enumerate(times):
        seq = sample_gig(ssm.gh.gig, (prev, t), budget, rng, z1=z1)
        x = transition_sample(ssm, x, seq, rng)
        states[k] = x
        obs[k] = float(ssm.H @ x) + ssm.sigma_eps * _std_normal(rng)
        seqs.append(seq)
        prev = float(t)
    return states, obs, seqs
