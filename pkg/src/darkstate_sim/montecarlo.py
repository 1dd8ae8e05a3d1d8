"""Quantum-trajectory unraveling of the conditional dynamics.

Each trajectory starting from |010> experiences at most one jump: the
excitation either leaks through the cavity mirrors, is emitted spontaneously
by one of the atoms, or survives (asymptotically trapped in the dark state).
The waiting time is sampled by inverting the survival law P0(t) = u with a
uniform u, and the channel is chosen from the instantaneous rate weights
(2 kappa |c_100|^2 : 2 gamma |c_010|^2 : 2 gamma |c_001|^2) at the jump.

Randomness is counter-based: trajectory ``index`` under master ``seed``
consumes exactly one Philox block, ``Generator(Philox(key=seed,
counter=index)).random(4)`` — (waiting, channel, detection, spare).  The
outcome stream is therefore a pure function of (seed, index), independent of
chunking and of the worker count used to evaluate it.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import EmptyGridError, InvalidUniformError, NegativeTimeError, ZeroRateError
from .model import Parameters, StateVector, initial_state
from .propagator import Propagator, conditional_state

# Bisection depth: halving [0, horizon] 60 times lands far below both the
# 1e-10 relative time tolerance and the 1e-9 self-consistency residual.
_BISECTION_STEPS = 60

_DRAWS_PER_TRAJECTORY = 4  # one Philox block
_CHUNK = 16384

_CODE_CAVITY, _CODE_SPON_A, _CODE_SPON_B, _CODE_NONE = 0, 1, 2, -1


class Channel(enum.Enum):
    """Decay port that fired first, or NONE for a surviving trajectory."""

    CAVITY = "cavity"
    SPON_A = "spon_a"
    SPON_B = "spon_b"
    NONE = "none"


_CODE_TO_CHANNEL = {
    _CODE_CAVITY: Channel.CAVITY,
    _CODE_SPON_A: Channel.SPON_A,
    _CODE_SPON_B: Channel.SPON_B,
    _CODE_NONE: Channel.NONE,
}


@dataclasses.dataclass(frozen=True)
class TrajectoryOutcome:
    """Result of one conditional trajectory.

    ``first_jump_time`` is None when no jump occurred within the horizon
    (channel NONE); ``detected`` is True only for CAVITY jumps that passed
    the detector-efficiency thinning.
    """

    first_jump_time: float | None
    channel: Channel
    detected: bool


@dataclasses.dataclass(frozen=True, eq=False)
class EnsembleEstimate:
    """Frequency estimates of the emission budget on a time grid.

    At each grid time, every trajectory is in exactly one bin: not yet
    jumped (p0), jumped through the mirrors (p_cav), or jumped spontaneously
    (p_spon), so the three frequencies partition the ensemble.  ``*_stderr``
    are the binomial standard errors sqrt(p(1-p)/n).
    """

    n: int
    t_grid: np.ndarray
    p0_hat: np.ndarray
    p_cav_hat: np.ndarray
    p_spon_hat: np.ndarray
    p0_stderr: np.ndarray
    p_cav_stderr: np.ndarray
    p_spon_stderr: np.ndarray


def default_horizon(params: Parameters) -> float:
    """Sampling horizon: 15 spontaneous lifetimes, or 50/kappa when gamma=0."""
    if params.gamma > 0.0:
        return 15.0 / params.gamma
    return 50.0 / params.kappa


def _uniform_blocks(seed: int, start: int, count: int) -> np.ndarray:
    """The (count, 4) uniform draws for trajectories start..start+count-1."""
    bitgen = np.random.Philox(key=seed, counter=start)
    return np.random.Generator(bitgen).random((count, _DRAWS_PER_TRAJECTORY))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return seed


def _survival_from_initial(params: Parameters, t):
    amps = conditional_state(params, t)
    return np.sum(amps**2, axis=-1)


def sample_waiting_time(
    prop: Propagator, state: StateVector, u: float, horizon: float | None = None
) -> float | None:
    """Invert the survival law: the t with ||U(t) state||^2 = u.

    ``u`` must lie in (0, 1]; u = 1 maps to t = 0 exactly.  Returns None when
    the survival at the horizon still exceeds u (no jump within the horizon;
    for gamma = 0 this happens with the finite probability of the dark
    weight).  The root is bracketed by [0, horizon] and bisected to well
    below 1e-10 * horizon.
    """
    if not (isinstance(u, (int, float)) and math.isfinite(u)) or not 0.0 < u <= 1.0:
        raise InvalidUniformError(f"waiting-time uniform must be in (0, 1], got {u!r}")
    if horizon is None:
        horizon = default_horizon(prop.generator.params)
    horizon = float(horizon)
    if horizon <= 0.0:
        raise NegativeTimeError("horizon must be positive")
    if u == 1.0:
        return 0.0
    if u <= prop.survival(state, horizon):
        return None
    lo, hi = 0.0, horizon
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if prop.survival(state, mid) > u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classify_jump(prop: Propagator, state_at_jump: StateVector, v: float) -> Channel:
    """Pick the emission channel from the rate weights at the jump moment.

    Thresholds are cumulative in the fixed order CAVITY, SPON_A, SPON_B:
    v < w_cav/w1 selects CAVITY, v < (w_cav+w_a)/w1 selects SPON_A, and
    SPON_B otherwise.
    """
    if not (isinstance(v, (int, float)) and math.isfinite(v)) or not 0.0 <= v <= 1.0:
        raise InvalidUniformError(f"channel uniform must be in [0, 1], got {v!r}")
    params = prop.generator.params
    weights = np.abs(state_at_jump.amplitudes) ** 2
    w_cav = 2.0 * params.kappa * weights[0]
    w_a = 2.0 * params.gamma * weights[1]
    w_b = 2.0 * params.gamma * weights[2]
    total = w_cav + w_a + w_b
    if total <= 0.0:
        raise ZeroRateError("total emission rate vanishes at the jump state")
    if v < w_cav / total:
        return Channel.CAVITY
    if v < (w_cav + w_a) / total:
        return Channel.SPON_A
    return Channel.SPON_B


def simulate_trajectories(
    params: Parameters,
    seed: int,
    start: int,
    count: int,
    horizon: float | None = None,
):
    """Vectorized batch of trajectories ``start .. start+count-1`` from |010>.

    Returns (times, codes, detected): jump times (NaN when none), channel
    codes (0 cavity, 1 spontaneous from atom a, 2 from atom b, -1 none), and
    the detector-thinning flags.  Identical results regardless of how the
    index range is split into batches.
    """
    seed = _check_seed(seed)
    if start < 0 or count < 1:
        raise ValueError("need start >= 0 and count >= 1")
    if horizon is None:
        horizon = default_horizon(params)
    horizon = float(horizon)
    if horizon <= 0.0:
        raise NegativeTimeError("horizon must be positive")

    draws = _uniform_blocks(seed, start, count)
    u = 1.0 - draws[:, 0]  # in (0, 1]: u = 1 must map to t = 0 exactly
    v = draws[:, 1]
    detect_draw = draws[:, 2]

    times = np.full(count, np.nan)
    codes = np.full(count, _CODE_NONE, dtype=np.int8)
    detected = np.zeros(count, dtype=bool)

    survival_end = float(_survival_from_initial(params, horizon))
    jumping = u > survival_end
    if not np.any(jumping):
        return times, codes, detected

    u_j = u[jumping]
    lo = np.zeros(u_j.shape)
    hi = np.full(u_j.shape, horizon)
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        above = _survival_from_initial(params, mid) > u_j
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    t_jump = np.where(u_j >= 1.0, 0.0, 0.5 * (lo + hi))

    amps = conditional_state(params, t_jump)
    weights = amps**2
    w_cav = 2.0 * params.kappa * weights[:, 0]
    w_a = 2.0 * params.gamma * weights[:, 1]
    w_b = 2.0 * params.gamma * weights[:, 2]
    total = w_cav + w_a + w_b
    if np.any(total <= 0.0):
        raise ZeroRateError("total emission rate vanishes at a sampled jump")
    v_j = v[jumping]
    code_j = np.where(
        v_j < w_cav / total,
        _CODE_CAVITY,
        np.where(v_j < (w_cav + w_a) / total, _CODE_SPON_A, _CODE_SPON_B),
    ).astype(np.int8)

    times[jumping] = t_jump
    codes[jumping] = code_j
    detected[jumping] = (code_j == _CODE_CAVITY) & (detect_draw[jumping] < params.eta)
    return times, codes, detected


def simulate_trajectory(
    params: Parameters, seed: int, index: int, horizon: float | None = None
) -> TrajectoryOutcome:
    """Outcome of the single trajectory ``index`` under master ``seed``."""
    times, codes, detected = simulate_trajectories(params, seed, index, 1, horizon)
    time = None if math.isnan(times[0]) else float(times[0])
    return TrajectoryOutcome(
        first_jump_time=time,
        channel=_CODE_TO_CHANNEL[int(codes[0])],
        detected=bool(detected[0]),
    )


def _worker_count(requested: int | None) -> int:
    cap_env = os.environ.get("DARKSTATE_THREADS")
    cap = None
    if cap_env is not None:
        try:
            cap = int(cap_env)
        except ValueError as exc:
            raise ValueError(f"DARKSTATE_THREADS must be an integer, got {cap_env!r}") from exc
    if requested is None:
        requested = cap if cap is not None else 1
    if cap is not None:
        requested = min(requested, cap)
    return max(1, int(requested))


def _tally_chunk(params, seed, start, count, horizon, grid):
    times, codes, _ = simulate_trajectories(params, seed, start, count, horizon)
    cavity_times = np.sort(times[codes == _CODE_CAVITY])
    spon_times = np.sort(times[(codes == _CODE_SPON_A) | (codes == _CODE_SPON_B)])
    n_cav = np.searchsorted(cavity_times, grid, side="right").astype(np.int64)
    n_spon = np.searchsorted(spon_times, grid, side="right").astype(np.int64)
    return n_cav, n_spon


def run_ensemble(
    params: Parameters,
    n: int,
    t_grid,
    seed: int,
    workers: int | None = None,
) -> EnsembleEstimate:
    """Frequency estimates of (P0, P_cav, P_spon) from n trajectories.

    Trajectories are simulated in fixed-size chunks whose per-index
    randomness never depends on the partitioning, so the estimate is
    bit-identical for any worker count.  ``workers`` defaults to the
    DARKSTATE_THREADS environment variable (which also caps an explicit
    request), else 1.
    """
    n = int(n)
    if n < 1:
        raise ValueError("ensemble size n must be at least 1")
    seed = _check_seed(seed)
    grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if grid.size == 0:
        raise EmptyGridError("t_grid must contain at least one time")
    if np.any(grid < 0.0):
        raise NegativeTimeError("grid times must be nonnegative")
    if np.any(np.diff(grid) < 0.0):
        raise ValueError("t_grid must be sorted in ascending order")

    horizon = max(default_horizon(params), float(grid[-1]))
    starts = list(range(0, n, _CHUNK))
    jobs = [(start, min(_CHUNK, n - start)) for start in starts]

    worker_count = _worker_count(workers)
    if worker_count > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=worker_count) as pool:
            results = list(
                pool.map(
                    lambda job: _tally_chunk(params, seed, job[0], job[1], horizon, grid),
                    jobs,
                )
            )
    else:
        results = [_tally_chunk(params, seed, s, c, horizon, grid) for s, c in jobs]

    n_cav = np.zeros(grid.shape, dtype=np.int64)
    n_spon = np.zeros(grid.shape, dtype=np.int64)
    for cav, spon in results:
        n_cav += cav
        n_spon += spon
    n_p0 = n - n_cav - n_spon

    def _freq_and_err(counts):
        freq = counts / n
        err = np.sqrt(freq * (1.0 - freq) / n)
        return freq, err

    p0_hat, p0_err = _freq_and_err(n_p0)
    p_cav_hat, p_cav_err = _freq_and_err(n_cav)
    p_spon_hat, p_spon_err = _freq_and_err(n_spon)
    grid = grid.copy()
    grid.setflags(write=False)
    return EnsembleEstimate(
        n=n,
        t_grid=grid,
        p0_hat=p0_hat,
        p_cav_hat=p_cav_hat,
        p_spon_hat=p_spon_hat,
        p0_stderr=p0_err,
        p_cav_stderr=p_cav_err,
        p_spon_stderr=p_spon_err,
    )
