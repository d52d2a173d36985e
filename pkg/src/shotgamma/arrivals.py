"""Shot-noise Cox process driving the initiation of degradation processes.

Shocks arrive as a homogeneous Poisson process and each shock adds an
exponentially decaying bump to the arrival intensity on top of a constant
base level. Degradation-process arrival times are sampled exactly by
thinning against a piecewise-constant dominating rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class ShotNoiseParams:
    """Parameters of the stochastic arrival intensity.

    ``lambda0`` is the constant Poisson base level, ``mu`` the shock rate and
    ``delta`` the exponential decay rate of each shock's contribution. With
    ``mu = 0`` the process degenerates to a homogeneous Poisson process of
    rate ``lambda0``.
    """

    lambda0: float
    mu: float
    delta: float

    def __post_init__(self):
        if self.lambda0 < 0:
            raise ValidationError("lambda0 must be non-negative")
        if self.mu < 0:
            raise ValidationError("mu must be non-negative")
        if self.delta <= 0:
            raise ValidationError("delta must be positive")

    @property
    def stationary_intensity(self) -> float:
        """Long-run mean of the stochastic intensity."""
        return self.lambda0 + self.mu / self.delta


def _validate_times(times: np.ndarray, horizon: float, what: str) -> np.ndarray:
    times = np.asarray(times, float)
    if times.ndim != 1:
        raise ValidationError(f"{what} must be a 1-d array of times")
    if times.size and (times[0] < 0 or times[-1] > horizon):
        raise ValidationError(f"{what} must lie within [0, horizon]")
    if times.size > 1 and np.any(np.diff(times) <= 0):
        raise ValidationError(f"{what} must be strictly increasing")
    return times


@dataclass(frozen=True)
class ShockTrajectory:
    """Sorted shock times on ``[0, horizon]``."""

    horizon: float
    shock_times: np.ndarray

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValidationError("horizon must be positive")
        object.__setattr__(
            self, "shock_times", _validate_times(self.shock_times, self.horizon, "shock times")
        )


@dataclass(frozen=True)
class ArrivalTrajectory:
    """Sorted degradation-process arrival times on ``[0, horizon]``."""

    horizon: float
    arrival_times: np.ndarray

    def __post_init__(self):
        if self.horizon <= 0:
            raise ValidationError("horizon must be positive")
        object.__setattr__(
            self,
            "arrival_times",
            _validate_times(self.arrival_times, self.horizon, "arrival times"),
        )

    def count_by(self, t: float) -> int:
        return int(np.searchsorted(self.arrival_times, t, side="right"))


def intensity_at(params: ShotNoiseParams, shocks: ShockTrajectory, s) -> np.ndarray:
    """Stochastic arrival intensity at time(s) ``s`` given a shock history.

    Right-continuous with a unit jump at every shock time; never below the
    base level.
    """
    s_arr = np.asarray(s, float)
    if np.any(s_arr < 0) or np.any(s_arr > shocks.horizon):
        raise ValidationError("evaluation time outside the shock trajectory horizon")
    lags = s_arr[..., None] - shocks.shock_times
    contrib = np.where(lags >= 0, np.exp(-params.delta * np.where(lags >= 0, lags, 0.0)), 0.0)
    out = params.lambda0 + contrib.sum(axis=-1)
    return float(out) if np.isscalar(s) else out


def expected_intensity(params: ShotNoiseParams, s) -> np.ndarray:
    """Mean of the stochastic intensity at time(s) ``s``.

    Rises monotonically from the base level to ``lambda0 + mu/delta``.
    """
    s_arr = np.asarray(s, float)
    if np.any(s_arr < 0):
        raise ValidationError("time must be non-negative")
    out = params.lambda0 + params.mu / params.delta * (-np.expm1(-params.delta * s_arr))
    return float(out) if np.isscalar(s) else out


def expected_num_arrivals(params: ShotNoiseParams, s) -> np.ndarray:
    """Expected number of degradation-process arrivals by time(s) ``s``.

    Time integral of :func:`expected_intensity`:
    ``lambda0*s + mu*s/delta + mu/delta**2 * (exp(-delta*s) - 1)``.
    """
    s_arr = np.asarray(s, float)
    if np.any(s_arr < 0):
        raise ValidationError("time must be non-negative")
    d = params.delta
    out = params.lambda0 * s_arr + params.mu * s_arr / d + params.mu / d**2 * np.expm1(-d * s_arr)
    return float(out) if np.isscalar(s) else out


def simulate_shocks(
    params: ShotNoiseParams, horizon: float, rng: np.random.Generator
) -> ShockTrajectory:
    """Sample the homogeneous Poisson shock process on ``[0, horizon]``."""
    if horizon <= 0:
        raise ValidationError("horizon must be positive")
    n = rng.poisson(params.mu * horizon)
    times = np.sort(rng.uniform(0.0, horizon, size=n))
    return ShockTrajectory(horizon=horizon, shock_times=times)


def _thin_arrivals(
    params: ShotNoiseParams,
    shock_times: np.ndarray,
    start: float,
    stop: float,
    carry: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Thinning on ``(start, stop]`` against a piecewise-constant bound.

    ``carry`` is the summed shock contribution at ``start`` from shocks
    before ``start``; ``shock_times`` are the shocks inside ``(start, stop]``.
    The dominating rate on each inter-shock segment is the intensity at the
    segment's left edge frozen there (the decaying kernel only falls in
    between), refreshed at each shock. It never exceeds the base level plus
    the shock count, which the sampler asserts on every proposal.
    """
    if stop <= start:
        return np.empty(0)
    delta = params.delta
    edges = np.concatenate(([start], shock_times, [stop]))
    lengths = np.diff(edges)
    n_seg = lengths.size
    # Exact shock contribution at each segment's left edge.
    seg_carry = np.empty(n_seg)
    seg_carry[0] = carry
    for j in range(1, n_seg):
        seg_carry[j] = seg_carry[j - 1] * np.exp(-delta * (edges[j] - edges[j - 1])) + 1.0
    bounds = params.lambda0 + seg_carry
    counts = rng.poisson(bounds * lengths)
    total = int(counts.sum())
    if total == 0:
        return np.empty(0)
    seg_idx = np.repeat(np.arange(n_seg), counts)
    proposals = edges[seg_idx] + rng.uniform(size=total) * lengths[seg_idx]
    lam = params.lambda0 + seg_carry[seg_idx] * np.exp(-delta * (proposals - edges[seg_idx]))
    bound_at = bounds[seg_idx]
    loose_bound = params.lambda0 + carry + np.searchsorted(shock_times, proposals, side="right")
    if np.any(lam > bound_at * (1 + 1e-12)) or np.any(lam > loose_bound * (1 + 1e-12)):
        raise AssertionError("thinning dominating bound violated")
    keep = rng.uniform(size=total) * bound_at <= lam
    return np.sort(proposals[keep])


def simulate_arrivals(
    params: ShotNoiseParams,
    shocks: ShockTrajectory,
    horizon: float,
    rng: np.random.Generator,
) -> ArrivalTrajectory:
    """Sample arrival times on ``[0, horizon]`` conditional on the shocks.

    Exact (no discretization): Ogata-style thinning with the dominating rate
    refreshed at each shock.
    """
    if horizon <= 0:
        raise ValidationError("horizon must be positive")
    if shocks.horizon < horizon:
        raise ValidationError("shock trajectory horizon shorter than requested horizon")
    inside = shocks.shock_times[shocks.shock_times <= horizon]
    times = _thin_arrivals(params, inside, 0.0, horizon, carry=0.0, rng=rng)
    return ArrivalTrajectory(horizon=horizon, arrival_times=times)


def simulate_arrival_batch(
    params: ShotNoiseParams,
    horizon: float,
    n_runs: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Arrival times for many independent trajectories in one flat pass.

    Returns ``(run_ids, times)`` with times unsorted within a run. Same
    piecewise-bound thinning as :func:`simulate_arrivals`, carried out on
    flattened segment arrays so that large replication counts stay cheap.
    """
    if horizon <= 0:
        raise ValidationError("horizon must be positive")
    if params.delta * horizon > 600.0:
        raise ValidationError("batch sampler limited to delta * horizon <= 600")
    n_sh = rng.poisson(params.mu * horizon, size=n_runs)
    total_sh = int(n_sh.sum())
    sh_run = np.repeat(np.arange(n_runs), n_sh)
    sh_t = rng.uniform(0.0, horizon, size=total_sh)
    order = np.lexsort((sh_t, sh_run))
    sh_t = sh_t[order]
    run_starts = np.concatenate(([0], np.cumsum(n_sh)))
    # Summed exp(delta * T_i) within each run, up to and including each shock.
    e_plus = np.exp(params.delta * sh_t)
    cs = np.cumsum(e_plus)
    offsets = np.concatenate(([0.0], cs))[run_starts[:-1]]
    cs_run = cs - np.repeat(offsets, n_sh)
    carry_at_shock = np.exp(-params.delta * sh_t) * cs_run
    # One segment per (run, inter-shock gap): N_i + 1 segments per run.
    n_slots = total_sh + n_runs
    first_pos = run_starts[:-1] + np.arange(n_runs)
    is_first = np.zeros(n_slots, dtype=bool)
    is_first[first_pos] = True
    seg_left = np.empty(n_slots)
    seg_left[is_first] = 0.0
    seg_left[~is_first] = sh_t
    last_pos = run_starts[1:] + np.arange(n_runs)
    is_last = np.zeros(n_slots, dtype=bool)
    is_last[last_pos] = True
    seg_right = np.empty(n_slots)
    seg_right[is_last] = horizon
    seg_right[~is_last] = sh_t
    seg_carry = np.zeros(n_slots)
    seg_carry[~is_first] = carry_at_shock
    seg_run = np.repeat(np.arange(n_runs), n_sh + 1)
    bounds = params.lambda0 + seg_carry
    lengths = seg_right - seg_left
    counts = rng.poisson(bounds * lengths)
    total_prop = int(counts.sum())
    if total_prop == 0:
        return np.empty(0, dtype=int), np.empty(0)
    slot = np.repeat(np.arange(n_slots), counts)
    prop_t = seg_left[slot] + rng.uniform(size=total_prop) * lengths[slot]
    lam = params.lambda0 + seg_carry[slot] * np.exp(-params.delta * (prop_t - seg_left[slot]))
    if np.any(lam > bounds[slot] * (1 + 1e-12)):
        raise AssertionError("thinning dominating bound violated")
    keep = rng.uniform(size=total_prop) * bounds[slot] <= lam
    return seg_run[slot[keep]], prop_t[keep]


def write_trajectory_csv(path, times: np.ndarray) -> None:
    """One time per row under a ``time`` header."""
    with open(path, "w") as fh:
        fh.write("time\n")
        for t in np.asarray(times, float):
            fh.write(f"{t:.12g}\n")
