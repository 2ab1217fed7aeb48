"""Event-driven evolution of FA-1f and the threshold contact process.

Both models update a site to the coin attached to each clock ring,
subject to their constraint: FA-1f requires an empty neighbor for every
update, the contact process only for infections (1 -> 0).  Running two
processes off the same clock collection realizes the basic coupling.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _engine as eng
from .lattice import (FrontPath, NoFrontError, SpinConfig, WindowTooSmallError,
                      front, is_front_anchored, make_initial)
from .randomness import ClockCollection

LAMBDA_C_CONTACT = 1.6494   # critical infection/recovery ratio, classical contact process on Z
LAMBDA_C_TCP = 1.74         # same for the threshold contact process (reference only)

# Vacancy density above which the contact-process comparison machinery
# applies: 2*lambda_c / (1 + 2*lambda_c), about 0.7674.
Q_BAR = 2 * LAMBDA_C_CONTACT / (1 + 2 * LAMBDA_C_CONTACT)

_KIND_CODES = {"fa1f": eng.KIND_FA1F, "tcp": eng.KIND_TCP}


@dataclass(frozen=True)
class ModelParams:
    """Flip parameters: q is the rate to empty, p = 1 - q the rate to occupy."""

    q: float
    kind: str = "fa1f"

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if self.kind not in _KIND_CODES:
            raise ValueError(f"kind must be one of {sorted(_KIND_CODES)}")

    @property
    def p(self) -> float:
        return 1.0 - self.q

    @property
    def q_bar(self) -> float:
        return Q_BAR

    @property
    def lambda_c_tcp(self) -> float:
        return LAMBDA_C_TCP

    @property
    def kind_code(self) -> int:
        return _KIND_CODES[self.kind]

    def supercritical(self) -> bool:
        return self.q > Q_BAR


def clocks_for(params: ModelParams, seed: int, collection_id: int = 0) -> ClockCollection:
    return ClockCollection(seed=seed, collection_id=collection_id, p=params.p)


def rate(params: ModelParams, config: SpinConfig, x: int) -> float:
    """Transition rate at site x (reference formula, not used by the engine)."""
    s = config.get(x)
    constraint = 1 - config.get(x - 1) * config.get(x + 1)
    if params.kind == "fa1f":
        return constraint * (params.q * s + params.p * (1 - s))
    return constraint * params.q * s + params.p * (1 - s)


@dataclass
class RecordingPlan:
    """Observable sampling plan: snapshots at given times.

    Exactly one anchor: ``front_window`` records sigma on
    [X(t), X(t)+front_window]; ``absolute_window`` records a fixed box.
    Snapshots are taken from the configuration right after the last
    event at or before each sample time.
    """

    times: np.ndarray
    front_window: int = -1
    absolute_window: tuple = None

    def __post_init__(self):
        self.times = np.sort(np.asarray(self.times, dtype=np.float64))
        if (self.front_window >= 0) == (self.absolute_window is not None):
            raise ValueError("set exactly one of front_window / absolute_window")

    @property
    def columns(self) -> int:
        if self.front_window >= 0:
            return self.front_window + 1
        lo, hi = self.absolute_window
        return hi - lo + 1


@dataclass
class ProbeRecords:
    times: np.ndarray
    fronts: np.ndarray        # front position at each sample (junk if no front tracking)
    snapshots: np.ndarray     # (n_times, columns) uint8


@dataclass
class FlipLog:
    times: np.ndarray
    sites: np.ndarray
    new_values: np.ndarray
    process: np.ndarray       # 0 = first process, 1 = coupled partner


@dataclass
class EvolveResult:
    config: SpinConfig
    t_end: float
    front_path: FrontPath = None
    probes: ProbeRecords = None
    flips: FlipLog = None
    counters: dict = field(default_factory=dict)
    config_pair: SpinConfig = None
    extinction_time: float = None
    extinction_site: int = None

    @property
    def survived(self) -> bool:
        return self.extinction_time is None


_COUNTER_NAMES = ("rings", "plus1_jumps", "minus1_jumps", "other_jumps",
                  "plus1_bad_prejump", "order_violations")


class _Run:
    """Engine state for one (possibly coupled) trajectory; resumable."""

    def __init__(self, config0, params0, clocks, *, config1=None, params1=None,
                 t0=0.0, live_set=True, record_flips=False, track_front=True,
                 check_order=False, watch_extinct=(False, False),
                 boundary_zero=False, plan=None):
        self.coupled = config1 is not None
        if self.coupled and (config1.window_lo != config0.window_lo
                             or config1.spins.size != config0.spins.size):
            raise ValueError("coupled configurations must share one window")
        if clocks.p != params0.p:
            raise ValueError("clock collection coin bias must equal the model's p")
        self.window_lo = config0.window_lo
        self.spins0 = config0.spins.copy()
        self.spins1 = config1.spins.copy() if self.coupled else np.ones(1, dtype=np.uint8)
        self.kind0 = params0.kind_code
        self.kind1 = params1.kind_code if self.coupled else 0
        self.boundary_zero = bool(boundary_zero)
        self.margin = 0 if boundary_zero else int(config0.touched_margin)
        self.live_set = bool(live_set)
        self.record_flips = bool(record_flips)
        self.track_front = bool(track_front)
        self.check_order = bool(check_order)
        self.watch0, self.watch1 = (bool(watch_extinct[0]), bool(watch_extinct[1]))
        self.exterior = 0 if boundary_zero else 1
        W = self.spins0.size

        front_idx = 0
        if self.track_front:
            zero_idx = np.flatnonzero(self.spins0 == 0)
            if zero_idx.size == 0:
                raise NoFrontError("front tracking requires an empty site")
            front_idx = int(zero_idx[0])
        self._initial_front = self.window_lo + front_idx
        zeros0 = int(W - int(self.spins0.sum()))
        zeros1 = int(self.spins1.size - int(self.spins1.sum())) if self.coupled else 0

        self.key_exp = np.uint64(clocks.exp_key)
        self.key_coin = np.uint64(clocks.coin_key)
        self.rng_base = np.int64(self.window_lo + clocks.shift_offset)
        self.p = float(clocks.p)

        self.ring_idx = np.zeros(W, dtype=np.int64)
        self.last_time = np.zeros(W, dtype=np.float64)
        self.inheap = np.zeros(W, dtype=np.uint8)
        self.ht = np.zeros(W + 4, dtype=np.float64)
        self.hs = np.zeros(W + 4, dtype=np.int64)
        self.hn = np.zeros(1, dtype=np.int64)
        self.state_i = np.array([front_idx, zeros0, zeros1, 0], dtype=np.int64)
        self.counters = np.zeros(8, dtype=np.int64)
        self.out_f = np.zeros(4, dtype=np.float64)
        self.out_i = np.zeros(4, dtype=np.int64)

        self.plan = plan
        if plan is not None and plan.times.size:
            self.probe_times = plan.times
            self.probe_abs = plan.absolute_window is not None
            self.probe_abs_lo = np.int64(
                (plan.absolute_window[0] - self.window_lo) if self.probe_abs else 0)
            self.probe_out = np.zeros((plan.times.size, plan.columns), dtype=np.uint8)
            self.probe_fronts = np.zeros(plan.times.size, dtype=np.int64)
        else:
            self.probe_times = np.zeros(0, dtype=np.float64)
            self.probe_abs = False
            self.probe_abs_lo = np.int64(0)
            self.probe_out = np.zeros((0, 1), dtype=np.uint8)
            self.probe_fronts = np.zeros(0, dtype=np.int64)

        fe_cap = 4096 if self.track_front else 2
        self.fe_t = np.zeros(fe_cap, dtype=np.float64)
        self.fe_x = np.zeros(fe_cap, dtype=np.int64)
        self.fe_n = np.zeros(1, dtype=np.int64)
        fl_cap = 8192 if self.record_flips else 2
        self.fl_t = np.zeros(fl_cap, dtype=np.float64)
        self.fl_site = np.zeros(fl_cap, dtype=np.int64)
        self.fl_new = np.zeros(fl_cap, dtype=np.int8)
        self.fl_proc = np.zeros(fl_cap, dtype=np.int8)
        self.fl_n = np.zeros(1, dtype=np.int64)

        self.t0 = float(t0)
        self.t_now = float(t0)
        self.extinct_status = None
        self.extinction_time = None
        self.extinction_site = None
        if self.watch0 and zeros0 == 0:
            self.extinct_status = "extinct0"
            self.extinction_time = self.t0
        if self.watch1 and self.coupled and zeros1 == 0:
            self.extinct_status = "extinct1"
            self.extinction_time = self.t0

        eng._init_schedule(self.spins0, self.spins1, self.coupled, self.boundary_zero,
                           self.live_set, self.key_exp, self.rng_base, self.t0,
                           self.ring_idx, self.last_time, self.inheap,
                           self.ht, self.hs, self.hn)

    def advance(self, t1, *, stop_on_extinction=True):
        """Process every ring in (t_now, t1]; returns 'done' or 'extinctN'."""
        if self.extinct_status is not None and stop_on_extinction:
            self._flush_probes(t1)
            return self.extinct_status
        watch0, watch1 = self.watch0, self.watch1
        while True:
            status = eng._advance(
                self.spins0, self.spins1, self.coupled, self.kind0, self.kind1,
                self.boundary_zero, self.margin, self.live_set, self.check_order,
                self.track_front, watch0, watch1,
                self.key_exp, self.key_coin, self.rng_base, self.p,
                float(t1),
                self.ring_idx, self.last_time, self.inheap,
                self.ht, self.hs, self.hn,
                self.state_i,
                self.probe_times, self.probe_abs, self.probe_abs_lo,
                self.probe_out, self.probe_fronts,
                self.fe_t, self.fe_x, self.fe_n,
                self.fl_t, self.fl_site, self.fl_new, self.fl_proc, self.fl_n,
                self.record_flips,
                self.counters, self.out_f, self.out_i)
            if status == eng.STATUS_DONE:
                self.t_now = float(t1)
                return "done"
            if status == eng.STATUS_FRONT_FULL:
                self.fe_t = _grow(self.fe_t)
                self.fe_x = _grow(self.fe_x)
            elif status == eng.STATUS_FLIPS_FULL:
                self.fl_t = _grow(self.fl_t)
                self.fl_site = _grow(self.fl_site)
                self.fl_new = _grow(self.fl_new)
                self.fl_proc = _grow(self.fl_proc)
            elif status == eng.STATUS_WINDOW:
                raise WindowTooSmallError(
                    "activity reached the sentinel margin; widen the window")
            elif status == eng.STATUS_NO_FRONT:
                raise NoFrontError("front disappeared; not reachable from "
                                   "front-anchored initial conditions")
            elif status in (eng.STATUS_EXTINCT0, eng.STATUS_EXTINCT1):
                which = "extinct0" if status == eng.STATUS_EXTINCT0 else "extinct1"
                self.extinct_status = which
                self.extinction_time = float(self.out_f[1])
                self.extinction_site = int(self.out_i[0]) + self.window_lo
                self.t_now = self.extinction_time
                if stop_on_extinction:
                    self._flush_probes(t1)
                    return which
                if status == eng.STATUS_EXTINCT0:
                    watch0 = False
                else:
                    watch1 = False

    def _flush_probes(self, t1):
        """Fill probes in (t_now, t1] from the frozen current state."""
        ptr = int(self.state_i[eng.SI_PROBE_PTR])
        W = self.spins0.size
        while ptr < self.probe_times.size and self.probe_times[ptr] <= t1:
            base = int(self.probe_abs_lo) if self.probe_abs else int(self.state_i[eng.SI_FRONT])
            self.probe_fronts[ptr] = self.state_i[eng.SI_FRONT]
            for c in range(self.probe_out.shape[1]):
                j = base + c
                self.probe_out[ptr, c] = self.spins0[j] if 0 <= j < W else self.exterior
            ptr += 1
        self.state_i[eng.SI_PROBE_PTR] = ptr
        self.t_now = float(t1)

    def result(self) -> EvolveResult:
        config = SpinConfig(self.window_lo, self.spins0.copy(),
                            exterior_value=self.exterior, touched_margin=self.margin)
        pair = None
        if self.coupled:
            pair = SpinConfig(self.window_lo, self.spins1.copy(),
                              exterior_value=self.exterior, touched_margin=self.margin)
        path = None
        if self.track_front:
            n = int(self.fe_n[0])
            times = np.concatenate(([self.t0], self.fe_t[:n]))
            pos = np.concatenate(([self._initial_front], self.fe_x[:n] + self.window_lo))
            path = FrontPath(times, pos)
        probes = None
        if self.probe_times.size:
            done = int(self.state_i[eng.SI_PROBE_PTR])
            probes = ProbeRecords(self.probe_times[:done].copy(),
                                  self.probe_fronts[:done] + self.window_lo,
                                  self.probe_out[:done].copy())
        flips = None
        if self.record_flips:
            m = int(self.fl_n[0])
            flips = FlipLog(self.fl_t[:m].copy(), self.fl_site[:m] + self.window_lo,
                            self.fl_new[:m].copy(), self.fl_proc[:m].copy())
        counters = {name: int(self.counters[k]) for k, name in enumerate(_COUNTER_NAMES)}
        return EvolveResult(config=config, t_end=self.t_now, front_path=path,
                            probes=probes, flips=flips, counters=counters,
                            config_pair=pair,
                            extinction_time=self.extinction_time,
                            extinction_site=self.extinction_site)


def _grow(arr):
    out = np.zeros(arr.size * 2, dtype=arr.dtype)
    out[:arr.size] = arr
    return out


def evolve(config, params, clocks, t0, t1, plan=None, *, live_set=True,
           record_flips=False, track_front=None, watch_extinction=None,
           check_order=False) -> EvolveResult:
    """Run one process through every ring in (t0, t1].

    Defaults follow the model kind: the FA-1f front is tracked, the
    contact process watches for extinction (its all-ones state is
    absorbing, so the run stops there and probes freeze).
    """
    if t1 < t0:
        raise ValueError("t1 must be >= t0")
    if track_front is None:
        track_front = params.kind == "fa1f"
    if watch_extinction is None:
        watch_extinction = params.kind == "tcp"
    run = _Run(config, params, clocks, t0=t0, live_set=live_set,
               record_flips=record_flips, track_front=track_front,
               watch_extinct=(watch_extinction, False), plan=plan,
               check_order=check_order)
    run.advance(t1)
    run.t_now = float(t1)
    return run.result()


@dataclass
class CoupledPair:
    """A pointwise-ordered pair: fa (more zeros) below tcp."""

    fa: SpinConfig
    tcp: SpinConfig
    order_ok: bool = True


@dataclass
class CoupledResult:
    pair: CoupledPair
    t_end: float
    front_path: FrontPath = None
    counters: dict = field(default_factory=dict)
    extinction_time: float = None
    extinction_site: int = None

    @property
    def survived(self) -> bool:
        return self.extinction_time is None


class OrderViolationError(AssertionError):
    """The basic coupling broke the pointwise order: implementation bug."""


def evolve_coupled(pair: CoupledPair, params_fa: ModelParams, params_tcp: ModelParams,
                   clocks, t0, t1, *, stop_on_tcp_extinction=False, live_set=True,
                   track_front=True, plan=None, raise_on_order_violation=True) -> CoupledResult:
    """Drive both processes of `pair` with the same rings and coins.

    The first process must start pointwise below the second; the order
    is checked after every applied update.
    """
    if np.any(pair.fa.spins > pair.tcp.spins):
        raise ValueError("coupling requires fa <= tcp pointwise at t0")
    run = _Run(pair.fa, params_fa, clocks, config1=pair.tcp, params1=params_tcp,
               t0=t0, live_set=live_set, track_front=track_front,
               check_order=True, watch_extinct=(False, stop_on_tcp_extinction),
               plan=plan)
    run.advance(t1, stop_on_extinction=stop_on_tcp_extinction)
    res = run.result()
    if raise_on_order_violation and res.counters["order_violations"]:
        raise OrderViolationError(
            f"{res.counters['order_violations']} order violations recorded")
    out_pair = CoupledPair(res.config, res.config_pair,
                           order_ok=res.counters["order_violations"] == 0)
    return CoupledResult(pair=out_pair, t_end=res.t_end, front_path=res.front_path,
                         counters=res.counters, extinction_time=res.extinction_time,
                         extinction_site=res.extinction_site)


def evolve_finite_volume(config, params, boundary, clocks, t0, t1,
                         plan=None, *, live_set=True,
                         record_flips=False) -> EvolveResult:
    """Dynamics restricted to `boundary` with empty (zero) boundary condition."""
    lo, hi = int(boundary[0]), int(boundary[1])
    if config.window_lo != lo or config.window_hi != hi:
        raise ValueError("configuration window must equal the boundary interval")
    run = _Run(config, params, clocks, t0=t0, live_set=live_set,
               track_front=False, boundary_zero=True, plan=plan,
               record_flips=record_flips, watch_extinct=(False, False))
    run.advance(t1)
    return run.result()


def extinction_time(result: EvolveResult):
    """Extinction time of a contact-process trajectory, or None if it survived."""
    return result.extinction_time


# ---------------------------------------------------------------------------
# windows and ensemble running


@dataclass(frozen=True)
class WindowPolicy:
    """Simulation window sizing: [-speed*t - margin, speed*t + margin].

    `speed` deliberately exceeds any plausible propagation speed (ring
    chains travel at around e sites per unit time); adequacy is enforced
    at runtime by the sentinel margins, with widen-and-rerun on failure.
    """

    speed: float = 5.0
    margin: int = 50
    max_widenings: int = 3

    def window_for(self, horizon: float):
        half = int(math.ceil(self.speed * max(horizon, 1.0))) + self.margin
        return (-half, half)


# Initial Bernoulli zeros are only drawn out to this multiple of the
# horizon.  Influence from beyond the fill must cross the fill plus the
# front excursion (together > 3 t) within time t, while ring chains move
# at about e < 2.72 sites per unit time, so the truncation error is
# exponentially negligible.
BERNOULLI_FILL_SPEED = 2.2


def _build_initial(init, window, p, seed, run_id, horizon, margin):
    if init == "delta0":
        return make_initial("delta0", window, touched_margin=margin)
    if init == "bernoulli":
        fill_hi = min(int(math.ceil(BERNOULLI_FILL_SPEED * horizon)) + 50,
                      window[1] - margin - 1)
        return make_initial("bernoulli_right", window, p=p,
                            seed=np.random.SeedSequence((seed, 1000003, run_id)),
                            fill_hi=fill_hi, touched_margin=margin)
    if init.startswith("pattern:"):
        return make_initial("explicit", window, pattern=init[len("pattern:"):],
                            touched_margin=margin)
    raise ValueError(f"unknown initial condition {init!r}")


def simulate_front(params: ModelParams, t_end: float, seed: int, *, init="delta0",
                   collection_id=0, plan=None, policy=WindowPolicy(), live_set=True,
                   record_flips=False) -> EvolveResult:
    """One front trajectory with automatic window sizing and widen-on-violation."""
    policy_now = policy
    last_exc = None
    for attempt in range(policy.max_widenings + 1):
        window = policy_now.window_for(t_end)
        config = _build_initial(init, window, params.p, seed, collection_id,
                                t_end, policy_now.margin)
        clocks = clocks_for(params, seed, collection_id)
        try:
            return evolve(config, params, clocks, 0.0, t_end, plan,
                          live_set=live_set, record_flips=record_flips)
        except WindowTooSmallError as exc:
            last_exc = exc
            policy_now = WindowPolicy(speed=policy_now.speed * 2,
                                      margin=policy_now.margin,
                                      max_widenings=policy_now.max_widenings)
    raise WindowTooSmallError(
        f"window still inadequate after {policy.max_widenings} widenings") from last_exc


@dataclass
class FrontEnsemble:
    """Per-run front statistics pooled over independent trajectories."""

    q: float
    t_end: float
    seed: int
    init: str
    increments: np.ndarray        # (runs, floor(t_end)) int16
    final_positions: np.ndarray   # (runs,) front at t_end
    probe_times: np.ndarray
    probe_fronts: np.ndarray      # (runs, n_probes)
    probe_patterns: np.ndarray    # (runs, n_probes, width+1)
    counters: dict                # name -> (runs,) int64

    @property
    def n_runs(self) -> int:
        return self.final_positions.size

    def subset(self, n_runs: int) -> "FrontEnsemble":
        """First n runs as their own ensemble (runs are independent)."""
        if n_runs > self.n_runs:
            raise ValueError("subset larger than the ensemble")
        return FrontEnsemble(q=self.q, t_end=self.t_end, seed=self.seed,
                             init=self.init,
                             increments=self.increments[:n_runs],
                             final_positions=self.final_positions[:n_runs],
                             probe_times=self.probe_times,
                             probe_fronts=self.probe_fronts[:n_runs],
                             probe_patterns=self.probe_patterns[:n_runs],
                             counters={k: v[:n_runs]
                                       for k, v in self.counters.items()})


def run_front_ensemble(params: ModelParams, t_end: float, n_runs: int, seed: int, *,
                       init="delta0", probe_times=(), probe_width=9,
                       policy=WindowPolicy(), live_set=True, workers=1) -> FrontEnsemble:
    """Independent FA-1f front trajectories, one clock collection per run."""
    probe_times = np.sort(np.asarray(probe_times, dtype=np.float64))
    n_steps = int(math.floor(t_end))
    increments = np.zeros((n_runs, n_steps), dtype=np.int16)
    finals = np.zeros(n_runs, dtype=np.int64)
    pf = np.zeros((n_runs, probe_times.size), dtype=np.int64)
    pp = np.zeros((n_runs, probe_times.size, probe_width + 1), dtype=np.uint8)
    cnt = {name: np.zeros(n_runs, dtype=np.int64) for name in _COUNTER_NAMES}

    def one(r):
        plan = None
        if probe_times.size:
            plan = RecordingPlan(times=probe_times, front_window=probe_width)
        res = simulate_front(params, t_end, seed, init=init, collection_id=r,
                             plan=plan, policy=policy, live_set=live_set)
        increments[r] = res.front_path.increments(n_steps).astype(np.int16)
        finals[r] = res.front_path.position_at(t_end)
        if probe_times.size:
            pf[r] = res.probes.fronts
            pp[r] = res.probes.snapshots
        for name in _COUNTER_NAMES:
            cnt[name][r] = res.counters[name]
        return None

    if workers <= 1:
        for r in range(n_runs):
            one(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(n_runs)))
    return FrontEnsemble(q=params.q, t_end=t_end, seed=seed, init=init,
                         increments=increments, final_positions=finals,
                         probe_times=probe_times, probe_fronts=pf,
                         probe_patterns=pp, counters=cnt)


def run_tcp_ensemble(params: ModelParams, t_end: float, n_runs: int, seed: int, *,
                     policy=WindowPolicy(), workers=1):
    """Contact-process runs from a single infection at the origin.

    Returns (survived bool array, extinction times with nan for survivors).
    """
    if params.kind != "tcp":
        raise ValueError("run_tcp_ensemble expects contact-process parameters")
    survived = np.zeros(n_runs, dtype=bool)
    taus = np.full(n_runs, np.nan)

    def one(r):
        window = policy.window_for(t_end)
        config = make_initial("delta0", window, touched_margin=policy.margin)
        clocks = clocks_for(params, seed, r)
        res = evolve(config, params, clocks, 0.0, t_end)
        survived[r] = res.survived
        if not res.survived:
            taus[r] = res.extinction_time

    if workers <= 1:
        for r in range(n_runs):
            one(r)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(one, range(n_runs)))
    return survived, taus
