"""Restart coupling: an FA-1f trajectory dominated by contact processes.

A contact process is started from a single infection at the FA-1f front
and both are driven by one clock collection (so the FA-1f configuration
keeps at least the contact process' zeros).  Each time the contact
process dies, a fresh, independent, space-shifted collection starts a
new copy from the current front.  Above the critical vacancy density a
copy eventually survives; the outcome records when (T), where (Y) and at
which attempt (L).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (CoupledPair, ModelParams, Q_BAR, WindowPolicy,
                       evolve_coupled)
from .lattice import FrontPath, SpinConfig, front, make_initial
from .randomness import ClockCollection


@dataclass
class RestartOutcome:
    T: float                 # total lifetime of the failed copies
    Y: int                   # origin of the surviving copy
    L: int                   # index of the surviving copy (1 = first)
    survived: bool           # False when max_restarts ran out
    horizon: float
    fa_path: FrontPath
    restart_log: list = field(default_factory=list)   # (U_i, Z_i, X_i) per failed copy
    final_fa: SpinConfig = None
    final_tcp: SpinConfig = None

    @property
    def n_restarts(self) -> int:
        return len(self.restart_log)


def _embed(sigma0: SpinConfig, window, margin) -> SpinConfig:
    lo, hi = window
    spins = np.ones(hi - lo + 1, dtype=np.uint8)
    if sigma0.window_lo < lo or sigma0.window_hi > hi:
        raise ValueError("initial configuration does not fit the run window")
    off = sigma0.window_lo - lo
    spins[off:off + sigma0.spins.size] = sigma0.spins
    return SpinConfig(lo, spins, exterior_value=1, touched_margin=margin)


def restart_couple(sigma0: SpinConfig, params: ModelParams, seed: int,
                   horizon: float, max_restarts: int = 200, *,
                   policy: WindowPolicy = WindowPolicy(),
                   live_set: bool = True) -> RestartOutcome:
    """Run the restarted domination from ``sigma0`` up to ``horizon``.

    "Survival" of a copy means no extinction before the run horizon; the
    horizon travels with the result so its effect can be reported.
    """
    if params.kind != "fa1f":
        raise ValueError("the dominated process must be FA-1f")
    if params.q <= Q_BAR:
        warnings.warn(
            f"q={params.q} is at or below the contact threshold {Q_BAR:.4f}; "
            "the surviving-copy construction may not terminate", stacklevel=2)
    params_tcp = ModelParams(q=params.q, kind="tcp")
    window = policy.window_for(horizon)
    fa = _embed(sigma0, window, policy.margin)
    if front(fa) != front(sigma0):
        raise ValueError("embedding moved the front")

    t_cur = 0.0
    anchor = front(fa)       # origin of the next contact copy
    times = [0.0]
    positions = [anchor]
    log = []
    final_tcp = None
    survived = False
    attempts = 0
    for i in range(1, max_restarts + 1):
        attempts = i
        clocks = ClockCollection(seed=seed, collection_id=i, p=params.p).shifted(anchor)
        tcp_spins = np.ones(fa.spins.size, dtype=np.uint8)
        tcp_spins[anchor - fa.window_lo] = 0
        tcp = SpinConfig(fa.window_lo, tcp_spins, exterior_value=1,
                         touched_margin=policy.margin)
        pair = CoupledPair(fa=fa, tcp=tcp)
        seg = evolve_coupled(pair, params, params_tcp, clocks, 0.0,
                             horizon - t_cur, stop_on_tcp_extinction=True,
                             live_set=live_set)
        seg_times = seg.front_path.times + t_cur
        times.extend(seg_times[1:].tolist())
        positions.extend(seg.front_path.positions[1:].tolist())
        fa = seg.pair.fa
        if seg.survived:
            survived = True
            final_tcp = seg.pair.tcp
            break
        u_i = seg.extinction_time
        z_i = seg.extinction_site
        t_cur += u_i
        x_i = front(fa)
        log.append((u_i, z_i, x_i))
        anchor = x_i

    # Without survival (expected at subcritical q) the fields report the
    # state after the last failed copy.
    return RestartOutcome(T=t_cur, Y=anchor, L=attempts, survived=survived,
                          horizon=horizon,
                          fa_path=FrontPath(np.array(times), np.array(positions)),
                          restart_log=log, final_fa=fa, final_tcp=final_tcp)


def check_anchor_property(outcome: RestartOutcome) -> bool:
    """Each restart anchor sits at most one site right of the killed zero.

    Holds deterministically for the coupling (the killed zero either
    cannot move or was already protected by an empty neighbor); a False
    return flags an implementation bug or a corrupted log.
    """
    return all(x_i <= z_i + 1 for (_, z_i, x_i) in outcome.restart_log)


def run_restart_ensemble(params: ModelParams, horizon: float, n_runs: int,
                         seed: int, *, max_restarts: int = 200,
                         policy: WindowPolicy = WindowPolicy()) -> list:
    """Independent restart outcomes; run r uses seed offset r."""
    outcomes = []
    for r in range(n_runs):
        window = policy.window_for(horizon)
        sigma0 = make_initial("delta0", window, touched_margin=policy.margin)
        outcomes.append(restart_couple(sigma0, params, seed + r, horizon,
                                       max_restarts, policy=policy))
    return outcomes
