"""Event-driven kernel for the graphical construction.

One priority queue holds the next pending clock ring of every scheduled
site; rings are processed in time order (ties broken by site index) and
applied to one process or to a coupled pair sharing the same rings and
coins.  Two scheduling modes:

  baseline   every window site stays in the queue and every ring is
             processed, no-ops included;
  live set   only sites within distance one of an empty site (in either
             coupled process) are scheduled.  Rings at other sites are
             provably no-ops; their streams are replayed lazily when a
             neighborhood change reactivates the site.

Both modes produce bit-identical trajectories because every variate is a
pure function of (key, site, ring index); the live-set path merely skips
work that cannot change the state.

All mutable state lives in caller-owned numpy arrays, so a run can be
resumed after growing a full recording buffer and continued past any
stopping point.
"""

import math

import numpy as np
from numba import njit, uint64

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
SITE_SALT = 0x8CB92BA72F3D8DD7
INDEX_SALT = 0xD1B54A32D192ED03
CHANNEL_EXP = 1
CHANNEL_COIN = 2
U53 = 2.0**-53
TINY = np.finfo(np.float64).tiny

_MIX_A_U = np.uint64(MIX_A)
_MIX_B_U = np.uint64(MIX_B)
_GOLDEN_U = np.uint64(GOLDEN)
_SITE_SALT_U = np.uint64(SITE_SALT)
_INDEX_SALT_U = np.uint64(INDEX_SALT)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)

KIND_FA1F = 0
KIND_TCP = 1

STATUS_DONE = 0
STATUS_FRONT_FULL = 1
STATUS_FLIPS_FULL = 2
STATUS_WINDOW = 3
STATUS_EXTINCT0 = 4
STATUS_EXTINCT1 = 5
STATUS_NO_FRONT = 6

# state_i slots
SI_FRONT = 0
SI_ZEROS0 = 1
SI_ZEROS1 = 2
SI_PROBE_PTR = 3

# counters slots
C_RINGS = 0
C_PLUS1 = 1
C_MINUS1 = 2
C_OTHER_JUMP = 3
C_PLUS1_BAD = 4
C_ORDER_VIOL = 5


@njit(inline="always")
def _mix(z):
    z ^= z >> _S30
    z *= _MIX_A_U
    z ^= z >> _S27
    z *= _MIX_B_U
    z ^= z >> _S31
    return z


@njit(inline="always")
def _stream_key_nb(seed, collection_id, channel):
    h = _mix(uint64(seed))
    h = _mix(h ^ (uint64(collection_id) * _GOLDEN_U))
    return _mix(h ^ uint64(channel))


@njit(inline="always")
def _u53_nb(key, site, n):
    z = _mix(key ^ (uint64(site) * _SITE_SALT_U))
    z = _mix(z ^ (uint64(n) * _INDEX_SALT_U))
    return np.float64(z >> _S11) * U53


@njit(inline="always")
def _exp_inc(key, site, n):
    e = -math.log1p(-_u53_nb(key, site, n))
    return e if e > TINY else TINY


@njit(cache=True, nogil=True)
def _exp_from_uniform_arr(u, out):
    for k in range(u.shape[0]):
        e = -math.log1p(-u[k])
        out[k] = e if e > TINY else TINY


@njit(cache=True, nogil=True)
def _uniform_batch(key, sites, ns, out):
    for k in range(sites.shape[0]):
        out[k] = _u53_nb(key, sites[k], ns[k])


@njit(inline="always")
def _sp(spins, i, W, boundary_zero):
    if i < 0 or i >= W:
        return 0 if boundary_zero else 1
    return spins[i]


@njit(inline="always")
def _is_live(spins0, spins1, coupled, i, W, boundary_zero):
    for j in range(i - 1, i + 2):
        if _sp(spins0, j, W, boundary_zero) == 0:
            return True
        if coupled and _sp(spins1, j, W, boundary_zero) == 0:
            return True
    return False


@njit(inline="always")
def _apply_ring(spins, kind, i, W, boundary_zero, B):
    """Update site i to coin B if the model's constraint allows it."""
    s = spins[i]
    if kind == KIND_FA1F:
        if s != B and (_sp(spins, i - 1, W, boundary_zero) == 0
                       or _sp(spins, i + 1, W, boundary_zero) == 0):
            spins[i] = B
            return True
    else:
        if B == 1:
            if s == 0:
                spins[i] = 1
                return True
        else:
            if s == 1 and (_sp(spins, i - 1, W, boundary_zero) == 0
                           or _sp(spins, i + 1, W, boundary_zero) == 0):
                spins[i] = 0
                return True
    return False


@njit(inline="always")
def _hless(t1, s1, t2, s2):
    return t1 < t2 or (t1 == t2 and s1 < s2)


@njit(inline="always")
def _hpush(ht, hs, hn, t, s):
    i = hn[0]
    ht[i] = t
    hs[i] = s
    hn[0] = i + 1
    while i > 0:
        par = (i - 1) >> 1
        if _hless(ht[i], hs[i], ht[par], hs[par]):
            ht[i], ht[par] = ht[par], ht[i]
            hs[i], hs[par] = hs[par], hs[i]
            i = par
        else:
            break


@njit(inline="always")
def _hpop(ht, hs, hn):
    t0 = ht[0]
    s0 = hs[0]
    n = hn[0] - 1
    hn[0] = n
    if n > 0:
        ht[0] = ht[n]
        hs[0] = hs[n]
        i = 0
        while True:
            l = 2 * i + 1
            m = i
            if l < n and _hless(ht[l], hs[l], ht[m], hs[m]):
                m = l
            r = l + 1
            if r < n and _hless(ht[r], hs[r], ht[m], hs[m]):
                m = r
            if m == i:
                break
            ht[i], ht[m] = ht[m], ht[i]
            hs[i], hs[m] = hs[m], hs[i]
            i = m
    return t0, s0


@njit(inline="always")
def _fast_forward(i, rng_base, key_exp, ring_idx, last_time, threshold, inclusive):
    """Replay the ring stream of site i past `threshold`; returns next ring time."""
    n = ring_idx[i]
    tlast = last_time[i]
    site = rng_base + i
    tnext = tlast + _exp_inc(key_exp, site, n + 1)
    if inclusive:
        while tnext <= threshold:
            n += 1
            tlast = tnext
            tnext = tlast + _exp_inc(key_exp, site, n + 1)
    else:
        while tnext < threshold:
            n += 1
            tlast = tnext
            tnext = tlast + _exp_inc(key_exp, site, n + 1)
    ring_idx[i] = n
    last_time[i] = tlast
    return tnext


@njit(cache=True, nogil=True)
def _init_schedule(spins0, spins1, coupled, boundary_zero, live_on,
                   key_exp, rng_base, t0,
                   ring_idx, last_time, inheap, ht, hs, hn):
    W = spins0.shape[0]
    for i in range(W):
        if (not live_on) or _is_live(spins0, spins1, coupled, i, W, boundary_zero):
            tn = _fast_forward(i, rng_base, key_exp, ring_idx, last_time, t0, True)
            _hpush(ht, hs, hn, tn, i)
            inheap[i] = 1


@njit(cache=True, nogil=True)
def _advance(spins0, spins1, coupled, kind0, kind1, boundary_zero,
             margin, live_on, check_order, track_front,
             watch_extinct0, watch_extinct1,
             key_exp, key_coin, rng_base, p,
             t_end,
             ring_idx, last_time, inheap,
             ht, hs, hn,
             state_i,
             probe_times, probe_abs, probe_abs_lo, probe_out, probe_fronts,
             fe_t, fe_x, fe_n,
             fl_t, fl_site, fl_new, fl_proc, fl_n, record_flips,
             counters, out_f, out_i):
    W = spins0.shape[0]
    pptr = state_i[SI_PROBE_PTR]
    nprobes = probe_times.shape[0]
    pcols = probe_out.shape[1]
    while True:
        next_t = ht[0] if hn[0] > 0 else np.inf
        while pptr < nprobes and probe_times[pptr] <= t_end and probe_times[pptr] < next_t:
            base = probe_abs_lo if probe_abs else state_i[SI_FRONT]
            probe_fronts[pptr] = state_i[SI_FRONT]
            for c in range(pcols):
                j = base + c
                probe_out[pptr, c] = _sp(spins0, j, W, boundary_zero)
            pptr += 1
        if hn[0] == 0 or next_t > t_end:
            state_i[SI_PROBE_PTR] = pptr
            out_f[0] = t_end
            return STATUS_DONE
        if track_front and fe_n[0] + 2 > fe_t.shape[0]:
            state_i[SI_PROBE_PTR] = pptr
            return STATUS_FRONT_FULL
        if record_flips and fl_n[0] + 2 > fl_t.shape[0]:
            state_i[SI_PROBE_PTR] = pptr
            return STATUS_FLIPS_FULL

        t, i = _hpop(ht, hs, hn)
        counters[C_RINGS] += 1
        n = ring_idx[i] + 1
        ring_idx[i] = n
        last_time[i] = t
        B = 1 if _u53_nb(key_coin, rng_base + i, n) < p else 0

        changed0 = _apply_ring(spins0, kind0, i, W, boundary_zero, B)
        changed1 = _apply_ring(spins1, kind1, i, W, boundary_zero, B) if coupled else False
        pending = -1

        if changed0 or changed1:
            if changed0:
                new0 = spins0[i]
                state_i[SI_ZEROS0] += 1 if new0 == 0 else -1
                if record_flips:
                    k = fl_n[0]
                    fl_t[k] = t
                    fl_site[k] = i
                    fl_new[k] = new0
                    fl_proc[k] = 0
                    fl_n[0] = k + 1
                if new0 == 0 and not boundary_zero and (i < margin or i >= W - margin):
                    state_i[SI_PROBE_PTR] = pptr
                    return STATUS_WINDOW
            if changed1:
                new1 = spins1[i]
                state_i[SI_ZEROS1] += 1 if new1 == 0 else -1
                if record_flips:
                    k = fl_n[0]
                    fl_t[k] = t
                    fl_site[k] = i
                    fl_new[k] = new1
                    fl_proc[k] = 1
                    fl_n[0] = k + 1
                if new1 == 0 and not boundary_zero and (i < margin or i >= W - margin):
                    state_i[SI_PROBE_PTR] = pptr
                    return STATUS_WINDOW
            if check_order and coupled and spins0[i] > spins1[i]:
                counters[C_ORDER_VIOL] += 1
            if track_front and changed0:
                fr = state_i[SI_FRONT]
                if i < fr and spins0[i] == 0:
                    if fr - i == 1:
                        counters[C_MINUS1] += 1
                    else:
                        counters[C_OTHER_JUMP] += 1
                    state_i[SI_FRONT] = i
                    k = fe_n[0]
                    fe_t[k] = t
                    fe_x[k] = i
                    fe_n[0] = k + 1
                elif i == fr and spins0[i] == 1:
                    # the flip leaves the right neighbor untouched, so this
                    # reads the pre-jump pattern bit at front+1
                    if i + 1 >= W or spins0[i + 1] != 0:
                        counters[C_PLUS1_BAD] += 1
                    j = i + 1
                    while j < W and spins0[j] == 1:
                        j += 1
                    if j == W:
                        state_i[SI_PROBE_PTR] = pptr
                        return STATUS_NO_FRONT
                    if j - fr == 1:
                        counters[C_PLUS1] += 1
                    else:
                        counters[C_OTHER_JUMP] += 1
                    state_i[SI_FRONT] = j
                    k = fe_n[0]
                    fe_t[k] = t
                    fe_x[k] = j
                    fe_n[0] = k + 1
            if watch_extinct0 and changed0 and state_i[SI_ZEROS0] == 0:
                out_f[1] = t
                out_i[0] = i
                pending = STATUS_EXTINCT0
            if watch_extinct1 and changed1 and state_i[SI_ZEROS1] == 0:
                out_f[1] = t
                out_i[0] = i
                pending = STATUS_EXTINCT1
            if live_on:
                for j in range(i - 1, i + 2, 2):
                    if 0 <= j < W and inheap[j] == 0 and \
                            _is_live(spins0, spins1, coupled, j, W, boundary_zero):
                        tn = _fast_forward(j, rng_base, key_exp, ring_idx, last_time,
                                           t, False)
                        _hpush(ht, hs, hn, tn, j)
                        inheap[j] = 1

        if (not live_on) or _is_live(spins0, spins1, coupled, i, W, boundary_zero):
            tn = t + _exp_inc(key_exp, rng_base + i, n + 1)
            _hpush(ht, hs, hn, tn, i)
        else:
            inheap[i] = 0

        if pending >= 0:
            state_i[SI_PROBE_PTR] = pptr
            out_f[0] = t
            return pending
