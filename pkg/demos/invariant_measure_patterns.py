"""Convergence of the law seen from the front, in total variation.

Pools width-9 patterns anchored at the front at several times, from two
very different initial conditions, and watches the empirical laws
approach each other and a common limit.  Pools are one-sample-per-run,
so the distances carry honest multinomial error bars.
"""

import numpy as np

from fa1f import ModelParams
from fa1f.dynamics import run_front_ensemble
from fa1f import estimators

q = 0.9
t_end = 600.0
times = [75.0, 150.0, 300.0, 600.0]
n_runs = 250
width = 9
params = ModelParams(q=q)

print(f"two ensembles of {n_runs} runs to t={t_end:g} at q={q} ...")
ens_point = run_front_ensemble(params, t_end, n_runs, seed=31, init="delta0",
                               probe_times=times, probe_width=width)
ens_equil = run_front_ensemble(params, t_end, n_runs, seed=32, init="bernoulli",
                               probe_times=times, probe_width=width)

ref = estimators.pool_patterns(ens_equil, width, times=[t_end])
print("\ndistance to the late equilibrium-start pool:")
print(f"{'time':>8} {'TV(point)':>10} {'TV(equil)':>10} {'noise':>8}")
for t in times:
    m_p = estimators.pool_patterns(ens_point, width, times=[t])
    m_e = estimators.pool_patterns(ens_equil, width, times=[t])
    err = estimators.tv_sampling_error(m_p, ref)
    print(f"{t:8g} {estimators.tv_distance(m_p, ref):10.3f} "
          f"{estimators.tv_distance(m_e, ref):10.3f} {err:8.3f}")

final_p = estimators.pool_patterns(ens_point, width, times=[t_end])
print(f"\nTV between the two initial conditions at t={t_end:g}: "
      f"{estimators.tv_distance(final_p, ref):.3f} "
      f"(sampling error {estimators.tv_sampling_error(final_p, ref):.3f})")

print("\nmost likely patterns behind the front at late times (point start):")
freqs = final_p.frequencies
for code in np.argsort(freqs)[::-1][:6]:
    bits = "".join(str((code >> k) & 1) for k in range(width + 1))
    print(f"  {bits}: {freqs[code]:.3f}")
