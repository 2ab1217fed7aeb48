"""Monte Carlo laboratory for the FA-1f model and the threshold contact process on Z.

Event-driven graphical-construction dynamics with keyed, replayable
randomness; coupled and restarted runs; front statistics estimators; and
exact small-system oracles.
"""

from .dynamics import (CoupledPair, EvolveResult, ModelParams, RecordingPlan,
                       WindowPolicy, clocks_for, evolve, evolve_coupled,
                       evolve_finite_volume, extinction_time, rate,
                       run_front_ensemble, run_tcp_ensemble, simulate_front,
                       LAMBDA_C_CONTACT, LAMBDA_C_TCP, Q_BAR)
from .lattice import (FrontPath, NoFrontError, SpinConfig, WindowTooSmallError,
                      distance_to_zero, front, gap_event, make_initial,
                      pattern_code, seen_from_front)
from .randomness import ClockCollection

__version__ = "0.1.0"
