"""Windowed spin configurations on Z, the front, and front-anchored observables.

A configuration lives on a finite window ``[window_lo, window_hi]`` and is
implicitly constant (``exterior_value``, normally 1) outside.  All initial
conditions used here are completely occupied on a left half-line with a
leftmost zero, so the frozen all-ones exterior is exact as long as no zero
reaches the window edge; the dynamics engine asserts this with sentinel
margins and widens the window on violation.
"""

from dataclasses import dataclass, field

import numpy as np


class NoFrontError(RuntimeError):
    """Raised when a configuration holds no zero: the front is undefined."""


class WindowTooSmallError(RuntimeError):
    """Raised when activity reaches the sentinel margin of the window."""


@dataclass
class SpinConfig:
    window_lo: int
    spins: np.ndarray
    exterior_value: int = 1
    touched_margin: int = 50

    def __post_init__(self):
        self.spins = np.ascontiguousarray(self.spins, dtype=np.uint8)
        if self.spins.ndim != 1 or self.spins.size == 0:
            raise ValueError("spins must be a non-empty 1-d array")
        if not np.all((self.spins == 0) | (self.spins == 1)):
            raise ValueError("spins must be 0/1 valued")

    @property
    def window_hi(self) -> int:
        return self.window_lo + self.spins.size - 1

    def index(self, x: int) -> int:
        return x - self.window_lo

    def get(self, x: int) -> int:
        if self.window_lo <= x <= self.window_hi:
            return int(self.spins[x - self.window_lo])
        return self.exterior_value

    def zeros(self) -> np.ndarray:
        """Absolute positions of the empty sites inside the window."""
        return np.flatnonzero(self.spins == 0) + self.window_lo

    def copy(self) -> "SpinConfig":
        return SpinConfig(self.window_lo, self.spins.copy(),
                          self.exterior_value, self.touched_margin)


def front(config: SpinConfig) -> int:
    """Position of the leftmost zero.

    Only meaningful for configurations that are all ones to the left of
    that zero; an all-ones window signals a bug upstream (the dynamics
    never removes the last zero of a fronted configuration).
    """
    idx = np.flatnonzero(config.spins == 0)
    if idx.size == 0:
        raise NoFrontError("configuration has no empty site in its window")
    return int(idx[0]) + config.window_lo


def is_front_anchored(config: SpinConfig) -> bool:
    """True when the leftmost zero exists and everything left of it is 1."""
    idx = np.flatnonzero(config.spins == 0)
    if idx.size == 0:
        return False
    return bool(np.all(config.spins[: idx[0]] == 1)) and config.exterior_value == 1


def make_initial(kind, window, *, p=None, seed=None, pattern=None,
                 fill_hi=None, touched_margin=50) -> SpinConfig:
    """Build a front-anchored initial configuration with the front at 0.

    kind:
      'delta0'          single zero at the origin, ones elsewhere;
      'bernoulli_right' zero at the origin, ones to the left, and each
                        site x > 0 occupied independently with
                        probability ``p`` (the equilibrium product law
                        restricted to the right half-line); ``seed``
                        feeds the draw.  ``fill_hi`` caps the filled
                        range (sites beyond it stay occupied), so the
                        drawn configuration does not depend on the
                        window size;
      'explicit'        0/1 string or sequence anchored so that its
                        first character sits at the origin.  It must
                        start with a zero (sites left of 0 are set to 1).
    """
    lo, hi = int(window[0]), int(window[1])
    if lo > 0 or hi < 0:
        raise ValueError("window must contain the origin")
    size = hi - lo + 1
    spins = np.ones(size, dtype=np.uint8)
    origin = -lo

    if kind == "delta0":
        spins[origin] = 0
    elif kind == "bernoulli_right":
        if p is None:
            raise ValueError("bernoulli_right needs the occupation probability p")
        rng = np.random.default_rng(seed)
        spins[origin] = 0
        n_right = hi if fill_hi is None else min(int(fill_hi), hi)
        if n_right > 0:
            spins[origin + 1:origin + 1 + n_right] = \
                (rng.random(n_right) < p).astype(np.uint8)
    elif kind == "explicit":
        if pattern is None:
            raise ValueError("explicit initial condition needs a pattern")
        bits = np.array([int(c) for c in pattern], dtype=np.uint8)
        if np.any(bits > 1):
            raise ValueError("pattern must be 0/1 valued")
        if bits.size == 0 or bits[0] != 0:
            raise ValueError("pattern must place a zero at the origin")
        if origin + bits.size > size:
            raise ValueError("pattern does not fit in the window")
        spins[origin:origin + bits.size] = bits
    else:
        raise ValueError(f"unknown initial condition kind {kind!r}")

    config = SpinConfig(lo, spins, exterior_value=1, touched_margin=touched_margin)
    if not is_front_anchored(config) or front(config) != 0:
        raise ValueError("initial condition is not front-anchored at the origin")
    return config


def gap_event(config: SpinConfig, a: int, b: int, l: int) -> bool:
    """True when the box [a, b] contains no run of l consecutive ones.

    Equivalent to: every length-l sub-interval of [a, b] holds at least
    one empty site.  Sites outside the window take the exterior value.
    """
    if a > b:
        raise ValueError("box must satisfy a <= b")
    if l < 1:
        raise ValueError("gap length must be positive")
    if b - a + 1 < l:
        return True
    vals = np.array([config.get(x) for x in range(a, b + 1)], dtype=np.int64)
    # Longest run of ones via cumulative reset: run[i] = 0 if vals[i] == 0.
    longest = run = 0
    for v in vals:
        run = run + 1 if v == 1 else 0
        longest = max(longest, run)
    return longest < l


def seen_from_front(config: SpinConfig, width: int) -> np.ndarray:
    """The pattern sigma(X), sigma(X+1), ..., sigma(X+width) at the front X."""
    x0 = front(config)
    if x0 + width > config.window_hi:
        raise WindowTooSmallError(
            f"window ends at {config.window_hi}, pattern needs {x0 + width}")
    pat = config.spins[config.index(x0):config.index(x0) + width + 1].copy()
    return pat


def pattern_code(pattern) -> int:
    """Little-endian integer encoding of a 0/1 pattern (bit k = site k)."""
    code = 0
    for k, v in enumerate(pattern):
        code |= int(v) << k
    return code


def distance_to_zero(config: SpinConfig, x: int, boundary) -> int:
    """Distance from x to the nearest empty site in a boxed region.

    The two sites immediately outside ``boundary = (lo, hi)`` count as
    empty, matching the zero boundary condition of the finite-volume
    dynamics, so the result is at most the distance to the closer edge.
    """
    lo, hi = int(boundary[0]), int(boundary[1])
    if not lo <= x <= hi:
        raise ValueError("x must lie inside the boundary interval")
    best = min(x - (lo - 1), (hi + 1) - x)
    zs = config.zeros()
    zs = zs[(zs >= lo) & (zs <= hi)]
    if zs.size:
        best = min(best, int(np.min(np.abs(zs - x))))
    return best


@dataclass
class FrontPath:
    """Piecewise-constant front trajectory: position jumps at `times`."""

    times: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.positions = np.asarray(self.positions, dtype=np.int64)
        if self.times.size != self.positions.size or self.times.size == 0:
            raise ValueError("times and positions must be equal-length, non-empty")

    def position_at(self, t) -> np.ndarray:
        """Front position at time(s) t (right-continuous step lookup)."""
        t = np.asarray(t, dtype=np.float64)
        idx = np.searchsorted(self.times, t, side="right") - 1
        if np.any(idx < 0):
            raise ValueError("queried before the first recorded time")
        return self.positions[idx]

    def increments(self, n_max: int) -> np.ndarray:
        """Front displacements between consecutive integer times 1..n_max."""
        grid = self.position_at(np.arange(0, n_max + 1, dtype=np.float64))
        return np.diff(grid)

    def jump_sizes(self) -> np.ndarray:
        return np.diff(self.positions)
