"""Exact finite-state oracles: generators, reversibility, transient laws.

States of a box of n sites are indexed little-endian from the left edge:
bit k of the index is the spin at site ``lo + k``.  These computations
are independent of the event-driven engine and serve as its ground truth
on small systems.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

MAX_SITES = 20  # 2^n states; beyond this the matrices stop being practical

ZERO_BOUNDARY = "zero_boundary"
FROZEN_ONES = "frozen_ones"


@dataclass
class GeneratorMatrix:
    """Sparse CTMC generator of a model restricted to a box."""

    matrix: sp.csr_matrix
    boundary_lo: int
    boundary_hi: int
    kind: str
    q: float
    convention: str

    @property
    def n_sites(self) -> int:
        return self.boundary_hi - self.boundary_lo + 1

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]


@dataclass
class FiniteDistribution:
    """Probability vector over the 2^n states of a box."""

    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if np.any(self.probs < -1e-15):
            raise ValueError("negative probability")
        if abs(self.probs.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to one")

    def tv_distance(self, other: "FiniteDistribution") -> float:
        return 0.5 * float(np.abs(self.probs - other.probs).sum())


def state_spin(state: int, k: int) -> int:
    return (state >> k) & 1


def flip_rate(kind: str, q: float, spins, k: int, left: int, right: int) -> float:
    """Rate to flip spin k given its neighbors' values (0/1)."""
    p = 1.0 - q
    s = spins[k]
    constraint = 1 - left * right
    if kind == "fa1f":
        return constraint * (q * s + p * (1 - s))
    return constraint * q * s + p * (1 - s)


def generator_matrix(params, boundary, convention=ZERO_BOUNDARY) -> GeneratorMatrix:
    """Exact generator of the model on ``boundary`` under the stated convention.

    ``zero_boundary`` treats the two sites outside the box as empty;
    ``frozen_ones`` treats them as occupied.
    """
    lo, hi = int(boundary[0]), int(boundary[1])
    n = hi - lo + 1
    if n < 1:
        raise ValueError("empty boundary interval")
    if n > MAX_SITES:
        raise ValueError(f"box of {n} sites exceeds the practical cap {MAX_SITES}")
    if convention not in (ZERO_BOUNDARY, FROZEN_ONES):
        raise ValueError(f"unknown boundary convention {convention!r}")
    edge = 0 if convention == ZERO_BOUNDARY else 1
    n_states = 1 << n
    rows, cols, vals = [], [], []
    diag = np.zeros(n_states)
    for state in range(n_states):
        spins = [(state >> k) & 1 for k in range(n)]
        for k in range(n):
            left = spins[k - 1] if k > 0 else edge
            right = spins[k + 1] if k < n - 1 else edge
            r = flip_rate(params.kind, params.q, spins, k, left, right)
            if r > 0.0:
                target = state ^ (1 << k)
                rows.append(state)
                cols.append(target)
                vals.append(r)
                diag[state] -= r
    rows.extend(range(n_states))
    cols.extend(range(n_states))
    vals.extend(diag)
    mat = sp.csr_matrix((vals, (rows, cols)), shape=(n_states, n_states))
    return GeneratorMatrix(matrix=mat, boundary_lo=lo, boundary_hi=hi,
                           kind=params.kind, q=params.q, convention=convention)


def product_measure(n_sites: int, p: float) -> FiniteDistribution:
    """Independent Bernoulli(p) occupation on each site of the box."""
    probs = np.ones(1 << n_sites)
    for state in range(1 << n_sites):
        pr = 1.0
        for k in range(n_sites):
            pr *= p if (state >> k) & 1 else (1.0 - p)
        probs[state] = pr
    return FiniteDistribution(probs)


def detailed_balance_check(gen: GeneratorMatrix, p: float) -> float:
    """Max violation of mu(s) r(s->s') = mu(s') r(s'->s) for mu = Ber(p) product."""
    if gen.n_sites > 12:
        raise ValueError("detailed balance check is dense; cap the box at 12 sites")
    mu = product_measure(gen.n_sites, p).probs
    flow = mu[:, None] * gen.matrix.toarray()
    np.fill_diagonal(flow, 0.0)
    return float(np.abs(flow - flow.T).max())


def stationary_distribution(gen: GeneratorMatrix) -> FiniteDistribution:
    """Left null vector of the generator, normalized (dense solve)."""
    mat = gen.matrix.toarray().T
    # Replace one balance equation with the normalization constraint.
    mat[-1, :] = 1.0
    rhs = np.zeros(gen.n_states)
    rhs[-1] = 1.0
    pi = np.linalg.solve(mat, rhs)
    pi = np.clip(pi, 0.0, None)
    return FiniteDistribution(pi / pi.sum())


def transient_distribution(gen: GeneratorMatrix, initial_state: int, t: float,
                           rate_multiplier: float = 1.0,
                           tail: float = 1e-12) -> FiniteDistribution:
    """Law at time t from a point mass, by uniformization.

    The chain is Poissonized at rate `lam = rate_multiplier * max exit
    rate`; the Poisson series is truncated once its remaining mass drops
    below ``tail``.  Insensitive to the rate choice by construction.
    """
    if t < 0:
        raise ValueError("time must be nonnegative")
    n_states = gen.n_states
    v = np.zeros(n_states)
    v[initial_state] = 1.0
    if t == 0.0:
        return FiniteDistribution(v)
    exit_rates = -gen.matrix.diagonal()
    lam = float(exit_rates.max()) * rate_multiplier
    if lam <= 0.0:
        return FiniteDistribution(v)
    # P = I + Q/lam is a stochastic matrix.
    P = sp.identity(n_states, format="csr") + gen.matrix.multiply(1.0 / lam)
    mean = lam * t
    weight = math.exp(-mean)
    acc = weight * v
    mass = weight
    k = 0
    k_max = int(mean + 12 * math.sqrt(mean) + 50)
    while mass < 1.0 - tail and k < k_max:
        k += 1
        v = v @ P
        weight *= mean / k
        acc = acc + weight * v
        mass += weight
    return FiniteDistribution(acc / acc.sum())


def maximal_coupling(d1: FiniteDistribution, d2: FiniteDistribution) -> np.ndarray:
    """Joint law with marginals d1, d2 minimizing P(X != Y).

    The overlap min(d1, d2) sits on the diagonal; the leftover masses are
    paired off-diagonal greedily in index order (any pairing yields the
    same disagreement probability; this one is deterministic).
    """
    a, b = d1.probs, d2.probs
    if a.size != b.size:
        raise ValueError("distributions must share one outcome set")
    n = a.size
    joint = np.zeros((n, n))
    overlap = np.minimum(a, b)
    np.fill_diagonal(joint, overlap)
    r1 = a - overlap
    r2 = b - overlap
    i = j = 0
    while i < n and j < n:
        if r1[i] <= 1e-18:
            i += 1
            continue
        if r2[j] <= 1e-18:
            j += 1
            continue
        m = min(r1[i], r2[j])
        joint[i, j] += m
        r1[i] -= m
        r2[j] -= m
    if not np.allclose(joint.sum(axis=1), a, atol=1e-12) or \
            not np.allclose(joint.sum(axis=0), b, atol=1e-12):
        raise AssertionError("maximal coupling failed to reproduce its marginals")
    return joint


def disagreement_probability(joint: np.ndarray) -> float:
    return float(joint.sum() - np.trace(joint))
