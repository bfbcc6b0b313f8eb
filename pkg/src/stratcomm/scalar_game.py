"""A scalar commitment game where committing is strictly worse than any Nash play.

Both players pick a number in [-1, 1]. The encoder's cost is h * (h - g); the
decoder is indifferent (constant cost zero), so every decoder action is a
best response and the pessimistic commitment value is the full inner maximum.
Closed forms:

  * inner maximum: max_h h(h - g) = 1 + |g|, at h = -sign(g) (either endpoint
    when g = 0), so the pessimistic commitment value is 1, at g = 0;
  * optimistic commitment: min_h h(h - g) = -g^2 / 4 at h = g / 2, so the
    optimistic value is -1/4, at g = +-1;
  * Nash equilibria: any h with g = sign(h), plus (g, 0) for every g; the
    encoder's cost over these profiles is h^2 - |h|, which lies in [-1/4, 0].

The pessimistic value 1 therefore exceeds every Nash value by at least 1.
Analytic values are primary; grids only confirm them at a requested
resolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RSE_VALUE = 1.0
RSE_LEADER = 0.0
OSE_VALUE = -0.25
MAX_NE_VALUE = 0.0
MIN_NE_VALUE = -0.25


def encoder_cost(g: float, h: float) -> float:
    """The encoder's cost h * (h - g); both arguments must lie in [-1, 1]."""
    if not (-1.0 <= g <= 1.0 and -1.0 <= h <= 1.0):
        raise ValueError(f"strategies must lie in [-1, 1], got g={g}, h={h}")
    return h * (h - g)


def decoder_cost(g: float, h: float) -> float:
    """The decoder's cost, identically zero: every response is a best one."""
    if not (-1.0 <= g <= 1.0 and -1.0 <= h <= 1.0):
        raise ValueError(f"strategies must lie in [-1, 1], got g={g}, h={h}")
    return 0.0


def worst_case_cost(g: float) -> float:
    """max over h in [-1, 1] of h(h - g), in closed form 1 + |g|."""
    if not -1.0 <= g <= 1.0:
        raise ValueError(f"g must lie in [-1, 1], got {g}")
    return 1.0 + abs(g)


def best_case_cost(g: float) -> float:
    """min over h in [-1, 1] of h(h - g), in closed form -g**2 / 4."""
    if not -1.0 <= g <= 1.0:
        raise ValueError(f"g must lie in [-1, 1], got {g}")
    return -(g * g) / 4.0


def _grid(resolution: float) -> np.ndarray:
    """Symmetric grid on [-1, 1] at the given spacing, always containing 0."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    half = max(1, round(1.0 / resolution))
    return np.linspace(-1.0, 1.0, 2 * half + 1)


@dataclass(frozen=True)
class ScalarSolution:
    """Analytic value with its grid confirmation and the optimizing strategy."""

    value: float
    leader: float
    grid_value: float
    grid_leader: float
    resolution: float


def rse_value(resolution: float = 1e-3) -> ScalarSolution:
    """Pessimistic commitment value min_g max_h h(h - g) = 1 at g = 0."""
    grid = _grid(resolution)
    costs = grid[None, :] * (grid[None, :] - grid[:, None])   # [g, h]
    worst = costs.max(axis=1)
    best = int(np.argmin(worst))
    return ScalarSolution(
        value=RSE_VALUE,
        leader=RSE_LEADER,
        grid_value=float(worst[best]),
        grid_leader=float(grid[best]),
        resolution=resolution,
    )


def ose_value(resolution: float = 1e-3) -> ScalarSolution:
    """Optimistic commitment value min_g min_h h(h - g) = -1/4 at g = +-1."""
    grid = _grid(resolution)
    costs = grid[None, :] * (grid[None, :] - grid[:, None])
    cheap = costs.min(axis=1)
    best = int(np.argmin(cheap))
    return ScalarSolution(
        value=OSE_VALUE,
        leader=1.0,
        grid_value=float(cheap[best]),
        grid_leader=float(grid[best]),
        resolution=resolution,
    )


@dataclass(frozen=True)
class NashBound:
    """Largest encoder cost over Nash profiles, with grid witnesses."""

    max_value: float
    min_value: float
    witnesses: tuple           # (g, h, cost) triples sampled from the NE set


def ne_value_bound(resolution: float = 1e-3) -> NashBound:
    """Encoder cost over the Nash set {g = sign(h)} plus {h = 0}: within [-1/4, 0].

    The decoder is everywhere indifferent, so (g, h) is an equilibrium
    exactly when g is an encoder best response to h, namely g = sign(h) for
    h != 0 and arbitrary g at h = 0.
    """
    grid = _grid(resolution)
    witnesses = []
    values = []
    for h in grid:
        g = float(np.sign(h))
        cost = h * (h - g)
        values.append(cost)
        witnesses.append((g, float(h), float(cost)))
    values = np.array(values)
    return NashBound(
        max_value=float(values.max()),
        min_value=float(values.min()),
        witnesses=tuple(witnesses),
    )


def audit_counterexample(resolution: float = 1e-3) -> dict:
    """Full record of the separation between commitment and Nash play.

    separation = pessimistic commitment value minus the largest Nash encoder
    cost; it is at least 1 because the former is 1 and the latter is at
    most 0.
    """
    rse = rse_value(resolution)
    ose = ose_value(resolution)
    nash = ne_value_bound(resolution)
    return {
        "rse_value": rse.value,
        "rse_leader": rse.leader,
        "rse_grid_value": rse.grid_value,
        "ose_value": ose.value,
        "ose_grid_value": ose.grid_value,
        "max_ne_value": nash.max_value,
        "min_ne_value": nash.min_value,
        "separation": rse.value - nash.max_value,
        "resolution": resolution,
    }
