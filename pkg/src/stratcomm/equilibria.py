"""Commitment and simultaneous-move solutions of encoder-decoder games.

Two problem shapes share one solver core. In a ChainModel game the encoder
chooses a kernel U -> X (a product of row simplices) and the decoder reacts
per context (y, xhat); a ReducedGame is a plain two-player cost-matrix game
with one mixed strategy per side. Both reduce to the same geometry: a set of
decoder contexts (blocks), a response alphabet, and cost tensors that are
linear in the flattened leader strategy for every fixed (context, response).

Solution concepts:
  * optimistic commitment (solve_ose): the leader commits, ties among the
    follower's best responses break in the leader's favor;
  * pessimistic commitment (solve_rse): ties break against the leader;
  * Nash equilibria (nash_equilibria): simultaneous play, pure profiles found
    exhaustively and mixed ones by support enumeration on small games.

Tie rule. In context c with follower costs cost[c, r], response r is tied
with the best response when

    cost[c, r] <= min_r' cost[c, r'] + slack_c,
    slack_c = 1e-9 * (1 + |min|) + 1e-6 * (mass_c + |min|),

that is, an absolute slack that absorbs LP/MILP solution tolerance plus a
relative slack on the mass-conditional cost. Contexts with no reach
probability contribute exactly zero and tie everywhere.

Every reported value comes from re-evaluating the returned leader strategy
under this tie rule, never from a solver objective, so values from different
solvers and from brute-force searches are directly comparable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb, prod

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

from .chain import ChainModel, DecoderStrategy, EncoderStrategy, observation_joint
from .info_limits import channel_capacity, feasibility_test, information_demand
from .probability import ConditionalKernel

ABS_TIE_TOL = 1e-9
REL_TIE_TOL = 1e-6
BEST_RESPONSE_TIE_TOL = 1e-9
MASS_CUTOFF = 1e-12
DEFAULT_SIGMA_CAP = 81
DEFAULT_VERTEX_CAP = 4096
DEFAULT_GRID_RESOLUTION = 50
DEFAULT_MAX_GRID_POINTS = 10_000
REDUCTION_CAP = 40_000
PAIR_BUDGET = 25_000
_EVAL_CHUNK = 4096
_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True, eq=False)
class ReducedGame:
    """Two-player cost-matrix game: rows are leader actions, columns follower."""

    enc_cost: np.ndarray
    dec_cost: np.ndarray
    enc_labels: tuple = ()
    dec_labels: tuple = ()

    def __post_init__(self):
        enc = np.asarray(self.enc_cost, dtype=float)
        dec = np.asarray(self.dec_cost, dtype=float)
        if enc.ndim != 2 or dec.ndim != 2 or enc.shape != dec.shape:
            raise ValueError("enc_cost and dec_cost must be 2-D arrays of the same shape")
        if not (np.all(np.isfinite(enc)) and np.all(np.isfinite(dec))):
            raise ValueError("cost matrices contain non-finite entries")
        if self.enc_labels and len(self.enc_labels) != enc.shape[0]:
            raise ValueError("enc_labels length does not match the row count")
        if self.dec_labels and len(self.dec_labels) != enc.shape[1]:
            raise ValueError("dec_labels length does not match the column count")
        object.__setattr__(self, "enc_cost", enc)
        object.__setattr__(self, "dec_cost", dec)

    @property
    def n_leader(self) -> int:
        return self.enc_cost.shape[0]

    @property
    def n_follower(self) -> int:
        return self.enc_cost.shape[1]


@dataclass(frozen=True, eq=False)
class _Geometry:
    """Block-linear form shared by chain games and reduced games.

    a_enc[c, r, v] and a_dec[c, r, v] give each player's cost contribution of
    context c when the follower answers r, as a linear functional of the
    flattened leader strategy g. mass_coef[c, v] gives the reach probability
    of context c the same way. The leader strategy lives in a product of
    simplices whose block sizes are row_sizes.
    """

    row_sizes: tuple
    a_enc: np.ndarray
    a_dec: np.ndarray
    mass_coef: np.ndarray

    @property
    def n_vars(self) -> int:
        return int(sum(self.row_sizes))

    @property
    def n_blocks(self) -> int:
        return self.a_enc.shape[0]

    @property
    def n_responses(self) -> int:
        return self.a_enc.shape[1]

    def row_slices(self) -> list:
        out, start = [], 0
        for size in self.row_sizes:
            out.append((start, start + size))
            start += size
        return out


def _geometry_from_chain(model: ChainModel) -> _Geometry:
    q = observation_joint(model).values          # (w, u, y)
    ch = model.channel.matrix                    # (x, xhat)
    n_u, n_y = model.n_u, model.n_y
    n_x, n_xh, n_r = model.n_x, model.n_xhat, model.n_what
    # e_*[u, y, r] absorbs the source and the per-letter distortion
    e_dec = np.einsum("wuy,wuyr->uyr", q, model.distortion.d_dec)
    e_enc = np.einsum("wuy,wuyr->uyr", q, model.distortion.d_enc)
    q_uy = q.sum(axis=0)                         # (u, y)
    # a_*[(y, xh), r, (u, x)] = channel(xh | x) * e_*[u, y, r]
    a_dec = np.einsum("xh,uyr->yhrux", ch, e_dec).reshape(n_y * n_xh, n_r, n_u * n_x)
    a_enc = np.einsum("xh,uyr->yhrux", ch, e_enc).reshape(n_y * n_xh, n_r, n_u * n_x)
    mass = np.einsum("xh,uy->yhux", ch, q_uy).reshape(n_y * n_xh, n_u * n_x)
    return _Geometry((n_x,) * n_u, a_enc, a_dec, mass)


def _geometry_from_game(game: ReducedGame) -> _Geometry:
    a_enc = game.enc_cost.T[None, :, :].copy()   # (1, n_follower, n_leader)
    a_dec = game.dec_cost.T[None, :, :].copy()
    mass = np.ones((1, game.n_leader))
    return _Geometry((game.n_leader,), a_enc, a_dec, mass)


def _geometry_of(problem) -> _Geometry:
    if isinstance(problem, ChainModel):
        return _geometry_from_chain(problem)
    if isinstance(problem, ReducedGame):
        return _geometry_from_game(problem)
    raise TypeError(f"expected ChainModel or ReducedGame, got {type(problem).__name__}")


def _flatten_leader(problem, leader) -> np.ndarray:
    if isinstance(problem, ChainModel):
        if isinstance(leader, EncoderStrategy):
            return leader.kernel.matrix.ravel().copy()
        kernel = ConditionalKernel(np.asarray(leader, dtype=float))
        return kernel.matrix.ravel().copy()
    arr = np.asarray(leader, dtype=float).ravel()
    if arr.size != problem.n_leader or np.any(arr < -1e-12) or abs(arr.sum() - 1.0) > 1e-9:
        raise ValueError("leader strategy must be a probability vector over the rows")
    return np.clip(arr, 0.0, None)


@dataclass(frozen=True)
class _Evaluation:
    values: np.ndarray          # (n,) leader values
    follower_values: np.ndarray  # (n,) follower costs at the same selections
    selections: np.ndarray      # (n, c) chosen response per context
    tie_contexts: np.ndarray    # (n,) number of contexts with a non-trivial tie


def _evaluate_batch(geom: _Geometry, g_batch: np.ndarray, pessimistic: bool) -> _Evaluation:
    """Honest leader values for a batch of strategies under the module tie rule."""
    g = np.atleast_2d(np.asarray(g_batch, dtype=float))                 # (n, v)
    dec = np.einsum("crv,nv->ncr", geom.a_dec, g)
    enc = np.einsum("crv,nv->ncr", geom.a_enc, g)
    mass = g @ geom.mass_coef.T                                         # (n, c)
    live = mass > MASS_CUTOFF
    dec_min = dec.min(axis=2)
    slack = ABS_TIE_TOL * (1.0 + np.abs(dec_min)) + REL_TIE_TOL * (mass + np.abs(dec_min))
    tie = dec <= (dec_min + slack)[:, :, None]
    if pessimistic:
        masked = np.where(tie, enc, -np.inf)
        picked = masked.max(axis=2)
        selection = masked.argmax(axis=2)
    else:
        masked = np.where(tie, enc, np.inf)
        picked = masked.min(axis=2)
        selection = masked.argmin(axis=2)
    picked = np.where(live, picked, 0.0)
    take = np.take_along_axis(dec, selection[:, :, None], axis=2)[:, :, 0]
    follower = np.where(live, take, 0.0).sum(axis=1)
    n_ties = (np.count_nonzero(tie, axis=2) > 1).sum(axis=1)
    return _Evaluation(picked.sum(axis=1), follower, selection, n_ties)


def _evaluate_many(geom: _Geometry, g_batch: np.ndarray, pessimistic: bool) -> _Evaluation:
    g = np.atleast_2d(np.asarray(g_batch, dtype=float))
    if len(g) <= _EVAL_CHUNK:
        return _evaluate_batch(geom, g, pessimistic)
    parts = [
        _evaluate_batch(geom, g[start: start + _EVAL_CHUNK], pessimistic)
        for start in range(0, len(g), _EVAL_CHUNK)
    ]
    return _Evaluation(
        np.concatenate([p.values for p in parts]),
        np.concatenate([p.follower_values for p in parts]),
        np.vstack([p.selections for p in parts]),
        np.concatenate([p.tie_contexts for p in parts]),
    )


def evaluate_commitment(problem, leader, pessimistic: bool = False):
    """Leader value and follower response pattern for a committed strategy."""
    geom = _geometry_of(problem)
    g = _flatten_leader(problem, leader)
    ev = _evaluate_batch(geom, g[None, :], pessimistic)
    return float(ev.values[0]), _shape_choice(problem, ev.selections[0])


@dataclass(frozen=True)
class BestResponseSet:
    """Follower best responses per reachable context at a committed strategy.

    per_context maps a context index (flat (y, xhat) for chains, 0 for a
    reduced game) to (tied responses sorted ascending, best conditional
    cost). Contexts with no reach probability are listed separately; any
    response is optimal there.
    """

    per_context: dict
    zero_prob_contexts: tuple


def decoder_best_responses(problem, leader, tie_tol: float = BEST_RESPONSE_TIE_TOL) -> BestResponseSet:
    """Exact argmin sets of the follower's conditional cost, per context.

    The tie tolerance here is absolute on the mass-conditional cost, which is
    the natural scale for reporting; the commitment solvers use the wider
    rule described in the module docstring.
    """
    geom = _geometry_of(problem)
    g = _flatten_leader(problem, leader)
    dec = np.einsum("crv,v->cr", geom.a_dec, g)
    mass = geom.mass_coef @ g
    per_context, dead = {}, []
    for c in range(geom.n_blocks):
        if mass[c] <= MASS_CUTOFF:
            dead.append(c)
            continue
        cond = dec[c] / mass[c]
        best = float(cond.min())
        members = tuple(int(r) for r in np.flatnonzero(cond <= best + tie_tol))
        per_context[c] = (members, best)
    return BestResponseSet(per_context, tuple(dead))


@dataclass(frozen=True)
class CommitmentResult:
    """Outcome of a commitment solve, with honestly re-evaluated values."""

    value: float                  # leader's expected cost
    follower_value: float         # follower's expected cost at the same profile
    leader: np.ndarray            # (n_rows, n_cols) for chains, (n,) for games
    follower_choice: np.ndarray   # response index per context
    pessimistic: bool
    feasibility_margin: float | None = None
    diagnostics: dict = field(default_factory=dict)


def _shape_leader(problem, g_flat: np.ndarray):
    if isinstance(problem, ChainModel):
        return g_flat.reshape(problem.n_u, problem.n_x)
    return g_flat.copy()


def _shape_choice(problem, selection: np.ndarray):
    if isinstance(problem, ChainModel):
        return selection.reshape(problem.n_y, problem.n_xhat)
    return selection.copy()


def result_strategies(model: ChainModel, result: CommitmentResult):
    """Chain strategies (EncoderStrategy, DecoderStrategy) from a solve result."""
    encoder = EncoderStrategy(ConditionalKernel(np.asarray(result.leader, dtype=float)))
    decoder = DecoderStrategy.deterministic(result.follower_choice, model.n_what)
    return encoder, decoder


def _leader_vertices(geom: _Geometry, cap: int):
    """All deterministic leader strategies, or None when there are too many."""
    count = prod(geom.row_sizes)
    if count > cap:
        return None
    slices = geom.row_slices()
    vertices = np.zeros((count, geom.n_vars))
    for index, pattern in enumerate(itertools.product(*(range(s) for s in geom.row_sizes))):
        for (start, _), choice in zip(slices, pattern):
            vertices[index, start + choice] = 1.0
    return vertices


def _simplex_rows(geom: _Geometry):
    rows = np.zeros((len(geom.row_sizes), geom.n_vars))
    for block, (start, stop) in enumerate(geom.row_slices()):
        rows[block, start:stop] = 1.0
    return rows


def _normalize_rows(geom: _Geometry, stack: np.ndarray) -> np.ndarray:
    out = np.array(stack, dtype=float)
    for start, stop in geom.row_slices():
        block = np.clip(out[:, start:stop], 0.0, None)
        out[:, start:stop] = block / block.sum(axis=1, keepdims=True)
    return out


def _grid_tolerance(geom: _Geometry, resolution: int, value: float) -> float:
    """Agreement tolerance versus a resolution-limited simplex-grid search.

    Within one follower-selection region the leader value is linear, so the
    gap to the best grid point is bounded by a per-block Lipschitz constant
    times the block's covering radius. The bound assumes the optimum's
    selection region contains nearby grid points, which holds for generic
    cost tensors.
    """
    if resolution <= 0:
        return ABS_TIE_TOL * (1.0 + abs(value))
    bound = 0.0
    for (start, stop), size in zip(geom.row_slices(), geom.row_sizes):
        spread = geom.a_enc[:, :, start:stop].max(axis=2) - geom.a_enc[:, :, start:stop].min(axis=2)
        lipschitz = spread.max(axis=1).sum() / 2.0
        bound += lipschitz * (float(size) / resolution)
    return bound + ABS_TIE_TOL * (1.0 + abs(value))


def _ose_lp(geom: _Geometry, sigma) -> np.ndarray | None:
    """Minimize the leader cost of selection sigma over its best-response region."""
    n_v = geom.n_vars
    objective = geom.a_enc[np.arange(geom.n_blocks), list(sigma), :].sum(axis=0)
    rows = []
    for c in range(geom.n_blocks):
        chosen = geom.a_dec[c, sigma[c]]
        for r in range(geom.n_responses):
            if r != sigma[c]:
                rows.append(chosen - geom.a_dec[c, r])
    a_ub = np.array(rows) if rows else np.zeros((0, n_v))
    result = linprog(
        objective,
        A_ub=a_ub,
        b_ub=np.zeros(len(a_ub)),
        A_eq=_simplex_rows(geom),
        b_eq=np.ones(len(geom.row_sizes)),
        bounds=(0.0, 1.0),
        method="highs",
        options=dict(_LP_OPTIONS),
    )
    if not result.success:
        return None
    return np.asarray(result.x, dtype=float)


def _ose_milp(geom: _Geometry) -> np.ndarray | None:
    """Joint selection-and-strategy search as a big-M epigraph program.

    Returns the leader strategy of the re-solved linear program for the
    selection the integer program chose, which sharpens the integer solver's
    looser feasibility tolerance.
    """
    c_blocks, n_r, n_v = geom.n_blocks, geom.n_responses, geom.n_vars
    n_rows = len(geom.row_sizes)
    n_y = c_blocks * n_r
    # variable layout: [g (n_v) | y (c * r binaries) | t (c epigraph)]
    n_total = n_v + n_y + c_blocks
    bound_dec = n_rows * float(np.max(np.abs(geom.a_dec))) if geom.a_dec.size else 0.0
    bound_enc = n_rows * float(np.max(np.abs(geom.a_enc))) if geom.a_enc.size else 0.0
    m_dec = 2.0 * bound_dec + 1.0
    m_enc = 2.0 * bound_enc + 1.0

    def y_index(c, r):
        return n_v + c * n_r + r

    constraints = []
    simplex = np.zeros((n_rows, n_total))
    simplex[:, :n_v] = _simplex_rows(geom)
    constraints.append(LinearConstraint(simplex, np.ones(n_rows), np.ones(n_rows)))

    select = np.zeros((c_blocks, n_total))
    for c in range(c_blocks):
        select[c, y_index(c, 0): y_index(c, 0) + n_r] = 1.0
    constraints.append(LinearConstraint(select, np.ones(c_blocks), np.ones(c_blocks)))

    br_rows, epi_rows = [], []
    for c in range(c_blocks):
        for r in range(n_r):
            epi = np.zeros(n_total)
            epi[:n_v] = geom.a_enc[c, r]
            epi[n_v + n_y + c] = -1.0
            epi[y_index(c, r)] = m_enc
            epi_rows.append(epi)
            for r_other in range(n_r):
                if r_other == r:
                    continue
                row = np.zeros(n_total)
                row[:n_v] = geom.a_dec[c, r] - geom.a_dec[c, r_other]
                row[y_index(c, r)] = m_dec
                br_rows.append(row)
    if br_rows:
        a = np.array(br_rows)
        constraints.append(LinearConstraint(a, -np.inf, np.full(len(a), m_dec)))
    a = np.array(epi_rows)
    constraints.append(LinearConstraint(a, -np.inf, np.full(len(a), m_enc)))

    objective = np.zeros(n_total)
    objective[n_v + n_y:] = 1.0
    integrality = np.zeros(n_total)
    integrality[n_v: n_v + n_y] = 1
    lower = np.concatenate([np.zeros(n_v), np.zeros(n_y), np.full(c_blocks, -bound_enc - 1.0)])
    upper = np.concatenate([np.ones(n_v), np.ones(n_y), np.full(c_blocks, bound_enc + 1.0)])
    result = milp(
        objective,
        constraints=constraints,
        integrality=integrality,
        bounds=Bounds(lower, upper),
        options={"mip_rel_gap": 0.0},
    )
    if not result.success or result.x is None:
        return None
    y_values = result.x[n_v: n_v + n_y].reshape(c_blocks, n_r)
    sigma = tuple(int(r) for r in y_values.argmax(axis=1))
    sharpened = _ose_lp(geom, sigma)
    if sharpened is not None:
        return sharpened
    return np.asarray(result.x[:n_v], dtype=float)


def _feasibility_margins(model: ChainModel, stack: np.ndarray, z_kernel, capacity: float):
    budget = model.rate_ratio * capacity
    margins = np.empty(len(stack))
    for i, g_flat in enumerate(stack):
        encoder = EncoderStrategy(ConditionalKernel(g_flat.reshape(model.n_u, model.n_x)))
        margins[i] = budget - information_demand(model, encoder, z_kernel)
    return margins


def _repair_candidate(model, geom, g_flat, anchor, z_kernel, capacity, tol=1e-9):
    """Bisect toward a feasible anchor until the rate constraint holds."""
    budget = model.rate_ratio * capacity

    def margin_of(t):
        point = (1.0 - t) * g_flat + t * anchor
        encoder = EncoderStrategy(ConditionalKernel(point.reshape(model.n_u, model.n_x)))
        return budget - information_demand(model, encoder, z_kernel), point

    lo, hi = 0.0, 1.0
    point = anchor.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        margin, candidate = margin_of(mid)
        if margin >= -1e-9:
            hi, point = mid, candidate
        else:
            lo = mid
        if hi - lo <= tol:
            break
    return point


def solve_ose(
    problem,
    sigma_cap: int = DEFAULT_SIGMA_CAP,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    extra_candidates=None,
    enforce_rate: bool = False,
    z_kernel: ConditionalKernel | None = None,
) -> CommitmentResult:
    """Optimistic commitment value: min over strategies with favorable ties.

    Every deterministic follower selection defines a linear program over the
    leader polytope; when the selection count R ** C is within sigma_cap the
    programs are enumerated, which is exact, otherwise an equivalent big-M
    mixed-integer program is solved. Deterministic leader strategies and any
    caller-supplied extra candidates are always added, and the final value is
    the honest optimistic re-evaluation of the best candidate.

    With enforce_rate set (chain games only) candidates violating the rate
    budget are replaced by bisection toward the nearest feasible candidate;
    constant encoders, which always satisfy the budget, are added as anchors.
    """
    geom = _geometry_of(problem)
    n_sigma = geom.n_responses ** geom.n_blocks
    candidates = []
    if n_sigma <= sigma_cap:
        method = "lp_enumeration"
        for sigma in itertools.product(range(geom.n_responses), repeat=geom.n_blocks):
            g = _ose_lp(geom, sigma)
            if g is not None:
                candidates.append(g)
    else:
        method = "milp"
        g = _ose_milp(geom)
        if g is not None:
            candidates.append(g)
    n_solver = len(candidates)
    vertices = _leader_vertices(geom, vertex_cap)
    if vertices is not None:
        candidates.extend(vertices)
    if extra_candidates is not None:
        candidates.extend(np.atleast_2d(np.asarray(extra_candidates, dtype=float)))
    if not candidates:
        raise RuntimeError("optimistic commitment solve produced no feasible candidate")
    stack = _normalize_rows(geom, np.array(candidates))

    rate_note = "off"
    if enforce_rate:
        if not isinstance(problem, ChainModel):
            raise ValueError("rate enforcement applies to chain games only")
        model = problem
        constants = np.zeros((model.n_x, geom.n_vars))
        for x in range(model.n_x):
            constants[x, x::model.n_x] = 1.0
        stack = np.vstack([stack, constants])
        capacity = channel_capacity(model.channel).capacity
        margins = _feasibility_margins(model, stack, z_kernel, capacity)
        feasible = margins >= -1e-9
        if not np.all(feasible):
            anchors = stack[feasible]
            repaired = []
            for g_flat in stack[~feasible]:
                distances = np.abs(anchors - g_flat).sum(axis=1)
                anchor = anchors[int(np.argmin(distances))]
                repaired.append(
                    _repair_candidate(model, geom, g_flat, anchor, z_kernel, capacity)
                )
            stack = np.vstack([anchors, np.array(repaired)])
            rate_note = "repaired"
        else:
            rate_note = "slack"

    ev = _evaluate_many(geom, stack, pessimistic=False)
    best = int(np.argmin(ev.values))
    margin = None
    if enforce_rate:
        capacity = channel_capacity(problem.channel).capacity
        margins = _feasibility_margins(problem, stack[best: best + 1], z_kernel, capacity)
        margin = float(margins[0])
    return CommitmentResult(
        value=float(ev.values[best]),
        follower_value=float(ev.follower_values[best]),
        leader=_shape_leader(problem, stack[best]),
        follower_choice=_shape_choice(problem, ev.selections[best]),
        pessimistic=False,
        feasibility_margin=margin,
        diagnostics={
            "method": method,
            "n_selections": n_sigma,
            "n_solver_candidates": n_solver,
            "n_vertex_candidates": 0 if vertices is None else len(vertices),
            "best_from_solver": best < n_solver,
            "tie_contexts": int(ev.tie_contexts[best]),
            "rate_constraint": rate_note,
            "comparison_tolerance": _grid_tolerance(
                geom, DEFAULT_GRID_RESOLUTION, float(ev.values[best])
            ),
        },
    )


def _simplex_grid(size: int, resolution: int) -> np.ndarray:
    points = []
    for split in itertools.combinations(range(resolution + size - 1), size - 1):
        counts, prev = [], -1
        for cut in split:
            counts.append(cut - prev - 1)
            prev = cut
        counts.append(resolution + size - 2 - prev)
        points.append(counts)
    return np.array(points, dtype=float) / float(resolution)


def _product_grid(geom: _Geometry, resolution: int) -> np.ndarray:
    grid = np.zeros((1, 0))
    for size in geom.row_sizes:
        block = _simplex_grid(size, resolution)
        grid = np.hstack(
            [np.repeat(grid, len(block), axis=0), np.tile(block, (len(grid), 1))]
        )
    return grid


def _grid_count(row_sizes, resolution: int) -> int:
    return prod(comb(resolution + s - 1, s - 1) for s in row_sizes)


def _refine_pessimistic(geom: _Geometry, g0, v0, max_rounds, feasible_check=None):
    """Local pairwise-transfer descent of the pessimistic value."""
    g, value = g0.copy(), v0
    step = 0.25
    slices = geom.row_slices()
    for _ in range(max_rounds):
        if step < 1e-5:
            break
        neighbors = []
        for start, stop in slices:
            size = stop - start
            for a in range(size):
                for b in range(size):
                    if a == b or g[start + b] <= 1e-15:
                        continue
                    delta = min(step, g[start + b])
                    candidate = g.copy()
                    candidate[start + a] += delta
                    candidate[start + b] -= delta
                    neighbors.append(candidate)
        if not neighbors:
            break
        ev = _evaluate_many(geom, np.array(neighbors), pessimistic=True)
        order = np.argsort(ev.values)
        moved = False
        for index in order[:1]:
            if ev.values[index] < value - 1e-15:
                candidate = neighbors[int(index)]
                if feasible_check is not None and not feasible_check(candidate):
                    break
                g, value = candidate, float(ev.values[index])
                moved = True
        if not moved:
            step *= 0.5
    return g, value


def solve_rse(
    problem,
    grid_resolution: int = DEFAULT_GRID_RESOLUTION,
    max_grid_points: int = DEFAULT_MAX_GRID_POINTS,
    vertex_cap: int = DEFAULT_VERTEX_CAP,
    refine_rounds: int = 60,
    enforce_rate: bool = False,
    z_kernel: ConditionalKernel | None = None,
) -> CommitmentResult:
    """Pessimistic commitment value: min over strategies with adversarial ties.

    The pessimistic value function is piecewise linear but jumps where the
    follower's tie set changes, so the solve is a dense search: deterministic
    strategies, a simplex-product grid (resolution reduced until the grid
    fits max_grid_points), and pairwise-transfer refinement from the best
    point. The result is an upper bound on the exact pessimistic value; the
    comparison_tolerance diagnostic bounds the gap to any equally-fine search.

    With enforce_rate set (chain games only) the search is restricted to
    candidates satisfying the rate budget; constant encoders are always
    included so the restricted search is never empty.
    """
    geom = _geometry_of(problem)
    candidates = []
    vertices = _leader_vertices(geom, vertex_cap)
    if vertices is not None:
        candidates.append(vertices)
    resolution = 0
    for trial in range(grid_resolution, 0, -1):
        if _grid_count(geom.row_sizes, trial) <= max_grid_points:
            resolution = trial
            break
    if resolution:
        candidates.append(_product_grid(geom, resolution))
    if not candidates:
        candidates.append(np.concatenate([
            np.full(size, 1.0 / size) for size in geom.row_sizes
        ])[None, :])
    stack = np.vstack(candidates)

    rate_note = "off"
    feasible_check = None
    if enforce_rate:
        if not isinstance(problem, ChainModel):
            raise ValueError("rate enforcement applies to chain games only")
        model = problem
        constants = np.zeros((model.n_x, geom.n_vars))
        for x in range(model.n_x):
            constants[x, x::model.n_x] = 1.0
        stack = np.vstack([stack, constants])
        capacity = channel_capacity(model.channel).capacity
        margins = _feasibility_margins(model, stack, z_kernel, capacity)
        keep = margins >= -1e-9
        stack = stack[keep]
        rate_note = "filtered" if not np.all(keep) else "slack"
        budget = model.rate_ratio * capacity

        def feasible_check(candidate):
            encoder = EncoderStrategy(
                ConditionalKernel(candidate.reshape(model.n_u, model.n_x))
            )
            return budget - information_demand(model, encoder, z_kernel) >= -1e-9

    ev = _evaluate_many(geom, stack, pessimistic=True)
    best = int(np.argmin(ev.values))
    g_best, v_best = stack[best], float(ev.values[best])
    g_ref, _ = _refine_pessimistic(
        geom, g_best, v_best, max_rounds=refine_rounds, feasible_check=feasible_check
    )
    final = _evaluate_batch(geom, g_ref[None, :], pessimistic=True)
    margin = None
    if enforce_rate:
        capacity = channel_capacity(problem.channel).capacity
        margin = float(
            _feasibility_margins(problem, g_ref[None, :], z_kernel, capacity)[0]
        )
    return CommitmentResult(
        value=float(final.values[0]),
        follower_value=float(final.follower_values[0]),
        leader=_shape_leader(problem, g_ref),
        follower_choice=_shape_choice(problem, final.selections[0]),
        pessimistic=True,
        feasibility_margin=margin,
        diagnostics={
            "method": "grid_refine",
            "grid_resolution": resolution,
            "n_candidates": len(stack),
            "refine_gain": v_best - float(final.values[0]),
            "tie_contexts": int(final.tie_contexts[0]),
            "rate_constraint": rate_note,
            "comparison_tolerance": _grid_tolerance(
                geom, resolution, float(final.values[0])
            ),
        },
    )


@dataclass(frozen=True)
class NashPoint:
    """One Nash equilibrium in mixed strategies of a finite game."""

    leader: np.ndarray
    follower: np.ndarray
    leader_value: float
    follower_value: float
    kind: str                      # "pure" or "mixed"


@dataclass(frozen=True)
class NashReport:
    equilibria: tuple
    diagnostics: dict = field(default_factory=dict)


def _verify_equilibrium(enc_cost, dec_cost, x, y, eps) -> tuple | None:
    enc_value = float(x @ enc_cost @ y)
    dec_value = float(x @ dec_cost @ y)
    if enc_value > float(np.min(enc_cost @ y)) + eps:
        return None
    if dec_value > float(np.min(x @ dec_cost)) + eps:
        return None
    return enc_value, dec_value


def nash_equilibria_bimatrix(
    enc_cost,
    dec_cost,
    support_cap: int = 8,
    pair_budget: int = PAIR_BUDGET,
    tol: float = ABS_TIE_TOL,
    max_equilibria: int = 256,
) -> NashReport:
    """All pure Nash equilibria, plus mixed ones on small games.

    Pure profiles are checked exhaustively at any size. Mixed equilibria are
    found by equal-cardinality support enumeration, solving the two
    indifference systems per support pair, and are only attempted when the
    number of support pairs stays within pair_budget; every solution is
    verified as an epsilon-equilibrium before being reported.
    """
    enc = np.asarray(enc_cost, dtype=float)
    dec = np.asarray(dec_cost, dtype=float)
    if enc.shape != dec.shape or enc.ndim != 2:
        raise ValueError("cost matrices must be 2-D and congruent")
    n_g, n_h = enc.shape
    scale = max(1.0, float(np.max(np.abs(enc))), float(np.max(np.abs(dec))))
    eps = tol * scale

    points = []
    col_min = enc.min(axis=0)
    row_min = dec.min(axis=1)
    pure_mask = (enc <= col_min[None, :] + eps) & (dec <= row_min[:, None] + eps)
    for i, j in np.argwhere(pure_mask):
        x = np.zeros(n_g)
        x[i] = 1.0
        y = np.zeros(n_h)
        y[j] = 1.0
        points.append(NashPoint(x, y, float(enc[i, j]), float(dec[i, j]), "pure"))

    max_support = min(n_g, n_h, support_cap)
    n_pairs = sum(comb(n_g, k) * comb(n_h, k) for k in range(2, max_support + 1))
    mixed_enumerated = 0 < n_pairs <= pair_budget
    degenerate = 0
    if mixed_enumerated:
        for k in range(2, max_support + 1):
            for rows in itertools.combinations(range(n_g), k):
                e_rows = enc[list(rows)]
                d_rows = dec[list(rows)]
                for cols in itertools.combinations(range(n_h), k):
                    e_sub = e_rows[:, list(cols)]
                    d_sub = d_rows[:, list(cols)]
                    system_y = np.zeros((k + 1, k + 1))
                    system_y[:k, :k] = e_sub
                    system_y[:k, k] = -1.0
                    system_y[k, :k] = 1.0
                    system_x = np.zeros((k + 1, k + 1))
                    system_x[:k, :k] = d_sub.T
                    system_x[:k, k] = -1.0
                    system_x[k, :k] = 1.0
                    rhs = np.zeros(k + 1)
                    rhs[k] = 1.0
                    try:
                        sol_y = np.linalg.solve(system_y, rhs)
                        sol_x = np.linalg.solve(system_x, rhs)
                    except np.linalg.LinAlgError:
                        degenerate += 1
                        continue
                    y_sub, x_sub = sol_y[:k], sol_x[:k]
                    if np.min(y_sub) < -1e-9 or np.min(x_sub) < -1e-9:
                        continue
                    x = np.zeros(n_g)
                    x[list(rows)] = np.clip(x_sub, 0.0, None)
                    y = np.zeros(n_h)
                    y[list(cols)] = np.clip(y_sub, 0.0, None)
                    x /= x.sum()
                    y /= y.sum()
                    verified = _verify_equilibrium(enc, dec, x, y, eps)
                    if verified is None:
                        continue
                    duplicate = any(
                        np.max(np.abs(p.leader - x)) < 1e-7
                        and np.max(np.abs(p.follower - y)) < 1e-7
                        for p in points
                    )
                    if not duplicate and len(points) < max_equilibria:
                        points.append(NashPoint(x, y, verified[0], verified[1], "mixed"))
    n_pure = sum(1 for p in points if p.kind == "pure")
    return NashReport(
        equilibria=tuple(points),
        diagnostics={
            "n_pure": n_pure,
            "n_mixed": len(points) - n_pure,
            "mixed_enumerated": mixed_enumerated,
            "n_support_pairs": int(n_pairs),
            "degenerate_supports": degenerate,
        },
    )


def _int_patterns(n_slots: int, n_symbols: int) -> np.ndarray:
    """All length-n_slots tuples over range(n_symbols) as an int array."""
    grids = np.indices((n_symbols,) * n_slots).reshape(n_slots, -1).T
    return grids.astype(int)


@dataclass(frozen=True)
class BimatrixReduction:
    """Deterministic-strategy cost matrices of a chain game.

    Row I of encoder_patterns maps each u to a channel input; row J of
    decoder_patterns maps each flat context (y, xhat) to a reconstruction.
    Encoders dropped by a feasible_only reduction are listed by pattern index.
    """

    game: ReducedGame
    encoder_patterns: np.ndarray
    decoder_patterns: np.ndarray
    excluded_encoders: tuple = ()


def reduce_to_bimatrix(
    model: ChainModel,
    feasible_only: bool = False,
    z_kernel: ConditionalKernel | None = None,
    cap: int = REDUCTION_CAP,
) -> BimatrixReduction:
    """Expected-cost matrices over deterministic strategy pairs.

    Costs are bilinear in behavior strategies, so mixtures over these
    patterns span the same outcomes as behavior strategies. With
    feasible_only, deterministic encoders that violate the rate budget are
    excluded and recorded.
    """
    geom = _geometry_from_chain(model)
    n_det_enc = model.n_x ** model.n_u
    n_det_dec = model.n_what ** (model.n_y * model.n_xhat)
    if n_det_enc > cap or n_det_dec > cap:
        raise ValueError(
            f"deterministic strategy spaces ({n_det_enc} x {n_det_dec}) exceed the "
            f"reduction cap {cap}"
        )
    enc_patterns = _int_patterns(model.n_u, model.n_x)
    dec_patterns = _int_patterns(geom.n_blocks, geom.n_responses)
    excluded = ()
    if feasible_only:
        kept, dropped = [], []
        for index, pattern in enumerate(enc_patterns):
            encoder = EncoderStrategy.deterministic(pattern.tolist(), model.n_x)
            report = feasibility_test(model, encoder, z_kernel)
            (kept if report.feasible else dropped).append(index)
        if not kept:
            raise ValueError("no deterministic encoder satisfies the rate budget")
        excluded = tuple(dropped)
        enc_patterns = enc_patterns[kept]
    vertices = np.zeros((len(enc_patterns), geom.n_vars))
    for index, pattern in enumerate(enc_patterns):
        for u, x in enumerate(pattern):
            vertices[index, u * model.n_x + x] = 1.0
    enc_ctx = np.einsum("crv,nv->ncr", geom.a_enc, vertices)   # (n_enc, c, r)
    dec_ctx = np.einsum("crv,nv->ncr", geom.a_dec, vertices)
    block_index = np.arange(geom.n_blocks)[None, :]
    enc_mat = enc_ctx[:, block_index, dec_patterns].sum(axis=2)
    dec_mat = dec_ctx[:, block_index, dec_patterns].sum(axis=2)
    return BimatrixReduction(
        ReducedGame(enc_mat, dec_mat), enc_patterns, dec_patterns, excluded
    )


def nash_equilibria(problem, **kwargs) -> NashReport:
    """Nash equilibria of a reduced game or of a chain game.

    Chain games are first reduced to their deterministic-strategy bimatrix
    form; mixed equilibria of that form are mapped back to behavior kernels,
    which preserves both values because the costs are bilinear.
    """
    if isinstance(problem, ReducedGame):
        return nash_equilibria_bimatrix(problem.enc_cost, problem.dec_cost, **kwargs)
    if not isinstance(problem, ChainModel):
        raise TypeError(f"expected ChainModel or ReducedGame, got {type(problem).__name__}")
    model = problem
    reduction = reduce_to_bimatrix(model)
    game = reduction.game
    report = nash_equilibria_bimatrix(game.enc_cost, game.dec_cost, **kwargs)
    n_ctx = model.n_y * model.n_xhat
    mapped = []
    for point in report.equilibria:
        g = np.zeros((model.n_u, model.n_x))
        for weight, pattern in zip(point.leader, reduction.encoder_patterns):
            if weight > 0:
                g[np.arange(model.n_u), pattern] += weight
        h = np.zeros((n_ctx, model.n_what))
        for weight, pattern in zip(point.follower, reduction.decoder_patterns):
            if weight > 0:
                h[np.arange(n_ctx), pattern] += weight
        mapped.append(
            NashPoint(g, h, point.leader_value, point.follower_value, point.kind)
        )
    diagnostics = dict(report.diagnostics)
    diagnostics["bimatrix_shape"] = [game.n_leader, game.n_follower]
    return NashReport(equilibria=tuple(mapped), diagnostics=diagnostics)


def audit_commitment_order(problem, tol: float = 1e-9, **solver_kwargs) -> dict:
    """Compare commitment and Nash leader costs on one game.

    Records whether the pessimistic value dominates the optimistic one,
    whether the optimistic value lower-bounds every Nash leader cost, and
    whether some Nash equilibrium costs the leader at least the pessimistic
    value. Existence statements are recorded, never assumed: with no
    equilibria found the exists flag is False and the for-all flag True.

    The Nash leader mixtures are added to the optimistic candidate set, so
    the optimistic value never exceeds a Nash value by more than honest
    evaluation noise.
    """
    nash = nash_equilibria(
        problem, **{k: v for k, v in solver_kwargs.items() if k in ("support_cap", "pair_budget")}
    )
    extra = None
    if nash.equilibria:
        extra = np.array([
            np.asarray(point.leader, dtype=float).ravel() for point in nash.equilibria
        ])
    ose = solve_ose(
        problem,
        extra_candidates=extra,
        **{k: v for k, v in solver_kwargs.items() if k in ("sigma_cap", "vertex_cap")},
    )
    rse = solve_rse(
        problem,
        **{
            k: v
            for k, v in solver_kwargs.items()
            if k in ("grid_resolution", "max_grid_points", "refine_rounds")
        },
    )
    ne_values = [point.leader_value for point in nash.equilibria]
    return {
        "ose": ose.value,
        "rse": rse.value,
        "ne_values": ne_values,
        "n_ne": len(ne_values),
        "rse_ge_ose": bool(rse.value >= ose.value - tol),
        "ose_le_all_ne": all(ose.value <= v + tol for v in ne_values),
        "exists_ne_ge_rse": any(v >= rse.value - tol for v in ne_values),
        "ose_result": ose,
        "rse_result": rse,
        "nash_report": nash,
    }
