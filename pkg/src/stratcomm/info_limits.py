"""Information limits for the communication chain.

Capacity of the discrete memoryless channel via Blahut-Arimoto, the
rate-distortion function of a source via the Blahut fixed point, the rate
feasibility test that compares the strategic information demand
I(W, U; Z | Y) against the supplied rate rate_ratio * C, and audits of two
conditional-information identities on arbitrary joints.

All rates are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import ChainModel, EncoderStrategy, observation_joint
from .probability import (
    ConditionalKernel,
    FiniteDistribution,
    JointTensor,
    compose,
    conditional_entropy,
    conditional_mutual_information,
    entropy,
    marginalize,
    mutual_information,
)

CAPACITY_TOL = 1e-10
RD_TOL = 1e-10
MAX_ITERATIONS = 10_000
FEASIBILITY_SLACK = 1e-9


@dataclass(frozen=True)
class CapacityResult:
    """Capacity estimate with the optimal input law and the final bounds."""

    capacity: float
    input_distribution: np.ndarray
    lower_bound: float
    upper_bound: float
    iterations: int
    converged: bool


def channel_capacity(
    channel: ConditionalKernel,
    tol: float = CAPACITY_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> CapacityResult:
    """Blahut-Arimoto ascent for max_q I(X; Xh) with a two-sided bracket.

    The iteration stops once the upper and lower capacity bounds are within
    tol of each other, so the returned value is correct to tol regardless of
    how slowly the input law itself converges.
    """
    p = channel.matrix
    n_x = channel.n_inputs
    q = np.full(n_x, 1.0 / n_x)
    mask = p > 0
    log_p = np.zeros_like(p)
    log_p[mask] = np.log2(p[mask])

    lower = 0.0
    upper = np.inf
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        w = q @ p
        log_w = np.zeros_like(w)
        w_mask = w > 0
        log_w[w_mask] = np.log2(w[w_mask])
        # log_c[x] = D(P(.|x) || w) in bits
        log_c = np.sum(np.where(mask, p * (log_p - log_w[None, :]), 0.0), axis=1)
        scale = np.exp2(log_c)
        total = float(q @ scale)
        lower = float(np.log2(total)) if total > 0 else 0.0
        upper = float(np.max(log_c))
        if upper - lower <= tol:
            return CapacityResult(lower, q, lower, upper, iterations, True)
        q = q * scale / total

    return CapacityResult(lower, q, lower, upper, iterations, False)


@dataclass(frozen=True)
class RatePoint:
    """One point on a rate-distortion curve."""

    distortion: float
    rate: float
    multiplier: float


def _blahut_point(
    p: np.ndarray,
    d: np.ndarray,
    s: float,
    tol: float,
    max_iterations: int,
) -> RatePoint:
    """Blahut fixed point at exponential multiplier s >= 0 (rate slope -s/ln 2)."""
    n_out = d.shape[1]
    if s == 0.0:
        # Zero rate: the reproduction is a single letter chosen to minimize
        # expected distortion.
        col = p @ d
        return RatePoint(float(np.min(col)), 0.0, 0.0)

    # Per-row exponent shift keeps exp finite for very large s; the shift
    # cancels in the conditional law and in both the distortion and rate sums.
    row_min = d.min(axis=1, keepdims=True)
    a = np.exp(-s * (d - row_min))
    q = np.full(n_out, 1.0 / n_out)
    # The iteration multiplies q by c_y = sum_x p_x a_xy / (a q)_x; the dual
    # value is then within log2(max_y c_y) of optimal, the same I-projection
    # bound that brackets the capacity ascent. Stopping on that gap, rather
    # than on the rate delta, prevents early exits at small s where the rate
    # stabilizes long before the reproduction law does. The distortion
    # coordinate moves by roughly gap / s, so the gap target scales with s.
    gap_target = tol * min(1.0, s)
    for _ in range(max_iterations):
        denom = a @ q
        c = (p / denom) @ a
        gap = float(np.log2(np.max(c)))
        q = q * c
        q /= q.sum()
        if gap <= gap_target:
            break
    denom = a @ q
    cond = a * q[None, :] / denom[:, None]
    dist = float(np.sum(p[:, None] * cond * d))
    # Rate as the exact mutual information of the induced joint, so the
    # returned pair is achievable regardless of how the loop exited.
    q_out = p @ cond
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(cond > 0, cond / q_out[None, :], 1.0)
        log_term = np.where(cond > 0, np.log2(ratio), 0.0)
    rate = float(np.sum(p[:, None] * cond * log_term))
    return RatePoint(dist, max(rate, 0.0), s)


def rate_distortion_curve(
    source: FiniteDistribution,
    distortion: np.ndarray,
    n_points: int = 33,
    s_max: float = 1e4,
    tol: float = RD_TOL,
    max_iterations: int = MAX_ITERATIONS,
) -> list:
    """Sweep the Blahut fixed point over a geometric ladder of multipliers.

    Returns RatePoint entries sorted by increasing distortion, spanning the
    zero-rate point (s = 0) to the near-minimal distortion point (s = s_max).
    """
    d = np.asarray(distortion, dtype=float)
    if d.ndim != 2 or d.shape[0] != source.size:
        raise ValueError(
            f"distortion must be 2-D with {source.size} rows, got shape {d.shape}"
        )
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    p = source.probs
    ladder = np.geomspace(1e-2, s_max, n_points - 1)
    points = [_blahut_point(p, d, 0.0, tol, max_iterations)]
    for s in ladder:
        points.append(_blahut_point(p, d, float(s), tol, max_iterations))
    points.sort(key=lambda pt: (pt.distortion, pt.rate))
    # Every point is an achievable (E d, I) pair and the curve is defined with
    # E d <= D, so the running minimum of the rate along increasing distortion
    # is achievable too; it removes dominated near-corner points where the
    # alternating minimization converges slowly.
    best = np.inf
    envelope = []
    for point in points:
        best = min(best, point.rate)
        envelope.append(
            point if point.rate == best else RatePoint(point.distortion, best, point.multiplier)
        )
    return envelope


def rate_at_distortion(
    source: FiniteDistribution,
    distortion: np.ndarray,
    target: float,
    tol: float = 1e-9,
    max_iterations: int = MAX_ITERATIONS,
) -> RatePoint:
    """R(D) at one target distortion via bisection on the multiplier."""
    d = np.asarray(distortion, dtype=float)
    p = source.probs
    zero = _blahut_point(p, d, 0.0, RD_TOL, max_iterations)
    if target >= zero.distortion:
        return RatePoint(float(target), 0.0, 0.0)
    d_min = float(np.sum(p * d.min(axis=1)))
    if target < d_min - tol:
        raise ValueError(
            f"target distortion {target} is below the minimum achievable {d_min}"
        )
    lo, hi = 0.0, 1.0
    while _blahut_point(p, d, hi, RD_TOL, max_iterations).distortion > target and hi < 1e8:
        hi *= 4.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        point = _blahut_point(p, d, mid, RD_TOL, max_iterations)
        if abs(point.distortion - target) <= tol:
            return point
        if point.distortion > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    return _blahut_point(p, d, 0.5 * (lo + hi), RD_TOL, max_iterations)


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the rate feasibility test for one encoder."""

    feasible: bool
    demand: float        # I(W, U; Z | Y)
    capacity: float      # channel capacity C
    budget: float        # rate_ratio * C
    margin: float        # budget - demand
    rate_ratio: float


def _strategic_joint(model: ChainModel, encoder: EncoderStrategy, z_kernel: ConditionalKernel) -> JointTensor:
    return compose(
        [
            (model.source, "W"),
            (model.observation, "W", ("U", "Y"), (model.n_u, model.n_y)),
            (encoder.kernel, "U", "X"),
            (z_kernel, "X", "Z"),
        ]
    )


def information_demand(
    model: ChainModel,
    encoder: EncoderStrategy,
    z_kernel: ConditionalKernel | None = None,
) -> float:
    """I(W, U; Z | Y) where Z is the output of z_kernel applied to X.

    z_kernel defaults to the physical channel, so by default Z = Xh.
    """
    kernel = model.channel if z_kernel is None else z_kernel
    if kernel.n_inputs != model.n_x:
        raise ValueError(
            f"z_kernel has {kernel.n_inputs} rows, channel input alphabet is {model.n_x}"
        )
    joint = _strategic_joint(model, encoder, kernel)
    return conditional_mutual_information(joint, ("W", "U"), ("Z",), ("Y",))


def rate_decomposition(
    model: ChainModel,
    encoder: EncoderStrategy,
    z_kernel: ConditionalKernel | None = None,
) -> dict:
    """Chain-rule breakdown of the information demand I(W, U; Z | Y).

    Returns the joint and side-information terms whose difference is the
    demand, the entropy terms of the equivalent decomposition, and the
    information saved by side information, all in bits.
    """
    kernel = model.channel if z_kernel is None else z_kernel
    if kernel.n_inputs != model.n_x:
        raise ValueError(
            f"z_kernel has {kernel.n_inputs} rows, channel input alphabet is {model.n_x}"
        )
    joint = _strategic_joint(model, encoder, kernel)
    i_wu_zy = mutual_information(joint, ("W", "U"), ("Z", "Y"))
    i_wu_y = mutual_information(joint, ("W", "U"), ("Y",))
    return {
        "demand": conditional_mutual_information(joint, ("W", "U"), ("Z",), ("Y",)),
        "i_wu_zy": i_wu_zy,
        "i_wu_y": i_wu_y,
        "h_u_given_y": conditional_entropy(joint, ("U",), ("Y",)),
        "h_w_given_uy": conditional_entropy(joint, ("W",), ("U", "Y")),
        "h_z_given_y": conditional_entropy(joint, ("Z",), ("Y",)),
        "h_wuz_given_y": conditional_entropy(joint, ("W", "U", "Z"), ("Y",)),
        "side_info_savings": i_wu_y,
    }


def feasibility_test(
    model: ChainModel,
    encoder: EncoderStrategy,
    z_kernel: ConditionalKernel | None = None,
    slack: float = FEASIBILITY_SLACK,
) -> FeasibilityReport:
    """Check I(W, U; Z | Y) <= rate_ratio * C up to a numerical slack."""
    demand = information_demand(model, encoder, z_kernel)
    capacity = channel_capacity(model.channel).capacity
    budget = model.rate_ratio * capacity
    margin = budget - demand
    return FeasibilityReport(
        feasible=bool(margin >= -slack),
        demand=demand,
        capacity=capacity,
        budget=budget,
        margin=margin,
        rate_ratio=model.rate_ratio,
    )


def achievable_rate(
    model: ChainModel,
    encoder: EncoderStrategy,
    z_kernel: ConditionalKernel | None = None,
) -> float:
    """The rate an encoder needs: I(W, U; Z | Y) in bits. Alias of information_demand."""
    return information_demand(model, encoder, z_kernel)


def feasibility_check(
    model: ChainModel,
    encoder: EncoderStrategy,
    z_kernel: ConditionalKernel | None = None,
    slack: float = FEASIBILITY_SLACK,
) -> FeasibilityReport:
    """Alias of feasibility_test, returning the same FeasibilityReport."""
    return feasibility_test(model, encoder, z_kernel, slack)


def repair_to_feasible(
    model: ChainModel,
    encoder: EncoderStrategy,
    z_kernel: ConditionalKernel | None = None,
    tol: float = 1e-9,
    max_bisections: int = 200,
) -> tuple:
    """Shrink an infeasible encoder toward a constant one until it fits the budget.

    The path g_t = (1 - t) g + t g_const is a line inside the convex strategy
    set, and the information demand is convex along it, so bisection on t
    finds the smallest feasible mixing weight. Returns (encoder, report, t).
    """
    report = feasibility_test(model, encoder, z_kernel)
    if report.feasible:
        return encoder, report, 0.0
    g = encoder.kernel.matrix
    g_const = np.zeros_like(g)
    g_const[:, 0] = 1.0
    lo, hi = 0.0, 1.0
    for _ in range(max_bisections):
        mid = 0.5 * (lo + hi)
        cand = EncoderStrategy(ConditionalKernel((1.0 - mid) * g + mid * g_const))
        rep = feasibility_test(model, cand, z_kernel)
        if rep.feasible:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol:
            break
    final = EncoderStrategy(ConditionalKernel((1.0 - hi) * g + hi * g_const))
    return final, feasibility_test(model, final, z_kernel), hi


@dataclass(frozen=True)
class IdentityAudit:
    """Numerical audit of one information identity on a concrete joint."""

    name: str
    lhs: float
    rhs: float
    gap: float
    holds: bool
    detail: dict = field(default_factory=dict)


def audit_conditional_identity(joint: JointTensor, tol: float = 1e-10) -> IdentityAudit:
    """Audit I(W, U; Z | Y) = H(W, U | Y) + H(Z | Y) - H(W, U, Z | Y).

    The right side is the entropy decomposition written with the middle term
    split as H(U | Y) + H(W | U, Y); the chain rule collapses that split back
    to H(W, U | Y), so the identity holds exactly as stated.
    """
    lhs = conditional_mutual_information(joint, ("W", "U"), ("Z",), ("Y",))
    split = conditional_entropy(joint, ("U",), ("Y",)) + conditional_entropy(
        joint, ("W",), ("U", "Y")
    )
    rhs = split + conditional_entropy(joint, ("Z",), ("Y",)) - conditional_entropy(
        joint, ("W", "U", "Z"), ("Y",)
    )
    gap = abs(lhs - rhs)
    return IdentityAudit(
        name="conditional_information_decomposition",
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        holds=bool(gap <= tol),
        detail={"split_middle_term": split},
    )


def audit_semantic_identity(joint: JointTensor, tol: float = 1e-10) -> IdentityAudit:
    """Audit H(U) = H(W) + H(U | W) - H(W | U) on a joint carrying W and U."""
    lhs = entropy(marginalize(joint, ("U",)))
    rhs = (
        entropy(marginalize(joint, ("W",)))
        + conditional_entropy(joint, ("U",), ("W",))
        - conditional_entropy(joint, ("W",), ("U",))
    )
    gap = abs(lhs - rhs)
    return IdentityAudit(
        name="observation_entropy_balance",
        lhs=lhs,
        rhs=rhs,
        gap=gap,
        holds=bool(gap <= tol),
    )


def observation_information(model: ChainModel) -> dict:
    """Summary information measures of the strategy-independent joint (W, U, Y)."""
    joint = observation_joint(model)
    return {
        "H_W": entropy(marginalize(joint, ("W",))),
        "H_U": entropy(marginalize(joint, ("U",))),
        "H_Y": entropy(marginalize(joint, ("Y",))),
        "I_W_U": mutual_information(joint, ("W",), ("U",)),
        "I_W_Y": mutual_information(joint, ("W",), ("Y",)),
        "I_WU_Y": mutual_information(joint, ("W", "U"), ("Y",)),
    }
