"""Finite-alphabet distributions, kernels, joint tensors, and information measures.

Conventions: probabilities are dense float64 numpy arrays, information is
measured in bits (log base 2), and 0 * log(0) = 0. Axis names travel with
joint tensors, and every reduction canonicalizes axis order by name before
summing, so entropies and mutual informations are bit-for-bit invariant under
axis permutation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

# Centralized numeric policy for probability objects.
MASS_TOL = 1e-12          # total mass must match 1.0 this closely
NONNEG_TOL = 1e-12        # entries below -NONNEG_TOL are errors, above are clamped to 0
MAX_JOINT_CELLS = 10_000_000  # refuse dense joints beyond this many cells

AxisSpec = Union[str, Sequence[str]]


def _clean_probabilities(values, what: str) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError(f"{what} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite entries")
    lo = float(arr.min())
    if lo < -NONNEG_TOL:
        raise ValueError(f"{what} has negative entry {lo:.6e}")
    if lo < 0.0:
        arr = np.where(arr < 0.0, 0.0, arr)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability mass function over the alphabet {0, ..., n-1}."""

    probs: np.ndarray

    def __post_init__(self):
        arr = _clean_probabilities(self.probs, "distribution")
        if arr.ndim != 1:
            raise ValueError("distribution must be 1-D")
        mass = float(arr.sum())
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"distribution mass {mass!r} is not 1 within {MASS_TOL}")
        object.__setattr__(self, "probs", arr)

    @property
    def size(self) -> int:
        return self.probs.shape[0]

    @classmethod
    def uniform(cls, n: int) -> "FiniteDistribution":
        if n < 1:
            raise ValueError("alphabet size must be positive")
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, symbol: int, n: int) -> "FiniteDistribution":
        p = np.zeros(n)
        p[symbol] = 1.0
        return cls(p)


@dataclass(frozen=True, eq=False)
class ConditionalKernel:
    """Row-stochastic matrix; row i is the output law given input symbol i."""

    matrix: np.ndarray

    def __post_init__(self):
        arr = _clean_probabilities(self.matrix, "kernel")
        if arr.ndim != 2:
            raise ValueError("kernel must be 2-D (inputs x outputs)")
        rows = arr.sum(axis=1)
        off = np.abs(rows - 1.0)
        if float(off.max()) > MASS_TOL:
            i = int(np.argmax(off))
            raise ValueError(
                f"kernel row {i} has mass {float(rows[i])!r}, expected 1 within {MASS_TOL}"
            )
        object.__setattr__(self, "matrix", arr)

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[1]

    @classmethod
    def deterministic(cls, assignment: Sequence[int], n_outputs: int) -> "ConditionalKernel":
        """Kernel sending input i to output assignment[i] with probability 1."""
        m = np.zeros((len(assignment), n_outputs))
        for i, j in enumerate(assignment):
            j = int(j)
            if not 0 <= j < n_outputs:
                raise ValueError(f"assignment[{i}]={j} outside output alphabet of size {n_outputs}")
            m[i, j] = 1.0
        return cls(m)

    @classmethod
    def identity(cls, n: int) -> "ConditionalKernel":
        return cls(np.eye(n))

    @classmethod
    def constant(cls, n_inputs: int, output: int, n_outputs: int) -> "ConditionalKernel":
        """Kernel ignoring its input: every row is a point mass at `output`."""
        return cls.deterministic([output] * n_inputs, n_outputs)


@dataclass(frozen=True, eq=False)
class JointTensor:
    """Dense joint distribution over named axes."""

    axes: tuple
    values: np.ndarray

    def __post_init__(self):
        axes = tuple(self.axes)
        if not axes or any(not isinstance(a, str) or not a for a in axes):
            raise ValueError("axes must be non-empty strings")
        if len(set(axes)) != len(axes):
            raise ValueError(f"duplicate axis names in {axes}")
        arr = _clean_probabilities(self.values, "joint tensor")
        if arr.ndim != len(axes):
            raise ValueError(f"{len(axes)} axes declared but tensor has {arr.ndim} dimensions")
        if arr.size > MAX_JOINT_CELLS:
            raise ValueError(f"joint tensor has {arr.size} cells, cap is {MAX_JOINT_CELLS}")
        mass = float(arr.sum())
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"joint mass {mass!r} is not 1 within {MASS_TOL}")
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "values", arr)

    def axis_index(self, name: str) -> int:
        try:
            return self.axes.index(name)
        except ValueError:
            raise ValueError(f"axis {name!r} not in {self.axes}") from None

    def size(self, name: str) -> int:
        return self.values.shape[self.axis_index(name)]

    def permuted(self, order: Sequence[str]) -> "JointTensor":
        """Same joint with axes stored in the given order."""
        order = tuple(order)
        if sorted(order) != sorted(self.axes):
            raise ValueError(f"{order} is not a permutation of {self.axes}")
        perm = [self.axis_index(a) for a in order]
        return JointTensor(order, np.transpose(self.values, perm))


def _as_axes(spec: AxisSpec) -> tuple:
    if isinstance(spec, str):
        return (spec,)
    out = tuple(spec)
    if any(not isinstance(a, str) for a in out):
        raise ValueError(f"axis names must be strings, got {out!r}")
    return out


def compose(factors: Sequence[tuple], max_cells: int = MAX_JOINT_CELLS) -> JointTensor:
    """Multiply a sampling-ordered factorization into one joint tensor.

    Each factor is one of
        (FiniteDistribution, output_axes)
        (ConditionalKernel, given_axes, output_axes)
        (ConditionalKernel, given_axes, output_axes, output_shape)
    where an axes entry is a name or tuple of names. Conditioning axes must
    already be produced by an earlier factor (sampling order); a kernel whose
    flat output column splits across several axes needs output_shape, with the
    flat index running row-major over output_axes. The final mass is
    renormalized to exactly 1 so later validation never trips on accumulated
    rounding.
    """
    if not factors:
        raise ValueError("compose needs at least one factor")

    produced: list = []       # axis names in production order
    sizes: dict = {}
    plan = []                 # (array2d, given, output, out_shape)

    for pos, factor in enumerate(factors):
        if not isinstance(factor, tuple) or not factor:
            raise ValueError(f"factor {pos} must be a tuple, got {factor!r}")
        obj = factor[0]
        if isinstance(obj, FiniteDistribution):
            if len(factor) not in (2, 3):
                raise ValueError(f"factor {pos}: expected (distribution, axes[, shape])")
            given = ()
            output = _as_axes(factor[1])
            out_shape = tuple(factor[2]) if len(factor) == 3 else None
            table = obj.probs[None, :]
        elif isinstance(obj, ConditionalKernel):
            if len(factor) not in (3, 4):
                raise ValueError(f"factor {pos}: expected (kernel, given, output[, shape])")
            given = _as_axes(factor[1])
            output = _as_axes(factor[2])
            out_shape = tuple(factor[3]) if len(factor) == 4 else None
            table = obj.matrix
        else:
            raise ValueError(f"factor {pos}: unsupported object {type(obj).__name__}")

        for a in given:
            if a not in sizes:
                raise ValueError(
                    f"factor {pos}: conditioning axis {a!r} not produced yet; "
                    "factors must be listed in sampling order"
                )
        n_in = int(np.prod([sizes[a] for a in given], dtype=np.int64)) if given else 1
        if table.shape[0] != n_in:
            raise ValueError(
                f"factor {pos}: kernel has {table.shape[0]} rows but conditioning axes "
                f"{given} have {n_in} joint states"
            )
        if out_shape is None:
            if len(output) != 1:
                raise ValueError(
                    f"factor {pos}: output covers {len(output)} axes, output_shape is required"
                )
            out_shape = (table.shape[1],)
        if len(out_shape) != len(output):
            raise ValueError(f"factor {pos}: output_shape {out_shape} does not match {output}")
        if int(np.prod(out_shape, dtype=np.int64)) != table.shape[1]:
            raise ValueError(
                f"factor {pos}: output_shape {out_shape} does not factor the "
                f"{table.shape[1]} kernel columns"
            )
        for a, s in zip(output, out_shape):
            if a in sizes:
                raise ValueError(f"factor {pos}: axis {a!r} produced twice")
            sizes[a] = int(s)
            produced.append(a)
        plan.append((table, given, output, out_shape))

    full_axes = tuple(produced)
    total_cells = int(np.prod([sizes[a] for a in full_axes], dtype=np.int64))
    if total_cells > max_cells:
        raise ValueError(f"composed joint would have {total_cells} cells, cap is {max_cells}")

    joint = np.ones(tuple(sizes[a] for a in full_axes))
    for table, given, output, out_shape in plan:
        involved = tuple(given) + tuple(output)
        arr = table.reshape(tuple(sizes[a] for a in given) + tuple(out_shape))
        order = sorted(range(len(involved)), key=lambda i: full_axes.index(involved[i]))
        arr = np.transpose(arr, order)
        shape = [1] * len(full_axes)
        for a in involved:
            shape[full_axes.index(a)] = sizes[a]
        joint = joint * arr.reshape(shape)

    mass = float(joint.sum())
    if mass <= 0.0:
        raise ValueError("composed joint has zero total mass")
    return JointTensor(full_axes, joint / mass)


def marginalize(joint: JointTensor, axes: AxisSpec) -> JointTensor:
    """Sum out every axis not listed, keeping `axes` in the order given."""
    keep = _as_axes(axes)
    if len(set(keep)) != len(keep):
        raise ValueError(f"duplicate axes in {keep}")
    for a in keep:
        joint.axis_index(a)
    drop = sorted(set(joint.axes) - set(keep))
    perm = [joint.axis_index(a) for a in keep] + [joint.axis_index(a) for a in drop]
    keep_shape = tuple(joint.size(a) for a in keep)
    vals = np.transpose(joint.values, perm).reshape(keep_shape + (-1,)).sum(axis=-1)
    return JointTensor(keep, vals)


def _entropy_from_values(flat: np.ndarray) -> float:
    p = flat[flat > 0.0]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log2(p)).sum())


def _subset_values(joint: JointTensor, names: tuple) -> np.ndarray:
    """Marginal cell values for `names`, flattened in name-sorted canonical order.

    Both the kept layout and the summed-out layout are canonicalized by axis
    name, which is what makes downstream entropies exactly permutation
    invariant.
    """
    keep = tuple(sorted(names))
    drop = sorted(set(joint.axes) - set(keep))
    perm = [joint.axis_index(a) for a in keep] + [joint.axis_index(a) for a in drop]
    n_keep = int(np.prod([joint.size(a) for a in keep], dtype=np.int64))
    return np.transpose(joint.values, perm).reshape(n_keep, -1).sum(axis=1)


def _checked_names(joint: JointTensor, spec: AxisSpec, what: str) -> tuple:
    names = _as_axes(spec)
    if not names:
        raise ValueError(f"{what} axis set must be non-empty")
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate axes in {what}: {names}")
    for a in names:
        joint.axis_index(a)
    return names


def entropy(dist) -> float:
    """Shannon entropy in bits of a distribution, joint tensor, or raw array."""
    if isinstance(dist, FiniteDistribution):
        return _entropy_from_values(dist.probs)
    if isinstance(dist, JointTensor):
        return _entropy_from_values(_subset_values(dist, dist.axes))
    arr = _clean_probabilities(dist, "distribution")
    mass = float(arr.sum())
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"distribution mass {mass!r} is not 1 within {MASS_TOL}")
    return _entropy_from_values(arr.ravel())


def conditional_entropy(joint: JointTensor, target: AxisSpec, given: AxisSpec = ()) -> float:
    """H(target | given) in bits, via H(target, given) - H(given)."""
    t = _checked_names(joint, target, "target")
    g = _as_axes(given) if given else ()
    if g:
        g = _checked_names(joint, g, "given")
    if set(t) & set(g):
        raise ValueError(f"target {t} and conditioning {g} axes overlap")
    h_joint = _entropy_from_values(_subset_values(joint, t + g))
    if not g:
        return h_joint
    return h_joint - _entropy_from_values(_subset_values(joint, g))


def mutual_information(joint: JointTensor, a: AxisSpec, b: AxisSpec) -> float:
    """I(a ; b) in bits, via H(a) + H(b) - H(a, b)."""
    aa = _checked_names(joint, a, "first argument")
    bb = _checked_names(joint, b, "second argument")
    if set(aa) & set(bb):
        raise ValueError(f"axis sets {aa} and {bb} overlap")
    return (
        _entropy_from_values(_subset_values(joint, aa))
        + _entropy_from_values(_subset_values(joint, bb))
        - _entropy_from_values(_subset_values(joint, aa + bb))
    )


def conditional_mutual_information(
    joint: JointTensor, a: AxisSpec, b: AxisSpec, given: AxisSpec
) -> float:
    """I(a ; b | given) in bits, via the chain rule I(a; b, given) - I(a; given)."""
    aa = _checked_names(joint, a, "first argument")
    bb = _checked_names(joint, b, "second argument")
    cc = _checked_names(joint, given, "conditioning")
    for left, right in itertools.combinations((set(aa), set(bb), set(cc)), 2):
        if left & right:
            raise ValueError(f"axis sets {aa}, {bb}, {cc} must be pairwise disjoint")
    return mutual_information(joint, aa, bb + cc) - mutual_information(joint, aa, cc)
