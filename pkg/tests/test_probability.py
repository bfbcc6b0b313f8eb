"""Unit tests for distributions, kernels, composition, and information measures.

Every numeric check is against an independent oracle: hand-computed values,
closed forms, or a direct loop over joint cells that never calls the library
functions under test.
"""

import itertools
import math

import numpy as np
import pytest

from stratcomm.probability import (
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


def oracle_entropy(values):
    """Direct -sum p log2 p over positive cells, independent of the library."""
    return -sum(p * math.log2(p) for p in np.asarray(values).ravel() if p > 0.0)


def random_joint(rng, shape, axes):
    vals = rng.random(shape) + 1e-3
    return JointTensor(axes, vals / vals.sum())


class TestFiniteDistribution:
    def test_uniform_and_point_mass(self):
        u = FiniteDistribution.uniform(4)
        assert np.allclose(u.probs, 0.25)
        p = FiniteDistribution.point_mass(2, 5)
        assert p.probs[2] == 1.0 and p.probs.sum() == 1.0

    def test_rejects_bad_mass_and_negatives(self):
        with pytest.raises(ValueError):
            FiniteDistribution(np.array([0.5, 0.6]))
        with pytest.raises(ValueError):
            FiniteDistribution(np.array([1.1, -0.1]))

    def test_tiny_negative_is_clamped(self):
        d = FiniteDistribution(np.array([1.0 + 1e-13, -1e-13]))
        assert d.probs[1] == 0.0


class TestConditionalKernel:
    def test_row_stochastic_enforced(self):
        with pytest.raises(ValueError):
            ConditionalKernel(np.array([[0.5, 0.4], [0.5, 0.5]]))

    def test_deterministic_and_constant(self):
        k = ConditionalKernel.deterministic([1, 0], 2)
        assert k.matrix[0, 1] == 1.0 and k.matrix[1, 0] == 1.0
        c = ConditionalKernel.constant(3, 1, 2)
        assert np.array_equal(c.matrix, np.array([[0.0, 1.0]] * 3))

    def test_identity(self):
        assert np.array_equal(ConditionalKernel.identity(3).matrix, np.eye(3))


class TestCompose:
    def test_two_factor_product_matches_loop(self):
        rng = np.random.default_rng(11)
        p = FiniteDistribution(rng.dirichlet(np.ones(3)))
        k = ConditionalKernel(rng.dirichlet(np.ones(4), size=3))
        joint = compose([(p, "A"), (k, "A", "B")])
        assert joint.axes == ("A", "B")
        expected = np.array([[p.probs[a] * k.matrix[a, b] for b in range(4)] for a in range(3)])
        assert np.allclose(joint.values, expected, atol=1e-15)

    def test_split_output_axes_are_row_major(self):
        rng = np.random.default_rng(12)
        p = FiniteDistribution(rng.dirichlet(np.ones(2)))
        k = ConditionalKernel(rng.dirichlet(np.ones(6), size=2))
        joint = compose([(p, "W"), (k, "W", ("U", "Y"), (2, 3))])
        for w, u, y in itertools.product(range(2), range(2), range(3)):
            assert joint.values[w, u, y] == pytest.approx(
                p.probs[w] * k.matrix[w, u * 3 + y], abs=1e-15
            )

    def test_multi_conditioning_axes(self):
        rng = np.random.default_rng(13)
        p = FiniteDistribution(rng.dirichlet(np.ones(2)))
        k1 = ConditionalKernel(rng.dirichlet(np.ones(3), size=2))
        k2 = ConditionalKernel(rng.dirichlet(np.ones(2), size=6))
        joint = compose([(p, "A"), (k1, "A", "B"), (k2, ("A", "B"), "C")])
        for a, b, c in itertools.product(range(2), range(3), range(2)):
            expected = p.probs[a] * k1.matrix[a, b] * k2.matrix[a * 3 + b, c]
            assert joint.values[a, b, c] == pytest.approx(expected, abs=1e-15)

    def test_unproduced_conditioning_axis_rejected(self):
        p = FiniteDistribution.uniform(2)
        k = ConditionalKernel.identity(2)
        with pytest.raises(ValueError, match="not produced yet"):
            compose([(p, "A"), (k, "B", "C")])


class TestMarginalize:
    def test_matches_manual_sum(self):
        rng = np.random.default_rng(21)
        joint = random_joint(rng, (2, 3, 4), ("A", "B", "C"))
        marg = marginalize(joint, ("C", "A"))
        manual = joint.values.sum(axis=1).T  # (C, A)
        assert marg.axes == ("C", "A")
        assert np.allclose(marg.values, manual, atol=1e-15)

    def test_unknown_axis_rejected(self):
        joint = random_joint(np.random.default_rng(0), (2, 2), ("A", "B"))
        with pytest.raises(ValueError):
            marginalize(joint, ("Z",))


class TestEntropy:
    def test_uniform_is_log2_n(self):
        for n in (2, 3, 4, 8):
            assert entropy(FiniteDistribution.uniform(n)) == pytest.approx(
                math.log2(n), abs=1e-14
            )

    def test_point_mass_is_zero(self):
        assert entropy(FiniteDistribution.point_mass(0, 4)) == 0.0

    def test_matches_oracle_on_random_joints(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            joint = random_joint(rng, (3, 2, 2), ("A", "B", "C"))
            assert entropy(joint) == pytest.approx(oracle_entropy(joint.values), abs=1e-12)

    def test_permutation_invariance_is_exact(self):
        rng = np.random.default_rng(32)
        for _ in range(10):
            joint = random_joint(rng, (2, 3, 4), ("A", "B", "C"))
            for order in itertools.permutations(("A", "B", "C")):
                other = joint.permuted(order)
                assert entropy(other) == entropy(joint)
                assert conditional_entropy(other, "A", ("B", "C")) == conditional_entropy(
                    joint, "A", ("B", "C")
                )
                assert mutual_information(other, "A", ("B", "C")) == mutual_information(
                    joint, "A", ("B", "C")
                )


class TestConditionalEntropy:
    def test_matches_per_slice_oracle(self):
        rng = np.random.default_rng(41)
        for _ in range(10):
            joint = random_joint(rng, (3, 4), ("A", "B"))
            p_b = joint.values.sum(axis=0)
            expected = 0.0
            for b in range(4):
                cond = joint.values[:, b] / p_b[b]
                expected += p_b[b] * oracle_entropy(cond)
            assert conditional_entropy(joint, "A", "B") == pytest.approx(expected, abs=1e-12)

    def test_conditioning_reduces_entropy(self):
        rng = np.random.default_rng(42)
        for _ in range(10):
            joint = random_joint(rng, (3, 3, 3), ("A", "B", "C"))
            assert conditional_entropy(joint, "A", ("B",)) <= entropy(
                marginalize(joint, ("A",))
            ) + 1e-12

    def test_overlapping_axes_rejected(self):
        joint = random_joint(np.random.default_rng(0), (2, 2), ("A", "B"))
        with pytest.raises(ValueError):
            conditional_entropy(joint, "A", "A")


class TestMutualInformation:
    def test_independent_joint_gives_zero(self):
        rng = np.random.default_rng(51)
        p = rng.dirichlet(np.ones(3))
        q = rng.dirichlet(np.ones(4))
        joint = JointTensor(("A", "B"), np.outer(p, q))
        assert abs(mutual_information(joint, "A", "B")) < 1e-12

    def test_identity_coupling_gives_entropy(self):
        p = np.array([0.2, 0.3, 0.5])
        joint = JointTensor(("A", "B"), np.diag(p))
        assert mutual_information(joint, "A", "B") == pytest.approx(
            oracle_entropy(p), abs=1e-12
        )

    def test_kl_oracle_on_random_joints(self):
        rng = np.random.default_rng(52)
        for _ in range(10):
            joint = random_joint(rng, (3, 4), ("A", "B"))
            p_a = joint.values.sum(axis=1)
            p_b = joint.values.sum(axis=0)
            expected = sum(
                joint.values[a, b] * math.log2(joint.values[a, b] / (p_a[a] * p_b[b]))
                for a in range(3)
                for b in range(4)
            )
            assert mutual_information(joint, "A", "B") == pytest.approx(expected, abs=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(53)
        for _ in range(25):
            joint = random_joint(rng, (2, 3), ("A", "B"))
            assert mutual_information(joint, "A", "B") >= -1e-13


class TestConditionalMutualInformation:
    def test_per_slice_kl_oracle(self):
        rng = np.random.default_rng(61)
        for _ in range(10):
            joint = random_joint(rng, (2, 3, 2), ("A", "B", "C"))
            vals = joint.values
            p_c = vals.sum(axis=(0, 1))
            expected = 0.0
            for c in range(2):
                slab = vals[:, :, c] / p_c[c]
                p_a = slab.sum(axis=1)
                p_b = slab.sum(axis=0)
                expected += p_c[c] * sum(
                    slab[a, b] * math.log2(slab[a, b] / (p_a[a] * p_b[b]))
                    for a in range(2)
                    for b in range(3)
                    if slab[a, b] > 0
                )
            assert conditional_mutual_information(joint, "A", "B", "C") == pytest.approx(
                expected, abs=1e-12
            )

    def test_markov_chain_gives_zero(self):
        rng = np.random.default_rng(62)
        p = FiniteDistribution(rng.dirichlet(np.ones(3)))
        k1 = ConditionalKernel(rng.dirichlet(np.ones(3), size=3))
        k2 = ConditionalKernel(rng.dirichlet(np.ones(3), size=3))
        joint = compose([(p, "A"), (k1, "A", "B"), (k2, "B", "C")])
        assert abs(conditional_mutual_information(joint, "A", "C", "B")) < 1e-12

    def test_group_arguments(self):
        rng = np.random.default_rng(63)
        joint = random_joint(rng, (2, 2, 2, 2), ("W", "U", "Z", "Y"))
        value = conditional_mutual_information(joint, ("W", "U"), ("Z",), ("Y",))
        split = mutual_information(joint, ("W", "U"), ("Z", "Y")) - mutual_information(
            joint, ("W", "U"), ("Y",)
        )
        assert value == pytest.approx(split, abs=1e-13)
