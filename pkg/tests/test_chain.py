"""Unit tests for the communication chain model and expected distortions.

The expected-distortion oracle loops over all chain variables with explicit
probability products, independent of the tensor composition used by the
library.
"""

import itertools

import numpy as np
import pytest

from stratcomm.chain import (
    CHAIN_AXES,
    ChainModel,
    DecoderStrategy,
    DistortionSpec,
    EncoderStrategy,
    chain_joint,
    expected_distortion,
    observation_joint,
    validate_model,
)
from stratcomm.probability import ConditionalKernel, FiniteDistribution, marginalize


def random_model(rng, n_w=2, n_u=2, n_y=2, n_x=2, n_xhat=2, n_what=2):
    source = FiniteDistribution(rng.dirichlet(np.ones(n_w)))
    observation = ConditionalKernel(rng.dirichlet(np.ones(n_u * n_y), size=n_w))
    channel = ConditionalKernel(rng.dirichlet(np.ones(n_xhat), size=n_x))
    shape = (n_w, n_u, n_y, n_what)
    distortion = DistortionSpec(rng.random(shape), rng.random(shape))
    return ChainModel(source, observation, n_u, n_y, channel, distortion)


def random_strategies(rng, model):
    encoder = EncoderStrategy(
        ConditionalKernel(rng.dirichlet(np.ones(model.n_x), size=model.n_u))
    )
    decoder = DecoderStrategy(
        ConditionalKernel(
            rng.dirichlet(np.ones(model.n_what), size=model.n_y * model.n_xhat)
        ),
        model.n_y,
        model.n_xhat,
    )
    return encoder, decoder


def oracle_distortion(model, encoder, decoder, table):
    """Explicit sum over all chain variables, no tensor machinery."""
    total = 0.0
    n = model.sizes()
    for w, u, y, x, xh, wh in itertools.product(
        range(n["w"]), range(n["u"]), range(n["y"]),
        range(n["x"]), range(n["xhat"]), range(n["what"]),
    ):
        prob = (
            model.source.probs[w]
            * model.observation.matrix[w, u * n["y"] + y]
            * encoder.kernel.matrix[u, x]
            * model.channel.matrix[x, xh]
            * decoder.kernel.matrix[y * n["xhat"] + xh, wh]
        )
        total += prob * table[w, u, y, wh]
    return total


class TestDistortionSpec:
    def test_symbol_tables_broadcast(self):
        enc = np.array([[0.0, 2.0], [3.0, 0.0]])
        dec = np.array([[0.0, 1.0], [1.0, 0.0]])
        spec = DistortionSpec.from_symbol_tables(enc, dec, n_u=3, n_y=2)
        assert spec.d_enc.shape == (2, 3, 2, 2)
        assert spec.reduced
        assert np.all(spec.d_enc[:, 1, 0, :] == enc)
        assert np.all(spec.d_dec[:, 2, 1, :] == dec)

    def test_hamming_and_aligned(self):
        spec = DistortionSpec.hamming(3, 2, 2)
        assert spec.aligned()
        assert spec.d_enc[0, 0, 0, 0] == 0.0 and spec.d_enc[0, 0, 0, 1] == 1.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            DistortionSpec(np.zeros((2, 2, 2, 2)), np.zeros((2, 2, 2, 3)))
        with pytest.raises(ValueError):
            DistortionSpec(np.zeros((2, 2, 2)), np.zeros((2, 2, 2)))


class TestStrategies:
    def test_deterministic_encoder(self):
        enc = EncoderStrategy.deterministic([1, 0, 1], 2)
        assert enc.n_u == 3 and enc.n_x == 2
        assert enc.kernel.matrix[0, 1] == 1.0

    def test_decoder_context_row(self):
        table = np.array([[0, 1], [1, 0]])
        dec = DecoderStrategy.deterministic(table, 2)
        assert dec.n_what == 2
        assert dec.context_row(0, 1)[1] == 1.0
        assert dec.context_row(1, 0)[1] == 1.0

    def test_decoder_row_count_checked(self):
        with pytest.raises(ValueError):
            DecoderStrategy(ConditionalKernel(np.eye(3)), n_y=2, n_xhat=2)


class TestValidateModel:
    def test_clean_model_has_no_violations(self):
        model = random_model(np.random.default_rng(5))
        assert validate_model(model) == []

    def test_each_violation_is_reported(self):
        rng = np.random.default_rng(6)
        good = random_model(rng)
        bad_obs = ChainModel(
            good.source,
            ConditionalKernel(rng.dirichlet(np.ones(3), size=2)),
            good.n_u,
            good.n_y,
            good.channel,
            good.distortion,
        )
        assert any("columns" in p for p in validate_model(bad_obs))
        bad_ratio = ChainModel(
            good.source, good.observation, good.n_u, good.n_y,
            good.channel, good.distortion, rate_ratio=-1.0,
        )
        assert any("rate_ratio" in p for p in validate_model(bad_ratio))


class TestJoints:
    def test_observation_joint_marginals(self):
        rng = np.random.default_rng(7)
        model = random_model(rng, n_w=3, n_u=2, n_y=2)
        joint = observation_joint(model)
        assert joint.axes == ("W", "U", "Y")
        w_marg = marginalize(joint, ("W",)).values
        assert np.allclose(w_marg, model.source.probs, atol=1e-14)

    def test_chain_joint_axes_and_cells(self):
        rng = np.random.default_rng(8)
        model = random_model(rng)
        encoder, decoder = random_strategies(rng, model)
        joint = chain_joint(model, encoder, decoder)
        assert joint.axes == CHAIN_AXES
        n = model.sizes()
        w, u, y, x, xh, wh = 1, 0, 1, 0, 1, 0
        expected = (
            model.source.probs[w]
            * model.observation.matrix[w, u * n["y"] + y]
            * encoder.kernel.matrix[u, x]
            * model.channel.matrix[x, xh]
            * decoder.kernel.matrix[y * n["xhat"] + xh, wh]
        )
        assert joint.values[w, u, y, x, xh, wh] == pytest.approx(expected, abs=1e-14)

    def test_mismatched_strategy_rejected(self):
        rng = np.random.default_rng(9)
        model = random_model(rng)
        bad_encoder = EncoderStrategy.deterministic([0, 1, 0], model.n_x)
        _, decoder = random_strategies(rng, model)
        with pytest.raises(ValueError, match="encoder"):
            chain_joint(model, bad_encoder, decoder)


class TestExpectedDistortion:
    def test_matches_loop_oracle_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(15):
            sizes = dict(
                n_w=int(rng.integers(2, 4)),
                n_u=int(rng.integers(2, 4)),
                n_y=int(rng.integers(2, 3)),
                n_x=int(rng.integers(2, 4)),
                n_xhat=int(rng.integers(2, 3)),
                n_what=int(rng.integers(2, 4)),
            )
            model = random_model(rng, **sizes)
            encoder, decoder = random_strategies(rng, model)
            for which, table in (("enc", model.distortion.d_enc), ("dec", model.distortion.d_dec)):
                value = expected_distortion(model, encoder, decoder, which)
                assert value == pytest.approx(
                    oracle_distortion(model, encoder, decoder, table), abs=1e-12
                )

    def test_zero_distortion_on_perfect_chain(self):
        # Noiseless everything and matched alphabets: decoding the channel
        # output directly achieves zero Hamming distortion.
        model = ChainModel(
            source=FiniteDistribution.uniform(2),
            observation=ConditionalKernel(np.array([[0.5, 0.5, 0.0, 0.0],
                                                    [0.0, 0.0, 0.5, 0.5]])),
            n_u=2,
            n_y=2,
            channel=ConditionalKernel.identity(2),
            distortion=DistortionSpec.hamming(2, 2, 2),
        )
        encoder = EncoderStrategy.deterministic([0, 1], 2)
        decoder = DecoderStrategy.deterministic([[0, 1], [0, 1]], 2)
        assert expected_distortion(model, encoder, decoder, "enc") == pytest.approx(0.0, abs=1e-14)

    def test_which_argument_validated(self):
        rng = np.random.default_rng(18)
        model = random_model(rng)
        encoder, decoder = random_strategies(rng, model)
        with pytest.raises(ValueError):
            expected_distortion(model, encoder, decoder, "both")
