"""Communication chain model: source, indirect observation, encoder, channel, decoder.

The chain is W -> (U, Y) -> X -> Xh -> Wh. Nature draws the source symbol W
jointly with the encoder observation U and the decoder side information Y,
the encoder maps U to a channel input X, the channel corrupts it to Xh, and
the decoder maps the pair (Y, Xh) to a reconstruction Wh. Encoder and decoder
each carry their own per-letter distortion over (w, u, y, wh); distortion
values may be negative, signed losses are allowed on purpose.

Flat index conventions (row-major): the observation kernel's output column is
u * n_y + y, and the decoder's input row is y * n_xhat + xhat.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .probability import (
    ConditionalKernel,
    FiniteDistribution,
    JointTensor,
    compose,
    marginalize,
)

CHAIN_AXES = ("W", "U", "Y", "X", "Xh", "Wh")


@dataclass(frozen=True, eq=False)
class DistortionSpec:
    """Per-letter distortion tensors indexed (w, u, y, wh) for both players."""

    d_enc: np.ndarray
    d_dec: np.ndarray
    reduced: bool = False  # True when built from (w, wh) symbol tables

    def __post_init__(self):
        enc = np.asarray(self.d_enc, dtype=float)
        dec = np.asarray(self.d_dec, dtype=float)
        for name, arr in (("d_enc", enc), ("d_dec", dec)):
            if arr.ndim != 4:
                raise ValueError(f"{name} must be 4-D (w, u, y, wh), got {arr.ndim}-D")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite entries")
        if enc.shape != dec.shape:
            raise ValueError(f"d_enc shape {enc.shape} != d_dec shape {dec.shape}")
        object.__setattr__(self, "d_enc", enc)
        object.__setattr__(self, "d_dec", dec)

    @classmethod
    def from_symbol_tables(cls, enc_table, dec_table, n_u: int, n_y: int) -> "DistortionSpec":
        """Broadcast (w, wh) distortion tables to the full (w, u, y, wh) signature."""
        enc = np.asarray(enc_table, dtype=float)
        dec = np.asarray(dec_table, dtype=float)
        if enc.ndim != 2 or dec.ndim != 2 or enc.shape != dec.shape:
            raise ValueError("symbol tables must be two 2-D arrays of identical shape")
        shape = (enc.shape[0], n_u, n_y, enc.shape[1])
        full_enc = np.broadcast_to(enc[:, None, None, :], shape).copy()
        full_dec = np.broadcast_to(dec[:, None, None, :], shape).copy()
        return cls(full_enc, full_dec, reduced=True)

    @classmethod
    def hamming(cls, n_w: int, n_u: int, n_y: int) -> "DistortionSpec":
        table = 1.0 - np.eye(n_w)
        return cls.from_symbol_tables(table, table, n_u, n_y)

    def aligned(self) -> bool:
        return bool(np.array_equal(self.d_enc, self.d_dec))


@dataclass(frozen=True, eq=False)
class EncoderStrategy:
    """Encoder kernel g: rows index U, columns index X."""

    kernel: ConditionalKernel

    @classmethod
    def deterministic(cls, assignment: Sequence[int], n_x: int) -> "EncoderStrategy":
        return cls(ConditionalKernel.deterministic(assignment, n_x))

    @classmethod
    def constant(cls, n_u: int, x: int, n_x: int) -> "EncoderStrategy":
        return cls(ConditionalKernel.constant(n_u, x, n_x))

    @property
    def n_u(self) -> int:
        return self.kernel.n_inputs

    @property
    def n_x(self) -> int:
        return self.kernel.n_outputs


@dataclass(frozen=True, eq=False)
class DecoderStrategy:
    """Decoder kernel h: rows index the flat context y * n_xhat + xhat, columns Wh."""

    kernel: ConditionalKernel
    n_y: int
    n_xhat: int

    def __post_init__(self):
        if self.kernel.n_inputs != self.n_y * self.n_xhat:
            raise ValueError(
                f"decoder kernel has {self.kernel.n_inputs} rows, expected "
                f"n_y * n_xhat = {self.n_y * self.n_xhat}"
            )

    @classmethod
    def deterministic(cls, table, n_what: int) -> "DecoderStrategy":
        """Build from a (n_y, n_xhat) table of reconstruction symbols."""
        arr = np.asarray(table, dtype=int)
        if arr.ndim != 2:
            raise ValueError("decoder table must be 2-D (y, xhat)")
        kernel = ConditionalKernel.deterministic(arr.ravel().tolist(), n_what)
        return cls(kernel, arr.shape[0], arr.shape[1])

    def context_row(self, y: int, xhat: int) -> np.ndarray:
        return self.kernel.matrix[y * self.n_xhat + xhat]

    @property
    def n_what(self) -> int:
        return self.kernel.n_outputs


@dataclass(frozen=True, eq=False)
class ChainModel:
    """Fixed part of the game: source, observation, channel, distortions, rate ratio.

    rate_ratio is the blocklength ratio k/m multiplying channel capacity in
    the rate budget.
    """

    source: FiniteDistribution
    observation: ConditionalKernel  # rows W, columns flat (u, y) = u * n_y + y
    n_u: int
    n_y: int
    channel: ConditionalKernel      # rows X, columns Xh
    distortion: DistortionSpec
    rate_ratio: float = 1.0

    @property
    def n_w(self) -> int:
        return self.source.size

    @property
    def n_x(self) -> int:
        return self.channel.n_inputs

    @property
    def n_xhat(self) -> int:
        return self.channel.n_outputs

    @property
    def n_what(self) -> int:
        return self.distortion.d_enc.shape[3]

    def sizes(self) -> dict:
        return {
            "w": self.n_w,
            "u": self.n_u,
            "y": self.n_y,
            "x": self.n_x,
            "xhat": self.n_xhat,
            "what": self.n_what,
        }


def validate_model(model: ChainModel) -> list:
    """Collect structural violations; an empty list means the model is coherent."""
    problems = []
    if model.n_u < 1 or model.n_y < 1:
        problems.append(f"alphabet sizes n_u={model.n_u}, n_y={model.n_y} must be positive")
    if model.observation.n_inputs != model.n_w:
        problems.append(
            f"observation: {model.observation.n_inputs} rows but source alphabet is {model.n_w}"
        )
    if model.observation.n_outputs != model.n_u * model.n_y:
        problems.append(
            f"observation: {model.observation.n_outputs} columns, expected "
            f"n_u * n_y = {model.n_u * model.n_y}"
        )
    d_shape = model.distortion.d_enc.shape
    expected = (model.n_w, model.n_u, model.n_y)
    if d_shape[:3] != expected:
        problems.append(
            f"distortion: leading shape {d_shape[:3]} does not match (n_w, n_u, n_y) {expected}"
        )
    if d_shape[3] < 1:
        problems.append("distortion: empty reconstruction alphabet")
    ratio = model.rate_ratio
    if not np.isfinite(ratio) or ratio <= 0:
        problems.append(f"rate_ratio {ratio!r} must be a positive finite number")
    return problems


def _check_strategies(model: ChainModel, encoder: EncoderStrategy, decoder: DecoderStrategy):
    problems = validate_model(model)
    if problems:
        raise ValueError("invalid model: " + "; ".join(problems))
    if encoder.n_u != model.n_u:
        raise ValueError(f"encoder has {encoder.n_u} input rows, model n_u is {model.n_u}")
    if encoder.n_x != model.n_x:
        raise ValueError(f"encoder emits {encoder.n_x} symbols, channel expects {model.n_x}")
    if decoder.n_y != model.n_y or decoder.n_xhat != model.n_xhat:
        raise ValueError(
            f"decoder contexts ({decoder.n_y}, {decoder.n_xhat}) do not match model "
            f"({model.n_y}, {model.n_xhat})"
        )
    if decoder.n_what != model.n_what:
        raise ValueError(
            f"decoder emits {decoder.n_what} symbols, distortion expects {model.n_what}"
        )


def observation_joint(model: ChainModel) -> JointTensor:
    """Joint law of (W, U, Y), the strategy-independent part of the chain."""
    return compose(
        [
            (model.source, "W"),
            (model.observation, "W", ("U", "Y"), (model.n_u, model.n_y)),
        ]
    )


def chain_joint(model: ChainModel, encoder: EncoderStrategy, decoder: DecoderStrategy) -> JointTensor:
    """Joint law over (W, U, Y, X, Xh, Wh) induced by a strategy profile."""
    _check_strategies(model, encoder, decoder)
    return compose(
        [
            (model.source, "W"),
            (model.observation, "W", ("U", "Y"), (model.n_u, model.n_y)),
            (encoder.kernel, "U", "X"),
            (model.channel, "X", "Xh"),
            (decoder.kernel, ("Y", "Xh"), "Wh"),
        ]
    )


def expected_distortion(
    model: ChainModel,
    encoder: EncoderStrategy,
    decoder: DecoderStrategy,
    which: str = "enc",
) -> float:
    """Expected per-letter distortion of one player under a strategy profile."""
    if which == "enc":
        table = model.distortion.d_enc
    elif which == "dec":
        table = model.distortion.d_dec
    else:
        raise ValueError(f"which must be 'enc' or 'dec', got {which!r}")
    joint = chain_joint(model, encoder, decoder)
    marg = marginalize(joint, ("W", "U", "Y", "Wh"))
    return float(np.sum(marg.values * table))
