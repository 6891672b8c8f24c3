"""Feed-forward ReLU networks: evaluation, interval bounds, neuron stability.

A network here is a plain container of dense layer weights.  The hidden
layers apply an elementwise max(., 0); the output layer is affine.  Interval
bounds are propagated layer by layer with the sign-split weight matrices,
which is cheap but conservative (no input dependency is tracked).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class NeuronState(Enum):
    """Stability of a hidden neuron over a given input box."""

    STRICTLY_INACTIVE = "inactive"
    STRICTLY_ACTIVE = "active"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class ReluNetwork:
    """Dense MLP with ReLU hidden activations and an affine output layer.

    ``weights[i]`` maps layer i-1 activations to layer i pre-activations;
    the last entry is the output layer (no activation).  Immutable after
    construction, so instances can be shared freely.
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        ws = tuple(np.asarray(w, dtype=float) for w in self.weights)
        bs = tuple(np.asarray(b, dtype=float).ravel() for b in self.biases)
        if len(ws) != len(bs) or len(ws) == 0:
            raise ValueError("need one bias vector per weight matrix")
        for i, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 2:
                raise ValueError(f"weight {i} is not a matrix")
            if w.shape[0] != b.shape[0]:
                raise ValueError(f"layer {i}: bias length {b.shape[0]} != rows {w.shape[0]}")
            if i > 0 and w.shape[1] != ws[i - 1].shape[0]:
                raise ValueError(
                    f"layer {i}: expects {w.shape[1]} inputs, previous layer outputs {ws[i-1].shape[0]}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i}: non-finite parameters")
        for w in ws:
            w.setflags(write=False)
        for b in bs:
            b.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def depth(self) -> int:
        """Number of weight layers (hidden layers + 1)."""
        return len(self.weights)

    @property
    def hidden_sizes(self) -> tuple[int, ...]:
        return tuple(w.shape[0] for w in self.weights[:-1])


def forward(net: ReluNetwork, x: np.ndarray) -> np.ndarray:
    """Evaluate the network.  Accepts a single input or a batch (rows)."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    a = np.atleast_2d(x)
    if a.shape[1] != net.input_dim:
        raise ValueError(f"input has {a.shape[1]} features, network expects {net.input_dim}")
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        a = np.maximum(a @ w.T + b, 0.0)
    out = a @ net.weights[-1].T + net.biases[-1]
    return out[0] if single else out


@dataclass(frozen=True)
class LayerBounds:
    """Interval bounds per hidden layer plus the output interval.

    ``pre_lo[i] <= pre-activation of hidden layer i <= pre_hi[i]`` holds for
    every input in ``[in_lo, in_hi]``; post-activation bounds are the same
    intervals clamped at zero.
    """

    in_lo: np.ndarray
    in_hi: np.ndarray
    pre_lo: tuple[np.ndarray, ...]
    pre_hi: tuple[np.ndarray, ...]
    post_lo: tuple[np.ndarray, ...] = field(repr=False)
    post_hi: tuple[np.ndarray, ...] = field(repr=False)
    out_lo: np.ndarray = field(default=None)
    out_hi: np.ndarray = field(default=None)


def propagate_bounds(net: ReluNetwork, in_lo: np.ndarray, in_hi: np.ndarray) -> LayerBounds:
    """Interval-arithmetic layer bounds over the input box [in_lo, in_hi].

    Each layer splits its weight matrix into positive and negative parts and
    takes the worst case of the incoming interval; biases shift both ends.
    """
    lo = np.asarray(in_lo, dtype=float).ravel()
    hi = np.asarray(in_hi, dtype=float).ravel()
    if lo.shape[0] != net.input_dim or hi.shape[0] != net.input_dim:
        raise ValueError("input box dimension does not match the network")
    if not np.all(np.isfinite(lo)) or not np.all(np.isfinite(hi)):
        raise ValueError("input box must be finite")
    if np.any(lo > hi):
        raise ValueError("input box has lo > hi")

    pre_lo, pre_hi, post_lo, post_hi = [], [], [], []
    cur_lo, cur_hi = lo, hi
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        wp = np.maximum(w, 0.0)
        wm = np.minimum(w, 0.0)
        zl = wp @ cur_lo + wm @ cur_hi + b
        zh = wm @ cur_lo + wp @ cur_hi + b
        pre_lo.append(zl)
        pre_hi.append(zh)
        cur_lo = np.maximum(zl, 0.0)
        cur_hi = np.maximum(zh, 0.0)
        post_lo.append(cur_lo)
        post_hi.append(cur_hi)
    w, b = net.weights[-1], net.biases[-1]
    wp = np.maximum(w, 0.0)
    wm = np.minimum(w, 0.0)
    out_lo = wp @ cur_lo + wm @ cur_hi + b
    out_hi = wm @ cur_lo + wp @ cur_hi + b
    return LayerBounds(
        in_lo=lo,
        in_hi=hi,
        pre_lo=tuple(pre_lo),
        pre_hi=tuple(pre_hi),
        post_lo=tuple(post_lo),
        post_hi=tuple(post_hi),
        out_lo=out_lo,
        out_hi=out_hi,
    )


def classify_neurons(bounds: LayerBounds) -> tuple[np.ndarray, ...]:
    """Per-layer arrays of NeuronState derived from the pre-activation bounds.

    A neuron whose upper pre-activation bound is <= 0 can never switch on;
    one whose lower bound is >= 0 is always the identity.  Everything else
    needs a binary variable or a relaxation when encoded in an optimizer.
    """
    out = []
    for zl, zh in zip(bounds.pre_lo, bounds.pre_hi):
        layer = np.empty(zl.shape[0], dtype=object)
        for j in range(zl.shape[0]):
            if zh[j] <= 0.0:
                layer[j] = NeuronState.STRICTLY_INACTIVE
            elif zl[j] >= 0.0:
                layer[j] = NeuronState.STRICTLY_ACTIVE
            else:
                layer[j] = NeuronState.UNSTABLE
        out.append(layer)
    return tuple(out)


def count_unstable(states: tuple[np.ndarray, ...]) -> int:
    return sum(int(np.sum(layer == NeuronState.UNSTABLE)) for layer in states)


def save_network(net: ReluNetwork, path: str) -> None:
    """Write the network as self-describing JSON.

    Floats are serialized with repr (shortest exact round-trip), so a
    save/load cycle reproduces every value bit for bit.
    """
    doc = {
        "input_dim": net.input_dim,
        "output_dim": net.output_dim,
        "layers": [
            {
                "rows": int(w.shape[0]),
                "cols": int(w.shape[1]),
                "W": [float(v) for v in w.ravel()],
                "b": [float(v) for v in b],
            }
            for w, b in zip(net.weights, net.biases)
        ],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_network(path: str) -> ReluNetwork:
    with open(path) as fh:
        doc = json.load(fh)
    weights, biases = [], []
    for layer in doc["layers"]:
        w = np.array(layer["W"], dtype=float).reshape(layer["rows"], layer["cols"])
        weights.append(w)
        biases.append(np.array(layer["b"], dtype=float))
    net = ReluNetwork(tuple(weights), tuple(biases))
    if net.input_dim != doc["input_dim"] or net.output_dim != doc["output_dim"]:
        raise ValueError(f"{path}: declared dimensions do not match the layer shapes")
    return net
