"""Feedforward ReLU networks: a plain-text weight format and inference."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArityError, ParseError

ACTIVATIONS = ("relu", "linear")


def relu(x):
    return np.maximum(x, 0.0)


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str = "relu"

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64, ndmin=2)
        b = np.zeros(w.shape[0]) if self.bias is None else np.array(self.bias, dtype=np.float64)
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias has shape {b.shape}, expected ({w.shape[0]},)")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def n_in(self):
        return self.weights.shape[1]

    @property
    def n_out(self):
        return self.weights.shape[0]


@dataclass(frozen=True)
class Network:
    layers: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("network needs at least one layer")
        for k, (a, b) in enumerate(zip(layers, layers[1:]), start=1):
            if b.n_in != a.n_out:
                raise ValueError(f"layer {k + 1} takes {b.n_in} inputs but layer {k} emits {a.n_out}")
        if layers[-1].activation != "linear":
            raise ValueError("output layer must be linear")
        object.__setattr__(self, "layers", layers)

    @property
    def n_inputs(self):
        return self.layers[0].n_in

    @property
    def n_outputs(self):
        return self.layers[-1].n_out


@dataclass(frozen=True)
class Evaluation:
    input: tuple
    raw_outputs: tuple
    ranking: tuple = field(default=None)

    def __post_init__(self):
        if self.ranking is None:
            object.__setattr__(self, "ranking", _rank(self.raw_outputs))

    @property
    def top(self) -> int:
        return self.ranking[0]


def _rank(scores) -> tuple:
    # descending score, ties by ascending index
    return tuple(sorted(range(len(scores)), key=lambda i: (-scores[i], i)))


def evaluate(net: Network, x: Sequence[float]) -> Evaluation:
    v = np.asarray(x, dtype=np.float64)
    if v.shape != (net.n_inputs,):
        raise ArityError(f"network takes {net.n_inputs} inputs, got {len(x)}")
    for layer in net.layers:
        v = layer.weights @ v + layer.bias
        if layer.activation == "relu":
            v = relu(v)
    return Evaluation(tuple(float(t) for t in x), tuple(float(t) for t in v))


def rank_outputs(net: Network, x: Sequence[float]) -> list:
    return list(evaluate(net, x).ranking)


def load_network(text: str) -> Network:
    """Parse the whitespace-separated weight-file format::

        network <num_layers>
        layer <in> <out> <relu|linear>
        w <out*in reals, row-major>
        b <out reals>            # optional
    """
    lines = [
        (n, line.split("#", 1)[0].split())
        for n, line in enumerate(text.splitlines(), start=1)
    ]
    lines = [(n, toks) for n, toks in lines if toks]
    if not lines or lines[0][1][0] != "network":
        raise ParseError("expected 'network <num_layers>'", line=lines[0][0] if lines else 1)

    def numbers(n, toks, count, kind):
        if len(toks) != count:
            raise ParseError(f"expected {count} {kind} values, got {len(toks)}", line=n)
        try:
            return [float(t) for t in toks]
        except ValueError as exc:
            raise ParseError(f"malformed number ({exc})", line=n) from None

    def integer(n, tok):
        try:
            value = int(tok)
        except ValueError:
            raise ParseError(f"expected an integer, got {tok!r}", line=n) from None
        if value <= 0:
            raise ParseError(f"expected a positive integer, got {value}", line=n)
        return value

    n0, head = lines[0]
    if len(head) != 2:
        raise ParseError("expected 'network <num_layers>'", line=n0)
    declared = integer(n0, head[1])

    layers = []
    layer_lines = []
    i = 1
    while i < len(lines):
        n, toks = lines[i]
        if toks[0] != "layer" or len(toks) != 4:
            raise ParseError("expected 'layer <in> <out> <activation>'", line=n)
        n_in, n_out, act = integer(n, toks[1]), integer(n, toks[2]), toks[3]
        if act not in ACTIVATIONS:
            raise ParseError(f"unknown activation {act!r}", line=n)
        if layers and layers[-1].n_out != n_in:
            raise ParseError(f"layer takes {n_in} inputs but previous layer emits {layers[-1].n_out}", line=n)
        i += 1
        if i >= len(lines) or lines[i][1][0] != "w":
            raise ParseError("expected 'w' line after layer", line=lines[i][0] if i < len(lines) else n)
        wn, wt = lines[i]
        w = np.array(numbers(wn, wt[1:], n_in * n_out, "weight")).reshape(n_out, n_in)
        i += 1
        b = None
        if i < len(lines) and lines[i][1][0] == "b":
            bn, bt = lines[i]
            b = numbers(bn, bt[1:], n_out, "bias")
            i += 1
        layers.append(Layer(w, b, act))
        layer_lines.append(n)

    if len(layers) != declared:
        raise ParseError(f"header declares {declared} layers, found {len(layers)}", line=n0)
    if layers[-1].activation != "linear":
        raise ParseError("output layer must be linear", line=layer_lines[-1])
    return Network(tuple(layers))


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def dump_network(net: Network) -> str:
    out = [f"network {len(net.layers)}"]
    for layer in net.layers:
        out.append(f"layer {layer.n_in} {layer.n_out} {layer.activation}")
        out.append("w " + " ".join(_fmt(v) for v in layer.weights.ravel()))
        if np.any(layer.bias):
            out.append("b " + " ".join(_fmt(v) for v in layer.bias))
    return "\n".join(out) + "\n"
