import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import layers_text, naive_forward, random_layers
from scenguard.dnn import Layer, Network, dump_network, evaluate, load_network, rank_outputs, relu
from scenguard.errors import ArityError, ParseError

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_running_example_shape(running_net):
    assert running_net.n_inputs == 2 and running_net.n_outputs == 2
    assert [layer.activation for layer in running_net.layers] == ["relu", "linear"]


@pytest.mark.parametrize(
    "x, raw, top",
    [((1, 0), (1.0, 0.0), 0), ((0, 1), (0.0, 3.0), 1), ((2, 1), (1.0, 3.0), 1), ((0, 0), (0.0, 0.0), 0)],
)
def test_running_example_values(running_net, x, raw, top):
    ev = evaluate(running_net, x)
    assert ev.raw_outputs == raw
    assert ev.top == top


def test_hidden_layer_by_hand(running_net):
    # (2,1) -> v = (relu(1), relu(-4), relu(3))
    first = running_net.layers[0]
    v = relu(first.weights @ np.array([2.0, 1.0]))
    assert list(v) == [1.0, 0.0, 3.0]


def test_rank_outputs(running_net):
    assert rank_outputs(running_net, (1, 0)) == [0, 1]
    assert rank_outputs(running_net, (0, 1)) == [1, 0]
    assert rank_outputs(running_net, (0, 0)) == [0, 1]


def test_tie_break_ascending_index():
    net = Network((Layer(np.zeros((4, 2)), None, "linear"),))
    assert rank_outputs(net, (3, 4)) == [0, 1, 2, 3]


def test_identity_file():
    net = load_network("network 1\nlayer 1 1 linear\nw 1\n")
    assert evaluate(net, (5,)).raw_outputs == (5.0,)


def test_bias_line_optional():
    net = load_network("network 1\nlayer 2 1 linear\nw 1 1\nb 0.5\n")
    assert evaluate(net, (1, 2)).raw_outputs == (3.5,)


@pytest.mark.parametrize(
    "text, line",
    [
        ("network 1\nlayer 2 2 linear\nw 1 2 3\n", 3),
        ("network 1\nlayer 2 2 tanh\nw 1 2 3 4\n", 2),
        ("network 1\nlayer 1 1 linear\nw 1,5\n", 3),
        ("network 2\nlayer 1 2 relu\nw 1 1\nlayer 3 1 linear\nw 1 1 1\n", 4),
        ("network 1\nlayer 1 1 relu\nw 1\n", 2),
        ("network 2\nlayer 1 1 linear\nw 1\n", None),
        ("layer 1 1 linear\nw 1\n", 1),
        ("network 1\nlayer 1 1 linear\nw 1\nb 1 2\n", 4),
    ],
)
def test_parse_errors_carry_line(text, line):
    with pytest.raises(ParseError) as info:
        load_network(text)
    if line is not None:
        assert info.value.line == line


def test_comments_and_blank_lines(data_dir):
    text = (data_dir / "running_example.net").read_text()
    assert "#" in text
    assert load_network(text).n_outputs == 2


def test_input_arity_error(running_net):
    with pytest.raises(ArityError):
        evaluate(running_net, (1, 2, 3))


def test_dump_load_roundtrip():
    rng = random.Random(3)
    for _ in range(20):
        layers = random_layers(rng)
        net = load_network(layers_text(layers))
        again = load_network(dump_network(net))
        for a, b in zip(net.layers, again.layers):
            assert np.array_equal(a.weights, b.weights) and np.array_equal(a.bias, b.bias)
            assert a.activation == b.activation


def test_matches_naive_oracle_on_100_random_nets():
    rng = random.Random(2024)
    for _ in range(100):
        layers = random_layers(rng, max_layers=4, max_width=8)
        net = load_network(layers_text(layers))
        x = [rng.uniform(-3, 3) for _ in range(net.n_inputs)]
        got = evaluate(net, x).raw_outputs
        want = naive_forward(layers, x)
        assert len(got) == len(want)
        for g, w in zip(got, want):
            assert abs(g - w) <= 1e-12 * max(1.0, abs(w))


@given(finite)
def test_relu_nonnegative_and_idempotent(x):
    r = float(relu(x))
    assert r >= 0
    assert float(relu(r)) == r


@given(st.integers(0, 10**6), st.floats(0, 10))
def test_positive_homogeneity_without_bias(seed, lam):
    rng = random.Random(seed)
    layers = random_layers(rng, zero_bias=True)
    net = load_network(layers_text(layers))
    x = [rng.uniform(-2, 2) for _ in range(net.n_inputs)]
    base = np.array(evaluate(net, x).raw_outputs)
    scaled = np.array(evaluate(net, [lam * t for t in x]).raw_outputs)
    assert np.allclose(scaled, lam * base, rtol=1e-9, atol=1e-9)


@given(st.integers(0, 10**6), st.floats(-100, 100))
def test_ranking_is_permutation_and_shift_invariant(seed, c):
    rng = random.Random(seed)
    layers = random_layers(rng)
    net = load_network(layers_text(layers))
    x = [rng.uniform(-2, 2) for _ in range(net.n_inputs)]
    ranking = rank_outputs(net, x)
    assert sorted(ranking) == list(range(net.n_outputs))
    last = layers[-1]
    shifted = layers[:-1] + [(last[0], [b + c for b in last[1]], last[2])]
    raw = evaluate(net, x).raw_outputs
    gaps = [abs(a - b) for a in raw for b in raw if a != b]
    if not gaps or min(gaps) > 1e-6 * (1 + abs(c)):
        assert rank_outputs(load_network(layers_text(shifted)), x) == ranking


@given(st.integers(0, 10**6))
def test_ranking_sorted_descending(seed):
    rng = random.Random(seed)
    net = load_network(layers_text(random_layers(rng)))
    ev = evaluate(net, [rng.uniform(-2, 2) for _ in range(net.n_inputs)])
    scores = [ev.raw_outputs[i] for i in ev.ranking]
    assert all(a >= b for a, b in zip(scores, scores[1:]))
    for i, j in zip(ev.ranking, ev.ranking[1:]):
        if ev.raw_outputs[i] == ev.raw_outputs[j]:
            assert i < j


def test_network_checks():
    with pytest.raises(ValueError):
        Network((Layer(np.ones((2, 2)), None, "linear"), Layer(np.ones((1, 3)), None, "linear")))
    with pytest.raises(ValueError):
        Network((Layer(np.ones((2, 2)), None, "relu"),))
    with pytest.raises(ValueError):
        Network(())


def test_network_immutable(running_net):
    with pytest.raises(ValueError):
        running_net.layers[0].weights[0, 0] = 9.0
