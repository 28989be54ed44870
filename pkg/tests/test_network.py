import numpy as np
import pytest
from numpy.testing import assert_allclose

from pyselfonn.detection import DetectorConfig, build_detector
from pyselfonn.errors import ShapeMismatchError, SpecError
from pyselfonn.gan import GanConfig, build_discriminator, build_generator
from pyselfonn.nn import (
    LayerSpec,
    NetworkSpec,
    SelfONN,
    backward_network,
    count_params,
    format_spec,
    forward_network,
    init_params,
    layer_shapes,
    output_shape,
    parse_spec,
)

from .gradcheck import numeric_grad, rel_error


def small_spec() -> NetworkSpec:
    layers = (
        LayerSpec("a", "op_conv", 1, 2, 3, q=2, stride=2, padding=1),
        LayerSpec("b", "op_tconv", 2, 2, 4, q=2, stride=2, padding=1),
        LayerSpec("c", "op_conv", 2, 2, 3, q=3, padding=1),
        LayerSpec("d", "op_conv", 4, 1, 3, q=2, stride=3, activation="sigmoid"),
        LayerSpec("e", "dense", 4, 2, q=2, activation="none"),
    )
    return NetworkSpec(1, 12, layers, (("b", "d"),))


def test_default_parameter_counts():
    assert count_params(build_generator(GanConfig())) == 235981
    assert count_params(build_discriminator(GanConfig())) == 132237
    assert count_params(build_detector(DetectorConfig())) == 63458


def test_detector_layer_lengths():
    shapes = layer_shapes(build_detector(DetectorConfig()))
    assert [out[1] for _, out in shapes[:5]] == [502, 116, 24, 9, 2]
    assert shapes[5][0] == (16, 2)
    assert output_shape(build_detector(DetectorConfig())) == (2, 0)


def test_discriminator_patch_output():
    spec = build_discriminator(GanConfig())
    assert [out[1] for _, out in layer_shapes(spec)] == [1024, 256, 64, 16, 4, 2]
    assert output_shape(spec) == (1, 2)
    assert spec.layers[-1].activation == "sigmoid"


def test_generator_skips_join_equal_lengths():
    spec = build_generator(GanConfig())
    shapes = layer_shapes(spec)
    lengths = {layer.name: out[1] for layer, (_, out) in zip(spec.layers, shapes)}
    assert [lengths[f"enc{i}"] for i in range(1, 6)] == [2048, 1024, 512, 256, 128]
    assert [lengths[f"dec{i}"] for i in range(1, 6)] == [256, 512, 1024, 2048, 4096]
    assert ("enc5", "dec1") in spec.skips
    assert output_shape(spec) == (1, 4096)


def test_generator_maps_a_segment_to_a_segment():
    spec = build_generator(GanConfig())
    net = SelfONN(spec).init_params(np.random.default_rng(0))
    x = np.random.default_rng(1).uniform(-1, 1, size=(2, 4096)).astype(np.float32)
    y = net(x)
    assert y.shape == (1, 4096)
    assert y.dtype == np.float32
    assert np.all(np.abs(y) <= 1.0)


def test_init_params_bounds():
    spec = small_spec()
    params = init_params(spec, np.random.default_rng(0))
    for layer, w, b in zip(spec.layers, params[0::2], params[1::2]):
        assert w.shape == layer.weight_shape()
        assert np.all(np.abs(w) <= np.sqrt(1.0 / (layer.in_channels * layer.kernel * layer.q)))
        assert not b.any()


def test_same_seed_same_network():
    spec = small_spec()
    a = init_params(spec, np.random.default_rng(5))
    b = init_params(spec, np.random.default_rng(5))
    assert all(np.array_equal(p, q) for p, q in zip(a, b))


def test_network_gradients_through_skips_and_dense():
    spec = small_spec()
    rng = np.random.default_rng(2)
    params = init_params(spec, rng, dtype=np.float64)
    x = rng.uniform(-1, 1, size=(3, 1, 12))
    y, trace = forward_network(spec, params, x, return_trace=True)
    assert y.shape == (3, 2)
    g = rng.normal(size=y.shape)
    grads, grad_x = backward_network(spec, params, trace, g)

    def loss():
        return float(np.sum(forward_network(spec, params, x) * g))

    for p, grad in zip(params, grads):
        assert rel_error(grad, numeric_grad(loss, p)) < 1e-5
    assert rel_error(grad_x, numeric_grad(loss, x)) < 1e-5


def test_unbatched_input_round_trips_shape():
    spec = small_spec()
    net = SelfONN(spec).init_params(np.random.default_rng(3), dtype=np.float64)
    x = np.random.default_rng(4).uniform(-1, 1, size=(1, 12))
    y, trace = net.forward(x, return_trace=True)
    assert y.shape == (2,)
    assert_allclose(y, net(x[None])[0])
    _, grad_x = net.backward(trace, np.ones(2))
    assert grad_x.shape == x.shape


def test_spec_text_round_trip():
    for spec in (small_spec(), build_generator(GanConfig()), build_detector(DetectorConfig())):
        text = format_spec(spec)
        assert parse_spec(text) == spec
        assert format_spec(parse_spec(text)) == text


@pytest.mark.parametrize(
    "text",
    [
        "layer a op_conv in=1 out=1\n",
        "network input_channels=1 input_length=8\nlayer a op_magic in=1 out=1\n",
        "network input_channels=1 input_length=8\nlayer a op_conv in=2 out=1 k=3\n",
        "network input_channels=1 input_length=8\nlayer a op_conv in=1 out=1 k=9\n",
        "network input_channels=1 input_length=8\nlayer a op_conv in=1 out=1 k=three\n",
        "network input_channels=1 input_length=8\nlayer a op_conv in=1 out=1\nskip a -> a\n",
        "network input_channels=1 input_length=8\nfrobnicate\n",
    ],
)
def test_parse_spec_rejects_broken_networks(text):
    with pytest.raises(SpecError):
        parse_spec(text)


def test_skip_with_mismatched_length_is_rejected():
    layers = (
        LayerSpec("a", "op_conv", 1, 1, 3),
        LayerSpec("b", "op_conv", 1, 1, 3),
        LayerSpec("c", "op_conv", 2, 1, 3),
    )
    with pytest.raises(SpecError):
        layer_shapes(NetworkSpec(1, 16, layers, (("a", "c"),)))


def test_wrong_input_or_params_are_rejected():
    spec = small_spec()
    net = SelfONN(spec).init_params(np.random.default_rng(0))
    with pytest.raises(ShapeMismatchError):
        net(np.zeros((1, 1, 13), np.float32))
    with pytest.raises(ShapeMismatchError):
        net.set_params(net.params[:-1])
