from .functional import (
    conv_output_length,
    dense_backward,
    dense_forward,
    op_conv1d_backward,
    op_conv1d_forward,
    op_tconv1d_backward,
    op_tconv1d_forward,
    sigmoid_backward,
    sigmoid_forward,
    tanh_backward,
    tanh_forward,
    tconv_output_length,
)
from .NetworkSpec import (
    LayerSpec,
    NetworkSpec,
    check_spec,
    count_params,
    format_spec,
    layer_shapes,
    output_shape,
    parse_spec,
)
from .SelfONN import SelfONN, backward_network, forward_network, init_params
from .serialization import dumps_model, load_model, loads_model, save_model

__all__ = [
    "conv_output_length",
    "dense_backward",
    "dense_forward",
    "op_conv1d_backward",
    "op_conv1d_forward",
    "op_tconv1d_backward",
    "op_tconv1d_forward",
    "sigmoid_backward",
    "sigmoid_forward",
    "tanh_backward",
    "tanh_forward",
    "tconv_output_length",
    "LayerSpec",
    "NetworkSpec",
    "check_spec",
    "count_params",
    "format_spec",
    "layer_shapes",
    "output_shape",
    "parse_spec",
    "SelfONN",
    "backward_network",
    "forward_network",
    "init_params",
    "dumps_model",
    "load_model",
    "loads_model",
    "save_model",
]
