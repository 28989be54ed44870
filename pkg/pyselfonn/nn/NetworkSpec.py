from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from ..errors import SpecError
from .functional import conv_output_length, tconv_output_length

LAYER_KINDS = ("op_conv", "op_tconv", "dense")
ACTIVATIONS = ("tanh", "sigmoid", "none")

# (channels, length) for signal layers, (features, 0) after a dense layer
Shape = Tuple[int, int]


@dataclass(frozen=True)
class LayerSpec(object):
    name: str
    kind: str
    in_channels: int
    out_channels: int
    kernel: int = 1
    q: int = 3
    stride: int = 1
    padding: int = 0
    output_trim: int = 0
    activation: str = "tanh"

    def validate(self):
        if self.kind not in LAYER_KINDS:
            raise SpecError(f"layer {self.name}: unknown kind {self.kind!r}")
        if self.activation not in ACTIVATIONS:
            raise SpecError(f"layer {self.name}: unknown activation {self.activation!r}")
        if self.in_channels < 1 or self.out_channels < 1:
            raise SpecError(f"layer {self.name}: channel counts must be >= 1")
        if self.kernel < 1 or self.q < 1:
            raise SpecError(f"layer {self.name}: K and Q must be >= 1")
        if self.stride < 1 or self.padding < 0:
            raise SpecError(f"layer {self.name}: stride must be >= 1 and padding >= 0")
        if self.kind == "dense" and self.kernel != 1:
            raise SpecError(f"layer {self.name}: dense layers take the flattened input, K must be 1")

    def weight_shape(self) -> Tuple[int, ...]:
        if self.kind == "dense":
            if self.q == 1:
                return self.out_channels, self.in_channels
            return self.out_channels, self.in_channels, self.q
        return self.out_channels, self.in_channels, self.kernel, self.q

    def n_params(self) -> int:
        n = 1
        for d in self.weight_shape():
            n *= d
        return n + self.out_channels

    def to_text(self) -> str:
        return (
            f"layer {self.name} {self.kind} in={self.in_channels} out={self.out_channels} "
            f"k={self.kernel} q={self.q} stride={self.stride} padding={self.padding} "
            f"trim={self.output_trim} act={self.activation}"
        )


_LAYER_KEYS = {
    "in": "in_channels",
    "out": "out_channels",
    "k": "kernel",
    "q": "q",
    "stride": "stride",
    "padding": "padding",
    "trim": "output_trim",
    "act": "activation",
}


@dataclass(frozen=True)
class NetworkSpec(object):
    """Ordered layer list plus skip connections.

    The input of a layer is the output of the layer before it (or the network
    input) concatenated on the channel axis with the outputs of every skip
    source pointing at it, in declaration order.
    """

    input_channels: int
    input_length: int
    layers: Tuple[LayerSpec, ...]
    skips: Tuple[Tuple[str, str], ...] = field(default_factory=tuple)

    def layer_index(self, name: str) -> int:
        for i, layer in enumerate(self.layers):
            if layer.name == name:
                return i
        raise SpecError(f"no layer named {name!r}")

    def skip_sources(self) -> Dict[int, List[int]]:
        sources: Dict[int, List[int]] = {}
        for src, dst in self.skips:
            i, j = self.layer_index(src), self.layer_index(dst)
            if i >= j:
                raise SpecError(f"skip {src} -> {dst} must point forward")
            sources.setdefault(j, []).append(i)
        return sources

    def to_text(self) -> str:
        lines = [f"network input_channels={self.input_channels} input_length={self.input_length}"]
        lines.extend(layer.to_text() for layer in self.layers)
        lines.extend(f"skip {src} -> {dst}" for src, dst in self.skips)
        return "\n".join(lines) + "\n"


def format_spec(spec: NetworkSpec) -> str:
    return spec.to_text()


def parse_spec(text: str) -> NetworkSpec:
    header = None
    layers: List[LayerSpec] = []
    skips: List[Tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            if tokens[0] == "network":
                values = dict(t.split("=", 1) for t in tokens[1:])
                header = (int(values["input_channels"]), int(values["input_length"]))
            elif tokens[0] == "layer":
                name, kind = tokens[1], tokens[2]
                kwargs = {}
                for token in tokens[3:]:
                    key, value = token.split("=", 1)
                    attr = _LAYER_KEYS[key]
                    kwargs[attr] = value if attr == "activation" else int(value)
                layers.append(LayerSpec(name=name, kind=kind, **kwargs))
            elif tokens[0] == "skip" and len(tokens) == 4 and tokens[2] == "->":
                skips.append((tokens[1], tokens[3]))
            else:
                raise SpecError(f"unrecognized statement {tokens[0]!r}")
        except (KeyError, IndexError, ValueError) as e:
            raise SpecError(f"line {lineno}: cannot parse {line!r} ({e})") from e
    if header is None:
        raise SpecError("missing 'network' header line")
    spec = NetworkSpec(header[0], header[1], tuple(layers), tuple(skips))
    check_spec(spec)
    return spec


def layer_shapes(spec: NetworkSpec) -> List[Tuple[Shape, Shape]]:
    """``(input_shape, output_shape)`` per layer; raises SpecError when the chain breaks."""
    if not spec.layers:
        raise SpecError("network has no layers")
    names = [layer.name for layer in spec.layers]
    if len(set(names)) != len(names):
        raise SpecError("layer names must be unique")
    sources = spec.skip_sources()

    shapes: List[Tuple[Shape, Shape]] = []
    outputs: List[Shape] = []
    current: Shape = (spec.input_channels, spec.input_length)
    for i, layer in enumerate(spec.layers):
        layer.validate()
        channels, length = current
        for src in sources.get(i, []):
            s_channels, s_length = outputs[src]
            if s_length != length:
                raise SpecError(
                    f"skip {spec.layers[src].name} -> {layer.name}: length {s_length} != {length}"
                )
            channels += s_channels
        in_shape = (channels, length)

        if layer.kind == "dense":
            features = channels * length if length else channels
            if features != layer.in_channels:
                raise SpecError(
                    f"layer {layer.name}: expects {layer.in_channels} features, gets {features}"
                )
            out_shape = (layer.out_channels, 0)
        else:
            if length == 0:
                raise SpecError(f"layer {layer.name}: convolution after a dense layer")
            if channels != layer.in_channels:
                raise SpecError(
                    f"layer {layer.name}: expects {layer.in_channels} channels, gets {channels}"
                )
            if layer.kind == "op_conv":
                out_len = conv_output_length(length, layer.kernel, layer.stride, layer.padding)
            else:
                out_len = tconv_output_length(
                    length, layer.kernel, layer.stride, layer.padding, layer.output_trim
                )
            if out_len < 1:
                raise SpecError(f"layer {layer.name}: output length {out_len} < 1")
            out_shape = (layer.out_channels, out_len)
        shapes.append((in_shape, out_shape))
        outputs.append(out_shape)
        current = out_shape
    return shapes


def check_spec(spec: NetworkSpec) -> NetworkSpec:
    layer_shapes(spec)
    return spec


def output_shape(spec: NetworkSpec) -> Shape:
    return layer_shapes(spec)[-1][1]


def count_params(spec: NetworkSpec) -> int:
    check_spec(spec)
    return sum(layer.n_params() for layer in spec.layers)
