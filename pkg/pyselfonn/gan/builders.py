from __future__ import annotations

from typing import List, Tuple

from ..errors import SpecError
from ..nn.functional import conv_output_length, tconv_output_length
from ..nn.NetworkSpec import LayerSpec, NetworkSpec, check_spec
from .GanConfig import GanConfig


def build_generator(cfg: GanConfig) -> NetworkSpec:
    """1D operational U-Net.

    ``gen_depth`` strided operational layers halve the signal, the same number
    of transposed operational layers double it back. Decoder layer i consumes
    the previous layer's output concatenated with the encoder output of the
    same length (the bottleneck meets itself at the first decoder layer).
    """
    depth = cfg.gen_depth
    width = cfg.gen_width
    kernel = cfg.gen_kernel
    pad = (kernel - 1) // 2
    final_kernel = cfg.gen_final_kernel
    final_pad = (final_kernel - 2) // 2

    layers: List[LayerSpec] = []
    lengths = [cfg.segment_length]
    channels = 1 + cfg.noise_channels
    for i in range(1, depth + 1):
        layers.append(
            LayerSpec(f"enc{i}", "op_conv", channels, width, kernel, cfg.q, stride=2, padding=pad)
        )
        lengths.append(conv_output_length(lengths[-1], kernel, 2, pad))
        channels = width
        if lengths[-1] < 1:
            raise SpecError(f"segment length {cfg.segment_length} is too short for {depth} encoder layers")

    skips: List[Tuple[str, str]] = []
    current = lengths[-1]
    for i in range(1, depth + 1):
        last = i == depth
        k, p = (final_kernel, final_pad) if last else (kernel, pad)
        target = lengths[depth - i]
        trim = target - tconv_output_length(current, k, 2, p)
        layers.append(
            LayerSpec(
                f"dec{i}",
                "op_tconv",
                2 * width,
                1 if last else width,
                k,
                cfg.q,
                stride=2,
                padding=p,
                output_trim=trim,
            )
        )
        skips.append((f"enc{depth + 1 - i}", f"dec{i}"))
        current = target

    return check_spec(NetworkSpec(1 + cfg.noise_channels, cfg.segment_length, tuple(layers), tuple(skips)))


def build_discriminator(cfg: GanConfig) -> NetworkSpec:
    """Conditional patch discriminator on the (X, candidate Y) channel pair."""
    layers: List[LayerSpec] = []
    channels = 2
    n = len(cfg.disc_kernels)
    for i, (k, s) in enumerate(zip(cfg.disc_kernels, cfg.disc_strides), start=1):
        last = i == n
        layers.append(
            LayerSpec(
                f"disc{i}",
                "op_conv",
                channels,
                1 if last else cfg.disc_width,
                k,
                cfg.discriminator_q,
                stride=s,
                padding=cfg.disc_final_padding if last else 0,
                activation="sigmoid" if last else "tanh",
            )
        )
        channels = cfg.disc_width
    return check_spec(NetworkSpec(2, cfg.segment_length, tuple(layers)))
