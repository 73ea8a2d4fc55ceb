"""Generator and discriminator architectures.

The generator is an encoder-decoder over single-channel images with a
skip connection between each encoder level and its mirror, transposed
convolutions for upsampling, and a tanh head so outputs stay inside
the signed image range. The discriminator is fully convolutional and
returns a grid of per-patch realism scores instead of one scalar, so
every score is tied to a local region of the input pair.

Dropout inside the decoder doubles as the generator's noise source
during training; modules built here default to inference mode and
callers opt into stochasticity with ``.train()``. Feature maps are
normalized per image in both modes, so an output never depends on
batch composition or on statistics accumulated during training.
"""

from __future__ import annotations

import torch
from torch import nn

from .config import GanConfig
from .errors import ConfigurationError

BASE_CHANNELS = 64
MAX_CHANNELS = 512
DROPOUT_RATE = 0.5

# Decoder levels carrying dropout: up to three, hugging the bottleneck
# but never the bottleneck's own upsampler or the output head.
def _dropout_levels(depth: int) -> frozenset[int]:
    return frozenset(range(max(1, depth - 4), depth - 1))


def _level_channels(level: int) -> int:
    return min(BASE_CHANNELS << level, MAX_CHANNELS)


def _init_weights(module: nn.Module) -> None:
    if isinstance(module, (nn.Conv2d, nn.ConvTranspose2d)):
        nn.init.normal_(module.weight, 0.0, 0.02)
        if module.bias is not None:
            nn.init.zeros_(module.bias)
    elif isinstance(module, nn.InstanceNorm2d):
        nn.init.normal_(module.weight, 1.0, 0.02)
        nn.init.zeros_(module.bias)


class UnetGenerator(nn.Module):
    """Mirror-symmetric encoder-decoder with per-level skip concats.

    Level k halves the grid k+1 times on the way down; the upsampler
    at level k brings its input back to level k-1's grid, where the
    stored encoder activation is concatenated before the next step.
    Feature widths double per level and saturate at ``MAX_CHANNELS``.
    """

    def __init__(self, depth: int) -> None:
        super().__init__()
        self.depth = depth
        down_convs, down_norms = [], []
        up_convs, up_norms = [], []
        for k in range(depth):
            c_in = 1 if k == 0 else _level_channels(k - 1)
            c_out = _level_channels(k)
            normed = 0 < k < depth - 1
            down_convs.append(nn.Conv2d(c_in, c_out, 4, stride=2, padding=1, bias=not normed))
            down_norms.append(nn.InstanceNorm2d(c_out, affine=True) if normed else nn.Identity())
            u_in = c_out if k == depth - 1 else 2 * c_out
            u_out = 1 if k == 0 else _level_channels(k - 1)
            up_convs.append(nn.ConvTranspose2d(u_in, u_out, 4, stride=2, padding=1, bias=k == 0))
            up_norms.append(nn.Identity() if k == 0 else nn.InstanceNorm2d(u_out, affine=True))
        self.down_convs = nn.ModuleList(down_convs)
        self.down_norms = nn.ModuleList(down_norms)
        self.up_convs = nn.ModuleList(up_convs)
        self.up_norms = nn.ModuleList(up_norms)
        self.dropout = nn.Dropout(DROPOUT_RATE)
        self._dropout_at = _dropout_levels(depth)
        self.eval()

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        h = x
        for k in range(self.depth):
            if k > 0:
                h = nn.functional.leaky_relu(h, 0.2)
            h = self.down_norms[k](self.down_convs[k](h))
            skips.append(h)
        for k in range(self.depth - 1, -1, -1):
            h = self.up_convs[k](torch.relu(h))
            if k == 0:
                return torch.tanh(h)
            h = self.up_norms[k](h)
            if k in self._dropout_at:
                h = self.dropout(h)
            h = torch.cat([h, skips[k - 1]], dim=1)
        raise AssertionError("unreachable")


class PatchDiscriminator(nn.Module):
    """Convolution-only realism scorer for (input, candidate) pairs.

    ``n_strided`` halvings set the patch size; two stride-1 tail
    convolutions widen the receptive field and collapse to one score
    channel, so a size-S input yields an (S / 2^n - 2) square map of
    logits with no fully connected head anywhere.
    """

    def __init__(self, n_strided: int) -> None:
        super().__init__()
        layers: list[nn.Module] = [
            nn.Conv2d(2, BASE_CHANNELS, 4, stride=2, padding=1),
            nn.LeakyReLU(0.2),
        ]
        for k in range(1, n_strided):
            layers += [
                nn.Conv2d(_level_channels(k - 1), _level_channels(k), 4,
                          stride=2, padding=1, bias=False),
                nn.InstanceNorm2d(_level_channels(k), affine=True),
                nn.LeakyReLU(0.2),
            ]
        tail = _level_channels(n_strided)
        layers += [
            nn.Conv2d(_level_channels(n_strided - 1), tail, 4, stride=1, padding=1, bias=False),
            nn.InstanceNorm2d(tail, affine=True),
            nn.LeakyReLU(0.2),
            nn.Conv2d(tail, 1, 4, stride=1, padding=1),
        ]
        self.net = nn.Sequential(*layers)
        self.eval()

    def forward(self, x: torch.Tensor, candidate: torch.Tensor) -> torch.Tensor:
        return self.net(torch.cat([x, candidate], dim=1))


def build_generator(config: GanConfig) -> UnetGenerator:
    """Construct and randomly initialize the enhancement network.

    Draws from the ambient torch generator; seed it for reproducible
    weights. The grid must survive ``depth`` exact halvings.
    """
    config.validate()
    if config.image_size % (1 << config.depth) != 0:
        raise ConfigurationError(
            f"depth {config.depth} is incompatible with {config.image_size}x"
            f"{config.image_size} inputs: the grid must halve cleanly {config.depth} times"
        )
    net = UnetGenerator(config.depth)
    net.apply(_init_weights)
    return net


def build_discriminator(config: GanConfig) -> PatchDiscriminator:
    """Construct and randomly initialize the patch scorer.

    The requested map size fixes the number of halvings: a size-S
    input supports per-side counts of S / 2^k - 2 only.
    """
    config.validate()
    stride_total, n_strided = 1, 0
    target = config.patch_map_size + 2
    while stride_total * target < config.image_size:
        stride_total <<= 1
        n_strided += 1
    if n_strided < 1 or stride_total * target != config.image_size:
        reachable = sorted(
            config.image_size // (1 << k) - 2
            for k in range(1, config.image_size.bit_length())
            if config.image_size % (1 << k) == 0 and config.image_size // (1 << k) >= 4
        )
        raise ConfigurationError(
            f"a {config.patch_map_size}-per-side patch map is not reachable from "
            f"{config.image_size}x{config.image_size} inputs; choose from {reachable}"
        )
    net = PatchDiscriminator(n_strided)
    net.apply(_init_weights)
    return net
