"""Xception feature trunk.

The depthwise-separable architecture with an entry flow (32/64 stem plus
128/256/728 downsampling blocks), eight identity middle blocks at width
728, and an exit flow ending in 1536 and 2048 separable convolutions.
The forward pass returns the 2048-wide global-average-pool features, not
class logits. Expects 299x299 inputs normalized to [-1, 1].
"""

from __future__ import annotations

import torch
from torch import nn


class SeparableConv2d(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.depthwise = nn.Conv2d(
            in_ch, in_ch, 3, stride=stride, padding=1, groups=in_ch, bias=False
        )
        self.pointwise = nn.Conv2d(in_ch, out_ch, 1, bias=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.pointwise(self.depthwise(x))


class Block(nn.Module):
    """Stack of separable convolutions with a residual connection.

    Downsampling blocks end in a strided max pool and project the skip
    path with a strided 1x1 convolution; middle blocks keep the identity
    skip. ``relu_first`` is off only for the very first block, whose input
    comes straight from the stem ReLU.
    """

    def __init__(
        self,
        in_ch: int,
        out_ch: int,
        reps: int,
        *,
        stride: int = 1,
        relu_first: bool = True,
        grow_first: bool = True,
    ):
        super().__init__()
        if stride != 1 or in_ch != out_ch:
            self.skip = nn.Sequential(
                nn.Conv2d(in_ch, out_ch, 1, stride=stride, bias=False),
                nn.BatchNorm2d(out_ch),
            )
        else:
            self.skip = nn.Identity()

        layers: list[nn.Module] = []
        ch = in_ch
        for i in range(reps):
            # channel growth happens on the first conv in entry blocks and
            # on the last conv in the exit block
            target = out_ch if (grow_first or i == reps - 1) else in_ch
            if i > 0 or relu_first:
                layers.append(nn.ReLU(inplace=False))
            layers.append(SeparableConv2d(ch, target))
            layers.append(nn.BatchNorm2d(target))
            ch = target
        if stride != 1:
            layers.append(nn.MaxPool2d(3, stride=stride, padding=1))
        self.main = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.main(x) + self.skip(x)


class XceptionFeatures(nn.Module):
    def __init__(self):
        super().__init__()
        self.stem = nn.Sequential(
            nn.Conv2d(3, 32, 3, stride=2, padding=1, bias=False),
            nn.BatchNorm2d(32),
            nn.ReLU(inplace=False),
            nn.Conv2d(32, 64, 3, padding=1, bias=False),
            nn.BatchNorm2d(64),
            nn.ReLU(inplace=False),
        )
        self.entry = nn.Sequential(
            Block(64, 128, 2, stride=2, relu_first=False),
            Block(128, 256, 2, stride=2),
            Block(256, 728, 2, stride=2),
        )
        self.middle = nn.Sequential(*[Block(728, 728, 3) for _ in range(8)])
        self.exit_block = Block(728, 1024, 2, stride=2, grow_first=False)
        self.tail = nn.Sequential(
            SeparableConv2d(1024, 1536),
            nn.BatchNorm2d(1536),
            nn.ReLU(inplace=False),
            SeparableConv2d(1536, 2048),
            nn.BatchNorm2d(2048),
            nn.ReLU(inplace=False),
        )
        self.pool = nn.AdaptiveAvgPool2d(1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = self.stem(x)
        x = self.entry(x)
        x = self.middle(x)
        x = self.exit_block(x)
        x = self.tail(x)
        return torch.flatten(self.pool(x), 1)
