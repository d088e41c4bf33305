"""Network identities, their feature groups, and embedding widths.

Declaration order matters: it fixes the component ordering of fused
scores and the tie-break used by pair selection, so it is defined once
here and imported everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class Group(str, Enum):
    """Feature-width group: G1 nets emit 4096-d vectors, G2 nets 2048-d."""

    G1 = "G1"
    G2 = "G2"


class NetworkId(str, Enum):
    ALEXNET = "alexnet"
    VGG16 = "vgg16"
    VGG19 = "vgg19"
    RESNET50 = "resnet50"
    RESNET101 = "resnet101"
    XCEPTION = "xception"

    @property
    def group(self) -> Group:
        return _GROUP_OF[self]

    def __str__(self) -> str:  # so f-strings print "vgg16", not the repr
        return self.value


GROUP_MEMBERS: dict[Group, tuple[NetworkId, ...]] = {
    Group.G1: (NetworkId.ALEXNET, NetworkId.VGG16, NetworkId.VGG19),
    Group.G2: (NetworkId.RESNET50, NetworkId.RESNET101, NetworkId.XCEPTION),
}

#: All six networks in canonical order (G1 members, then G2 members).
NETWORKS: tuple[NetworkId, ...] = GROUP_MEMBERS[Group.G1] + GROUP_MEMBERS[Group.G2]

_GROUP_OF: dict[NetworkId, Group] = {
    n: g for g, members in GROUP_MEMBERS.items() for n in members
}


@dataclass(frozen=True)
class DimScheme:
    """Expected embedding width per feature group.

    The canonical scheme matches the source networks (4096 for G1, 2048
    for G2). Reduced schemes keep the full pipeline cheap to run on
    synthetic data; ``None`` in APIs that accept a scheme disables the
    width check entirely.
    """

    g1: int = 4096
    g2: int = 2048

    def __post_init__(self) -> None:
        if self.g1 < 1 or self.g2 < 1:
            raise ValueError(f"dimensions must be positive, got g1={self.g1} g2={self.g2}")

    def expected_dim(self, network: NetworkId) -> int:
        return self.g1 if network.group is Group.G1 else self.g2


CANONICAL_SCHEME = DimScheme()
SMALL_SCHEME = DimScheme(g1=64, g2=32)


def parse_network(name: str) -> NetworkId:
    """Map a lowercase network name to its identity.

    Raises ValueError for unknown names, listing the valid ones.
    """
    try:
        return NetworkId(name)
    except ValueError:
        valid = ", ".join(n.value for n in NETWORKS)
        raise ValueError(f"unknown network '{name}' (expected one of: {valid})") from None
