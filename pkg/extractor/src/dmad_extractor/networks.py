"""The six feature networks: builders, taps, and preprocessing.

Feature taps are fixed: the three fully-connected networks expose their
4096-wide penultimate activation (the layer feeding the classifier head),
the three pooling networks expose their 2048-wide global-average-pool
output. Preprocessing is the canonical recipe per family: short-side
resize, center crop to the native input size, per-channel normalization.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import torch
from PIL import Image
from torch import nn
from torchvision import models
from torchvision.transforms import functional as TF
from torchvision.transforms.functional import InterpolationMode

from .errors import WeightsUnavailableError
from .xception import XceptionFeatures

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    width: int
    resize: int
    crop: int
    mean: tuple[float, float, float]
    std: tuple[float, float, float]

    def preprocess(self, image: Image.Image) -> torch.Tensor:
        rgb = image.convert("RGB")
        resized = TF.resize(rgb, self.resize, interpolation=InterpolationMode.BILINEAR)
        cropped = TF.center_crop(resized, [self.crop, self.crop])
        tensor = TF.to_tensor(cropped)
        return TF.normalize(tensor, list(self.mean), list(self.std))

    def preprocessing_note(self) -> dict:
        """The recipe, recorded verbatim in the extraction manifest."""
        return {
            "resize_short_side": self.resize,
            "center_crop": self.crop,
            "interpolation": "bilinear",
            "mean": list(self.mean),
            "std": list(self.std),
        }


SPECS: dict[str, NetworkSpec] = {
    "alexnet": NetworkSpec("alexnet", 4096, 256, 224, IMAGENET_MEAN, IMAGENET_STD),
    "vgg16": NetworkSpec("vgg16", 4096, 256, 224, IMAGENET_MEAN, IMAGENET_STD),
    "vgg19": NetworkSpec("vgg19", 4096, 256, 224, IMAGENET_MEAN, IMAGENET_STD),
    "resnet50": NetworkSpec("resnet50", 2048, 256, 224, IMAGENET_MEAN, IMAGENET_STD),
    "resnet101": NetworkSpec("resnet101", 2048, 256, 224, IMAGENET_MEAN, IMAGENET_STD),
    "xception": NetworkSpec("xception", 2048, 342, 299, (0.5, 0.5, 0.5), (0.5, 0.5, 0.5)),
}

NETWORKS = tuple(SPECS)

_TORCHVISION = {
    "alexnet": (models.alexnet, models.AlexNet_Weights.IMAGENET1K_V1),
    "vgg16": (models.vgg16, models.VGG16_Weights.IMAGENET1K_V1),
    "vgg19": (models.vgg19, models.VGG19_Weights.IMAGENET1K_V1),
    "resnet50": (models.resnet50, models.ResNet50_Weights.IMAGENET1K_V1),
    "resnet101": (models.resnet101, models.ResNet101_Weights.IMAGENET1K_V1),
}


def _init_seed(name: str, seed: int) -> int:
    digest = hashlib.blake2s(f"{seed}:{name}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def build_network(name: str, *, pretrained: bool = True, seed: int = 0) -> nn.Module:
    """Construct one feature network in eval mode.

    With ``pretrained`` the ImageNet weights must be loadable (local cache
    or download); otherwise the network is randomly initialized from a
    seed derived from (seed, name), which is enough for format, shape,
    and determinism checks without any network access.
    """
    if name not in SPECS:
        raise ValueError(f"unknown network '{name}', expected one of {NETWORKS}")

    if name == "xception":
        if pretrained:
            raise WeightsUnavailableError(
                "no pretrained weight source is bundled for xception; "
                "rerun with pretrained disabled or load weights manually"
            )
        torch.manual_seed(_init_seed(name, seed))
        model = XceptionFeatures()
    else:
        builder, weights_enum = _TORCHVISION[name]
        if pretrained:
            try:
                model = builder(weights=weights_enum)
            except Exception as exc:
                raise WeightsUnavailableError(
                    f"could not obtain pretrained weights for {name}: {exc}; "
                    "populate the torch cache (TORCH_HOME) or rerun with "
                    "pretrained disabled"
                ) from exc
        else:
            torch.manual_seed(_init_seed(name, seed))
            model = builder(weights=None)
        if name in ("alexnet", "vgg16", "vgg19"):
            # drop the final class projection, keep the 4096-d activation
            model.classifier[-1] = nn.Identity()
        else:
            model.fc = nn.Identity()

    model.eval()
    for param in model.parameters():
        param.requires_grad_(False)
    return model
