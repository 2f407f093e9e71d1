"""Model resolution: tiny builtin test models plus the torchvision zoo."""

import torch.nn as nn


class ToyConvNet(nn.Sequential):
    """Small convnet whose layer mix resembles the real networks' manifests."""

    def __init__(self, num_classes: int = 10, image_size: int = 32):
        feature_size = ((image_size - 2) // 2 - 2) // 2
        super().__init__(
            nn.Conv2d(3, 8, 3),
            nn.ReLU(),
            nn.MaxPool2d(2),
            nn.Conv2d(8, 16, 3),
            nn.ReLU(),
            nn.MaxPool2d(2),
            nn.Flatten(),
            nn.Linear(16 * feature_size * feature_size, num_classes),
        )


class ToyThreeLayer(nn.Sequential):
    """Exactly three leaf modules; handy for pinning manifest layouts."""

    def __init__(self, num_classes: int = 10, image_size: int = 32):
        super().__init__(
            nn.Flatten(),
            nn.Linear(3 * image_size * image_size, 16),
            nn.Linear(16, num_classes),
        )


_BUILTIN = {"toy": ToyConvNet, "toy3": ToyThreeLayer}


def build_model(name: str, image_size: int = 32, pretrained: bool = False):
    """Resolve a model name: builtin toys first, then the torchvision zoo."""
    if name in _BUILTIN:
        model = _BUILTIN[name](image_size=image_size)
        model.eval()
        return model
    try:
        from torchvision import models as tv_models
    except ImportError as exc:
        raise RuntimeError(f"model {name!r} needs torchvision, which is not "
                           "installed (pip install actexport[zoo])") from exc
    try:
        model = tv_models.get_model(name.lower(),
                                    weights="DEFAULT" if pretrained else None)
    except ValueError as exc:
        raise RuntimeError(f"unknown model name {name!r}") from exc
    model.eval()
    return model
