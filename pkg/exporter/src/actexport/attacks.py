"""Transferred-attack success tables.

Adversarial examples are crafted on each source model and evaluated on every
model in the list (including the source itself, giving the non-transferred
baseline rows). Success is the fraction of examples the target misclassifies
(non-targeted) or classifies as the chosen target label (targeted).

Identity, FGSM, and PGD run natively on torch; the remaining attack names
delegate to the Adversarial Robustness Toolbox when it is installed.
"""

import csv
import warnings
from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .hooks import synthetic_batch
from .models import build_model

ATTACK_CSV_HEADER = ["attack", "targeted", "box", "steps",
                     "source_network", "target_network", "success_rate"]


@dataclass(frozen=True)
class AttackInfo:
    box: str                 # "white" | "black"
    steps: str               # "single" | "multi"
    supports_targeted: bool
    backend: str             # "native" | "art"


ATTACKS = {
    "Identity": AttackInfo("black", "single", True, "native"),
    "FGSM": AttackInfo("white", "single", True, "native"),
    "PGD": AttackInfo("white", "multi", True, "native"),
    "AutoCG": AttackInfo("white", "multi", True, "art"),
    "C&W-L0": AttackInfo("white", "multi", True, "art"),
    "C&W-L2": AttackInfo("white", "multi", True, "art"),
    "DeepFool": AttackInfo("white", "multi", False, "art"),
    "SpatialTransformation": AttackInfo("black", "multi", False, "art"),
    "Square": AttackInfo("black", "multi", True, "art"),
    "Boundary": AttackInfo("black", "multi", True, "art"),
}

EPS = 8.0 / 255.0
PGD_STEPS = 10
PGD_STEP_SIZE = 2.0 / 255.0


def _fgsm(model, x, labels, targeted, eps=EPS):
    x = x.clone().requires_grad_(True)
    loss = F.cross_entropy(model(x), labels)
    (grad,) = torch.autograd.grad(loss, x)
    step = -eps if targeted else eps
    return (x + step * grad.sign()).detach()


def _pgd(model, x, labels, targeted, eps=EPS, steps=PGD_STEPS,
         step_size=PGD_STEP_SIZE):
    adv = x.clone()
    for _ in range(steps):
        adv.requires_grad_(True)
        loss = F.cross_entropy(model(adv), labels)
        (grad,) = torch.autograd.grad(loss, adv)
        direction = -step_size if targeted else step_size
        adv = adv.detach() + direction * grad.sign()
        adv = x + torch.clamp(adv - x, -eps, eps)
    return adv.detach()


def _art_attack(name, model, x, labels, targeted):
    try:
        from art.estimators.classification import PyTorchClassifier
    except ImportError as exc:
        raise RuntimeError(
            f"attack {name!r} needs the adversarial-robustness-toolbox "
            "package, which is not installed") from exc
    from art.attacks import evasion

    n_classes = model(x[:1]).shape[1]
    classifier = PyTorchClassifier(
        model=model, loss=torch.nn.CrossEntropyLoss(),
        input_shape=tuple(x.shape[1:]), nb_classes=n_classes)
    builders = {
        "AutoCG": lambda: evasion.AutoConjugateGradient(
            estimator=classifier, targeted=targeted),
        "C&W-L0": lambda: evasion.CarliniL0Method(
            classifier=classifier, targeted=targeted),
        "C&W-L2": lambda: evasion.CarliniL2Method(
            classifier=classifier, targeted=targeted),
        "DeepFool": lambda: evasion.DeepFool(classifier=classifier),
        "SpatialTransformation": lambda: evasion.SpatialTransformation(
            classifier=classifier),
        "Square": lambda: evasion.SquareAttack(estimator=classifier),
        "Boundary": lambda: evasion.BoundaryAttack(
            estimator=classifier, targeted=targeted),
    }
    attack = builders[name]()
    kwargs = {"y": labels.numpy()} if targeted else {}
    return torch.from_numpy(attack.generate(x=x.numpy(), **kwargs))


def generate_adversarial(name, model, x, labels, targeted):
    info = ATTACKS[name]
    if targeted and not info.supports_targeted:
        raise RuntimeError(f"attack {name!r} does not support targeted mode")
    if name == "Identity":
        return x.clone()
    if name == "FGSM":
        return _fgsm(model, x, labels, targeted)
    if name == "PGD":
        return _pgd(model, x, labels, targeted)
    return _art_attack(name, model, x, labels, targeted)


def _predict(model, x):
    with torch.no_grad():
        return model(x).argmax(dim=1)


def export_attack_results(model_names, attack_names, n_images,
                          targeted=False, image_size=32, seed=0,
                          pretrained=False):
    """CSV-shaped rows for every (attack, source, target) combination.

    Synthetic-noise inputs with random nominal labels; per-row failures
    (unsupported mode, missing backend) are warned about and omitted.
    """
    unknown = [a for a in attack_names if a not in ATTACKS]
    if unknown:
        raise ValueError(f"unsupported attacks: {unknown}; supported: "
                         f"{sorted(ATTACKS)}")
    if n_images < 1:
        raise ValueError("need at least 1 image")
    torch.manual_seed(seed)  # deterministic weight init, in model_names order
    models = {name: build_model(name, image_size, pretrained)
              for name in model_names}
    x = synthetic_batch(n_images, image_size, seed)
    gen = torch.Generator().manual_seed(seed + 1)
    n_classes = models[model_names[0]](x[:1]).shape[1]
    labels = torch.randint(0, n_classes, (n_images,), generator=gen)
    target_labels = (labels + 1) % n_classes
    rows = []
    for attack in attack_names:
        info = ATTACKS[attack]
        attack_labels = target_labels if targeted else labels
        for source in model_names:
            try:
                adv = generate_adversarial(attack, models[source], x,
                                           attack_labels, targeted)
            except RuntimeError as exc:
                warnings.warn(f"{attack} on {source}: {exc}; rows omitted")
                continue
            for target in model_names:
                predictions = _predict(models[target], adv)
                if targeted:
                    success = float((predictions == target_labels).float().mean())
                else:
                    success = float((predictions != labels).float().mean())
                rows.append({
                    "attack": attack,
                    "targeted": "true" if targeted else "false",
                    "box": info.box,
                    "steps": info.steps,
                    "source_network": source,
                    "target_network": target,
                    "success_rate": repr(success),
                })
    return rows


def write_rows(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=ATTACK_CSV_HEADER)
        writer.writeheader()
        writer.writerows(rows)
