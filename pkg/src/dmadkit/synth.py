"""Synthetic embedding generator with the capture-grid dataset shape.

Each subject gets one random unit identity vector per network. Documents
sit near the identity, probes sit near it with camera- and
distance-scaled noise, and morph documents sit near the spherical
midpoint of their two contributors, so a morph is roughly equidistant
from both and measurably farther from each than that subject's own
document. Print-scanned documents are re-digitized copies: the digital
vector mixed with a fixed signed permutation of itself plus extra noise.

Morph documents additionally carry a fixed per-network artifact
component (``morph_artifact`` times a random unit direction drawn once
per network). Identities are isotropic, so without such a consistent
direction the bonafide/morph distinction lives purely in difference
norms, which no linear classifier can generalize across disjoint
subject sets; the artifact plays the role of the consistent
feature-space traces that morphing pipelines leave in practice. Setting
it to zero yields the pure hypersphere geometry.

All noise magnitudes are vector norms on the unit sphere (the random
direction is normalized before scaling), which keeps separability
independent of the embedding width.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import DataError
from .fusion import SlerpConfig, slerp
from .networks import CANONICAL_SCHEME, DimScheme, NETWORKS
from .store import (
    DatasetManifest,
    InMemoryEmbeddings,
    Label,
    Medium,
    Role,
    SampleEntry,
    Split,
    save_manifest,
)

# Noise multiplier per camera, anti-proportional to line resolution so the
# lowest-resolution camera (3) is the noisiest and camera 1 the cleanest.
CAMERA_NOISE = (1.0, 1.125, 1.543, 1.174, 1.125)

# Noise multiplier per standoff distance; 1 is the farthest capture.
DISTANCE_NOISE = (2.0, 1.5, 1.0)


@dataclass(frozen=True)
class SynthConfig:
    """Shape and noise parameters of one synthetic dataset."""

    seed: int = 0
    scheme: DimScheme = CANONICAL_SCHEME
    subjects_train: int = 56
    subjects_test: int = 21
    morphs_train: int = 92
    morphs_test: int = 28
    sigma_id: float = 0.02
    sigma_probe: float = 0.05
    sigma_printscan: float = 0.02
    printscan_mix: float = 0.10
    morph_artifact: float = 0.4
    camera_noise: tuple[float, ...] = CAMERA_NOISE
    distance_noise: tuple[float, ...] = DISTANCE_NOISE
    morph_mode: str = "spherical"

    def __post_init__(self) -> None:
        if min(self.subjects_train, self.subjects_test) < 1:
            raise ValueError("each split needs at least one subject")
        if min(self.morphs_train, self.morphs_test) < 0:
            raise ValueError("morph counts cannot be negative")
        for name in ("sigma_id", "sigma_probe", "sigma_printscan", "morph_artifact"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} cannot be negative")
        if not 0.0 <= self.printscan_mix <= 1.0:
            raise ValueError("printscan_mix must lie in [0, 1]")
        if len(self.camera_noise) != 5 or len(self.distance_noise) != 3:
            raise ValueError("need 5 camera factors and 3 distance factors")
        if min(self.camera_noise) <= 0 or min(self.distance_noise) <= 0:
            raise ValueError("noise factors must be positive")
        if self.morph_mode not in ("spherical", "linear"):
            raise ValueError(f"unknown morph_mode '{self.morph_mode}'")


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    n = np.linalg.norm(v)
    while n == 0.0:  # essentially impossible, but a zero draw must not escape
        v = rng.standard_normal(dim)
        n = np.linalg.norm(v)
    return v / n


def _normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise DataError("degenerate zero vector while generating embeddings")
    return v / n


def _sample_contributor_pairs(
    rng: np.random.Generator, subjects: list[str], count: int
) -> list[tuple[str, str]]:
    if count == 0:
        return []
    if len(subjects) < 2:
        raise DataError("morphs need at least two subjects to contribute")
    all_pairs = list(combinations(subjects, 2))
    if count > len(all_pairs):
        raise DataError(
            f"cannot draw {count} distinct contributor pairs from {len(subjects)} subjects"
        )
    chosen = rng.choice(len(all_pairs), size=count, replace=False)
    return [all_pairs[int(k)] for k in chosen]


def generate(config: SynthConfig = SynthConfig()) -> tuple[DatasetManifest, InMemoryEmbeddings]:
    """Build the manifest and all embeddings for one synthetic dataset.

    The same seed and config reproduce the dataset exactly, including
    the contributor pairs, which are drawn once and shared by every
    network so the manifest stays consistent.
    """
    rng = np.random.default_rng(config.seed)

    train_subjects = [f"s{k:03d}" for k in range(1, config.subjects_train + 1)]
    test_subjects = [
        f"s{k:03d}"
        for k in range(config.subjects_train + 1, config.subjects_train + config.subjects_test + 1)
    ]
    pairs = {
        Split.TRAIN: _sample_contributor_pairs(rng, train_subjects, config.morphs_train),
        Split.TEST: _sample_contributor_pairs(rng, test_subjects, config.morphs_test),
    }
    morph_ids = {
        Split.TRAIN: [f"m{k:03d}" for k in range(1, config.morphs_train + 1)],
        Split.TEST: [
            f"m{k:03d}"
            for k in range(config.morphs_train + 1, config.morphs_train + config.morphs_test + 1)
        ],
    }

    manifest = DatasetManifest(generator=(
        f"synth seed={config.seed} dims={config.scheme.g1}/{config.scheme.g2} "
        f"sigma_id={config.sigma_id} sigma_probe={config.sigma_probe} "
        f"morph_artifact={config.morph_artifact} morph_mode={config.morph_mode}"
    ))
    for split, subjects in ((Split.TRAIN, train_subjects), (Split.TEST, test_subjects)):
        for subject in subjects:
            for medium, tag in ((Medium.DIGITAL, "dig"), (Medium.PRINTSCAN, "ps")):
                manifest.entries.append(SampleEntry(
                    sample_id=f"doc-{subject}-{tag}",
                    subject_id=subject,
                    role=Role.DOCUMENT,
                    label=Label.BONAFIDE,
                    medium=medium,
                    split=split,
                ))
        for morph_id, (left, right) in zip(morph_ids[split], pairs[split]):
            for medium, tag in ((Medium.DIGITAL, "dig"), (Medium.PRINTSCAN, "ps")):
                manifest.entries.append(SampleEntry(
                    sample_id=f"doc-{morph_id}-{tag}",
                    subject_id=morph_id,
                    role=Role.DOCUMENT,
                    label=Label.MORPH,
                    medium=medium,
                    split=split,
                    contributors=(left, right),
                ))
        for subject in subjects:
            for distance in (1, 2, 3):
                for camera in (1, 2, 3, 4, 5):
                    manifest.entries.append(SampleEntry(
                        sample_id=f"prb-{subject}-d{distance}-c{camera}",
                        subject_id=subject,
                        role=Role.PROBE,
                        label=Label.BONAFIDE,
                        medium=Medium.DIGITAL,
                        split=split,
                        camera=camera,
                        distance=distance,
                    ))

    embeddings = InMemoryEmbeddings()
    midpoint = SlerpConfig(t=0.5)
    for network in NETWORKS:
        dim = config.scheme.expected_dim(network)
        signs = rng.choice((-1.0, 1.0), size=dim)
        perm = rng.permutation(dim)
        artifact = _unit(rng, dim)

        def redigitize(v: np.ndarray) -> np.ndarray:
            mixed = (1.0 - config.printscan_mix) * v + config.printscan_mix * (signs * v[perm])
            return _normalize(mixed + config.sigma_printscan * _unit(rng, dim))

        identities: dict[str, np.ndarray] = {}
        for subject in train_subjects + test_subjects:
            identities[subject] = _unit(rng, dim)

        for split, subjects in ((Split.TRAIN, train_subjects), (Split.TEST, test_subjects)):
            for subject in subjects:
                digital = _normalize(
                    identities[subject] + config.sigma_id * _unit(rng, dim)
                )
                embeddings.put(f"doc-{subject}-dig", network, digital)
                embeddings.put(f"doc-{subject}-ps", network, redigitize(digital))
            for morph_id, (left, right) in zip(morph_ids[split], pairs[split]):
                if config.morph_mode == "spherical":
                    core = slerp(identities[left], identities[right], midpoint)
                else:
                    core = 0.5 * (identities[left] + identities[right])
                core = core + config.morph_artifact * artifact
                digital = _normalize(core + config.sigma_id * _unit(rng, dim))
                embeddings.put(f"doc-{morph_id}-dig", network, digital)
                embeddings.put(f"doc-{morph_id}-ps", network, redigitize(digital))
            for subject in subjects:
                for distance in (1, 2, 3):
                    for camera in (1, 2, 3, 4, 5):
                        sigma = (
                            config.sigma_probe
                            * config.camera_noise[camera - 1]
                            * config.distance_noise[distance - 1]
                        )
                        probe = _normalize(
                            identities[subject] + sigma * _unit(rng, dim)
                        )
                        embeddings.put(
                            f"prb-{subject}-d{distance}-c{camera}", network, probe
                        )

    return manifest, embeddings


def write_dataset(
    manifest: DatasetManifest,
    embeddings: InMemoryEmbeddings,
    out_dir: str | Path,
    *,
    scheme: DimScheme | None = None,
) -> None:
    """Write manifest.json plus an embeddings/ directory of EMB1 files."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_manifest(manifest, out / "manifest.json")
    store_root = out / "embeddings"
    store_root.mkdir(exist_ok=True)
    embeddings.save_dir(store_root, scheme=scheme)
