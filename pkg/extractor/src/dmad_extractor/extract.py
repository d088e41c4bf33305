"""Batch extraction of embeddings from an image directory.

Walks the input directory, runs every requested network over every image,
and writes one EMB1 file per (image, network) plus an ``extraction.json``
fragment describing exactly how the vectors were produced. Sample ids are
the image filename stems; embedding files land in ``<output>/embeddings/``
so the directory can be completed into a full dataset by adding a
``manifest.json`` with roles and labels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .emb1 import embedding_filename, write_embedding
from .errors import ExtractorError, ImageReadError
from .networks import NETWORKS, SPECS, build_network

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".webp")


@dataclass(frozen=True)
class ExtractorConfig:
    input_dir: Path
    output_dir: Path
    networks: tuple[str, ...] = NETWORKS
    pretrained: bool = True
    seed: int = 0
    batch_size: int = 8
    device: str = "cpu"

    def __post_init__(self):
        unknown = [n for n in self.networks if n not in SPECS]
        if unknown:
            raise ValueError(f"unknown networks: {unknown}, expected from {NETWORKS}")
        if not self.networks:
            raise ValueError("at least one network is required")
        if len(set(self.networks)) != len(self.networks):
            raise ValueError("networks must be unique")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")


@dataclass
class ExtractionResult:
    embedding_dir: Path
    fragment_path: Path
    files: list[Path] = field(default_factory=list)


def _list_images(input_dir: Path) -> list[Path]:
    if not input_dir.is_dir():
        raise ExtractorError(f"input directory not found: {input_dir}")
    images = sorted(
        p for p in input_dir.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not images:
        raise ExtractorError(
            f"no images in {input_dir} (looked for {', '.join(IMAGE_SUFFIXES)})"
        )
    stems: dict[str, Path] = {}
    for path in images:
        if path.stem in stems:
            raise ExtractorError(
                f"sample id collision: {stems[path.stem].name} and {path.name}"
            )
        stems[path.stem] = path
    return images


def _load_image(path: Path) -> Image.Image:
    try:
        with Image.open(path) as img:
            return img.convert("RGB")
    except (UnidentifiedImageError, OSError) as exc:
        raise ImageReadError(f"unreadable image {path}: {exc}") from exc


def extract(config: ExtractorConfig) -> ExtractionResult:
    """Run the configured networks and write EMB1 files plus the fragment."""
    images = _list_images(config.input_dir)
    device = torch.device(config.device)
    embedding_dir = config.output_dir / "embeddings"
    embedding_dir.mkdir(parents=True, exist_ok=True)

    result = ExtractionResult(
        embedding_dir=embedding_dir,
        fragment_path=config.output_dir / "extraction.json",
    )
    for name in config.networks:
        spec = SPECS[name]
        model = build_network(name, pretrained=config.pretrained, seed=config.seed)
        model.to(device)
        for start in range(0, len(images), config.batch_size):
            batch_paths = images[start:start + config.batch_size]
            batch = torch.stack(
                [spec.preprocess(_load_image(p)) for p in batch_paths]
            ).to(device)
            with torch.no_grad():
                features = model(batch).cpu().numpy()
            if features.ndim != 2 or features.shape[1] != spec.width:
                raise ExtractorError(
                    f"dimension mismatch after extraction: {name} produced "
                    f"{features.shape[1:]} instead of ({spec.width},)"
                )
            for path, row in zip(batch_paths, features):
                out = embedding_dir / embedding_filename(path.stem, name)
                write_embedding(out, np.asarray(row, dtype=np.float32))
                result.files.append(out)

    fragment = {
        "format_version": 1,
        "weights": "imagenet-pretrained" if config.pretrained
        else f"seeded-random seed={config.seed}",
        "networks": list(config.networks),
        "preprocessing": {
            name: SPECS[name].preprocessing_note() for name in config.networks
        },
        "samples": [
            {"sample_id": p.stem, "source": p.name} for p in images
        ],
    }
    result.fragment_path.write_text(json.dumps(fragment, indent=2) + "\n")
    return result
