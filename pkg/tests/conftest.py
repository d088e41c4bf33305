"""Shared fixtures: one small synthetic dataset, generated once."""

from __future__ import annotations

import pytest

from dmadkit import (
    Medium,
    PairFilter,
    PipelineConfig,
    SMALL_SCHEME,
    SynthConfig,
    TrainConfig,
    generate,
    train_dmad,
    write_dataset,
)

SMALL_CONFIG = SynthConfig(
    seed=11,
    scheme=SMALL_SCHEME,
    subjects_train=16,
    subjects_test=8,
    morphs_train=24,
    morphs_test=10,
)

FAST_TRAIN = TrainConfig(epochs=40, seed=3)


@pytest.fixture(scope="session")
def small_dataset():
    """Manifest plus in-memory embeddings at reduced dims and counts."""
    return generate(SMALL_CONFIG)


@pytest.fixture(scope="session")
def small_data_dir(tmp_path_factory, small_dataset):
    manifest, embeddings = small_dataset
    root = tmp_path_factory.mktemp("synth") / "data"
    write_dataset(manifest, embeddings, root, scheme=SMALL_CONFIG.scheme)
    return root


@pytest.fixture(scope="session")
def digital_model(small_dataset):
    """Detector trained on the digital/digital slice of the small set."""
    manifest, embeddings = small_dataset
    train_filter = PairFilter(doc_medium=Medium.DIGITAL)
    return train_dmad(
        manifest,
        embeddings,
        train_filter,
        PipelineConfig(train=FAST_TRAIN),
    )
