"""Synthetic dataset generator: shapes, determinism, and geometry."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dmadkit import (
    DataError,
    Label,
    Medium,
    NETWORKS,
    Role,
    SMALL_SCHEME,
    Split,
    SynthConfig,
    generate,
)
from conftest import SMALL_CONFIG


def by_role(manifest, role, split=None):
    return [
        e for e in manifest.entries
        if e.role is role and (split is None or e.split is split)
    ]


def test_default_shape_matches_published_counts():
    manifest, _ = generate(SynthConfig(seed=1, scheme=SMALL_SCHEME))
    assert len(by_role(manifest, Role.PROBE, Split.TRAIN)) == 840
    assert len(by_role(manifest, Role.PROBE, Split.TEST)) == 315
    # every subject and morph gets one document per medium
    train_docs = by_role(manifest, Role.DOCUMENT, Split.TRAIN)
    test_docs = by_role(manifest, Role.DOCUMENT, Split.TEST)
    assert len(train_docs) == (56 + 92) * 2
    assert len(test_docs) == (21 + 28) * 2
    assert sum(1 for e in train_docs if e.label is Label.MORPH) == 92 * 2


def test_probe_grid_is_complete(small_dataset):
    manifest, _ = small_dataset
    cells = {
        (e.subject_id, e.distance, e.camera)
        for e in by_role(manifest, Role.PROBE, Split.TRAIN)
    }
    subjects = {e.subject_id for e in by_role(manifest, Role.PROBE, Split.TRAIN)}
    assert len(cells) == len(subjects) * 3 * 5


def test_morph_contributors_are_distinct_same_split_subjects(small_dataset):
    manifest, _ = small_dataset
    split_subjects = {
        split: {
            e.subject_id
            for e in manifest.entries
            if e.role is Role.DOCUMENT and e.label is Label.BONAFIDE and e.split is split
        }
        for split in (Split.TRAIN, Split.TEST)
    }
    morphs = [e for e in manifest.entries if e.label is Label.MORPH]
    assert morphs
    for entry in morphs:
        a, b = entry.contributors
        assert a != b
        assert {a, b} <= split_subjects[entry.split]


def test_contributor_pairs_never_repeat(small_dataset):
    manifest, _ = small_dataset
    for split in (Split.TRAIN, Split.TEST):
        pairs = [
            tuple(sorted(e.contributors))
            for e in manifest.entries
            if e.label is Label.MORPH and e.split is split and e.medium is Medium.DIGITAL
        ]
        assert len(pairs) == len(set(pairs))


def test_determinism_by_seed():
    config = SynthConfig(
        seed=5, scheme=SMALL_SCHEME, subjects_train=4, subjects_test=3,
        morphs_train=3, morphs_test=2,
    )
    m1, e1 = generate(config)
    m2, e2 = generate(config)
    assert m1.entries == m2.entries
    for (sid, net, v1), (_, _, v2) in zip(e1.items(), e2.items()):
        assert v1.tobytes() == v2.tobytes()
    m3, e3 = generate(
        SynthConfig(
            seed=6, scheme=SMALL_SCHEME, subjects_train=4, subjects_test=3,
            morphs_train=3, morphs_test=2,
        )
    )
    assert any(
        v1.tobytes() != v3.tobytes()
        for (_, _, v1), (_, _, v3) in zip(e1.items(), e3.items())
    )


def test_all_vectors_unit_norm(small_dataset):
    _, embeddings = small_dataset
    for _, _, values in embeddings.items():
        assert abs(float(np.linalg.norm(values)) - 1.0) <= 1e-6


def test_widths_follow_scheme(small_dataset):
    _, embeddings = small_dataset
    dims = {net: values.shape[0] for _, net, values in embeddings.items()}
    for net in NETWORKS:
        assert dims[net] == SMALL_CONFIG.scheme.expected_dim(net)


ZERO_NOISE = SynthConfig(
    seed=2, scheme=SMALL_SCHEME, subjects_train=4, subjects_test=2,
    morphs_train=2, morphs_test=1, sigma_id=0.0, sigma_probe=0.0,
    sigma_printscan=0.0, printscan_mix=0.0,
)


def test_zero_noise_collapses_bonafide_differences():
    manifest, embeddings = generate(ZERO_NOISE)
    docs = {
        e.subject_id: e.sample_id
        for e in manifest.entries
        if e.role is Role.DOCUMENT and e.label is Label.BONAFIDE
    }
    probes = [e for e in manifest.entries if e.role is Role.PROBE]
    assert probes
    for entry in probes:
        doc_id = docs[entry.subject_id]
        for net in NETWORKS:
            doc_vec = embeddings.vector(doc_id, net)
            probe_vec = embeddings.vector(entry.sample_id, net)
            assert doc_vec.tobytes() == probe_vec.tobytes()


def test_zero_noise_morph_bisects_contributors():
    config = SynthConfig(
        seed=3, scheme=SMALL_SCHEME, subjects_train=4, subjects_test=2,
        morphs_train=2, morphs_test=1, sigma_id=0.0, morph_artifact=0.0,
    )
    manifest, embeddings = generate(config)
    docs = {
        (e.subject_id, e.medium): e.sample_id
        for e in manifest.entries
        if e.role is Role.DOCUMENT and e.label is Label.BONAFIDE
    }
    morphs = [
        e for e in manifest.entries
        if e.label is Label.MORPH and e.medium is Medium.DIGITAL
    ]
    for entry in morphs:
        a, b = entry.contributors
        for net in NETWORKS:
            morph_vec = embeddings.vector(entry.sample_id, net)
            va = embeddings.vector(docs[(a, Medium.DIGITAL)], net)
            vb = embeddings.vector(docs[(b, Medium.DIGITAL)], net)
            angle_a = math.acos(float(np.clip(morph_vec @ va, -1.0, 1.0)))
            angle_b = math.acos(float(np.clip(morph_vec @ vb, -1.0, 1.0)))
            assert math.isclose(angle_a, angle_b, abs_tol=1e-5)


def test_linear_morph_mode_differs_but_stays_unit():
    kwargs = dict(
        seed=4, scheme=SMALL_SCHEME, subjects_train=4, subjects_test=2,
        morphs_train=2, morphs_test=1,
    )
    _, spherical = generate(SynthConfig(morph_mode="spherical", **kwargs))
    manifest, linear = generate(SynthConfig(morph_mode="linear", **kwargs))
    morph_ids = [e.sample_id for e in manifest.entries if e.label is Label.MORPH]
    net = NETWORKS[0]
    assert any(
        spherical.vector(m, net).tobytes() != linear.vector(m, net).tobytes()
        for m in morph_ids
    )
    for m in morph_ids:
        assert abs(float(np.linalg.norm(linear.vector(m, net))) - 1.0) <= 1e-6


def test_generator_provenance_recorded(small_dataset):
    manifest, _ = small_dataset
    assert manifest.generator is not None
    assert f"seed={SMALL_CONFIG.seed}" in manifest.generator


def test_too_few_subjects_for_morphs():
    with pytest.raises(DataError):
        generate(
            SynthConfig(
                seed=1, scheme=SMALL_SCHEME, subjects_train=1, subjects_test=2,
                morphs_train=1, morphs_test=1,
            )
        )


def test_too_many_pairs_requested():
    with pytest.raises(DataError):
        generate(
            SynthConfig(
                seed=1, scheme=SMALL_SCHEME, subjects_train=3, subjects_test=3,
                morphs_train=4, morphs_test=1,
            )
        )


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(sigma_id=-0.1)
    with pytest.raises(ValueError):
        SynthConfig(printscan_mix=1.5)
    with pytest.raises(ValueError):
        SynthConfig(camera_noise=(1.0, 1.0))
    with pytest.raises(ValueError):
        SynthConfig(morph_mode="cubic")
