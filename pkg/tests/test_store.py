"""Embedding format, manifest validation, and pairing behaviour."""

from __future__ import annotations

import io
import json
import struct

import numpy as np
import pytest

from dmadkit import (
    DatasetManifest,
    DimScheme,
    EmbeddingDir,
    EmbeddingRecord,
    FormatError,
    Label,
    Medium,
    NetworkId,
    PairFilter,
    Role,
    SampleEntry,
    Split,
    ValidationError,
    build_pairs,
    diagnose_manifest,
    embedding_filename,
    load_manifest,
    parse_embedding_filename,
    read_embedding,
    save_manifest,
    validate_manifest,
    write_embedding,
)
from dmadkit.errors import DataError
from dmadkit.store import infer_scheme


def roundtrip(record, scheme=None):
    buf = io.BytesIO()
    write_embedding(record, buf, scheme=scheme)
    buf.seek(0)
    return buf, read_embedding(
        buf, sample_id=record.sample_id, network=record.network, scheme=scheme
    )


def test_emb1_layout_dim4():
    record = EmbeddingRecord("x", None, np.array([1.0, 0.0, 0.0, 0.0], dtype=np.float32))
    buf, back = roundtrip(record)
    raw = buf.getvalue()
    assert len(raw) == 25
    assert raw[:4] == b"EMB1"
    assert raw[4] == 0x01
    assert struct.unpack("<I", raw[5:9])[0] == 4
    assert back == record


def test_roundtrip_preserves_float32_bits():
    rng = np.random.default_rng(0)
    values = rng.standard_normal(37).astype(np.float32)
    record = EmbeddingRecord("probe-1", None, values)
    _, back = roundtrip(record)
    assert back.values.tobytes() == values.tobytes()


def test_wrong_width_for_network_rejected():
    record = EmbeddingRecord("s", NetworkId.VGG16, np.zeros(2048, dtype=np.float32))
    with pytest.raises(ValidationError, match="dimension mismatch"):
        write_embedding(record, io.BytesIO(), scheme=DimScheme())


def test_non_finite_value_rejected():
    values = np.array([1.0, np.nan, 2.0], dtype=np.float32)
    record = EmbeddingRecord("s", None, values)
    with pytest.raises(ValidationError, match="non-finite value"):
        write_embedding(record, io.BytesIO())


def test_bad_magic():
    with pytest.raises(FormatError, match="bad magic"):
        read_embedding(io.BytesIO(b"XXXX" + bytes(21)))


def test_unsupported_version():
    with pytest.raises(FormatError, match="unsupported format version"):
        read_embedding(io.BytesIO(b"EMB1" + bytes([9]) + struct.pack("<I", 1) + bytes(4)))


def test_truncated_payload():
    head = b"EMB1" + bytes([1]) + struct.pack("<I", 8)
    with pytest.raises(FormatError, match="truncated"):
        read_embedding(io.BytesIO(head + bytes(7 * 4)))


def test_truncated_header():
    with pytest.raises(FormatError, match="missing version byte"):
        read_embedding(io.BytesIO(b"EMB1"))
    with pytest.raises(FormatError, match="missing dimension field"):
        read_embedding(io.BytesIO(b"EMB1" + bytes([1]) + b"\x01\x00"))


def test_zero_dimension_rejected():
    with pytest.raises(FormatError, match="zero"):
        read_embedding(io.BytesIO(b"EMB1" + bytes([1]) + struct.pack("<I", 0)))


def test_filename_roundtrip():
    name = embedding_filename("doc-s001-dig", NetworkId.RESNET101)
    assert name == "doc-s001-dig.resnet101.emb"
    assert parse_embedding_filename(name) == ("doc-s001-dig", NetworkId.RESNET101)
    # sample ids may themselves contain dots
    sid, net = parse_embedding_filename("a.b.c.xception.emb")
    assert (sid, net) == ("a.b.c", NetworkId.XCEPTION)


def test_filename_rejects_unknown_network():
    with pytest.raises(FormatError):
        parse_embedding_filename("x.lenet.emb")
    with pytest.raises(FormatError):
        parse_embedding_filename("x.emb.txt")


def test_embedding_dir_roundtrip(tmp_path):
    store = EmbeddingDir(tmp_path, scheme=None)
    record = EmbeddingRecord("p1", NetworkId.ALEXNET, np.arange(6, dtype=np.float32))
    store.save(record)
    assert store.exists("p1", NetworkId.ALEXNET)
    assert not store.exists("p1", NetworkId.VGG16)
    assert store.load("p1", NetworkId.ALEXNET) == record
    assert np.array_equal(
        store.vector("p1", NetworkId.ALEXNET), np.arange(6, dtype=np.float32)
    )


def doc(sid, subject, label=Label.BONAFIDE, medium=Medium.DIGITAL, split=Split.TRAIN,
        contributors=None):
    return SampleEntry(
        sample_id=sid, subject_id=subject, role=Role.DOCUMENT, label=label,
        medium=medium, split=split, contributors=contributors,
    )


def probe(sid, subject, camera=1, distance=1, split=Split.TRAIN):
    return SampleEntry(
        sample_id=sid, subject_id=subject, role=Role.PROBE, label=Label.BONAFIDE,
        medium=Medium.DIGITAL, camera=camera, distance=distance, split=split,
    )


def test_single_subject_manifest_pairs():
    manifest = DatasetManifest(entries=[doc("d1", "alice"), probe("p1", "alice")])
    pairs = build_pairs(manifest, Split.TRAIN, PairFilter())
    assert len(pairs) == 1
    assert (pairs[0].document_id, pairs[0].probe_id) == ("d1", "p1")
    assert pairs[0].label is Label.BONAFIDE


def test_morph_pairs_with_missing_contributor_probes():
    # the morph blends a and b, but only c has probes: nothing to compare
    entries = [
        doc("d1", "a"),
        doc("m1", "a", label=Label.MORPH, contributors=("a", "b")),
        probe("p1", "c"),
    ]
    pairs = build_pairs(DatasetManifest(entries=entries), Split.TRAIN, PairFilter())
    assert pairs == []


def test_morph_pairs_against_both_contributors():
    entries = [
        doc("m1", "a", label=Label.MORPH, contributors=("a", "b")),
        probe("pa", "a"),
        probe("pb", "b"),
        probe("pc", "c"),
    ]
    pairs = build_pairs(DatasetManifest(entries=entries), Split.TRAIN, PairFilter())
    assert [(p.document_id, p.probe_id) for p in pairs] == [("m1", "pa"), ("m1", "pb")]
    assert all(p.label is Label.MORPH for p in pairs)


def test_pairs_are_sorted_and_filtered():
    entries = [
        doc("d2", "b"),
        doc("d1", "a"),
        probe("p2", "b", camera=2, distance=1),
        probe("p1", "a", camera=1, distance=1),
        probe("p3", "a", camera=1, distance=2),
    ]
    manifest = DatasetManifest(entries=entries)
    pairs = build_pairs(manifest, Split.TRAIN, PairFilter())
    assert [(p.document_id, p.probe_id) for p in pairs] == [
        ("d1", "p1"), ("d1", "p3"), ("d2", "p2")
    ]
    cell = build_pairs(manifest, Split.TRAIN, PairFilter(cameras=(1,), distances=(1,)))
    assert [(p.document_id, p.probe_id) for p in cell] == [("d1", "p1")]


def test_pair_filter_validates_ranges():
    with pytest.raises(DataError):
        PairFilter(cameras=(0,))
    with pytest.raises(DataError):
        PairFilter(distances=(4,))


def entry_map(findings):
    return {(f.code, f.sample_id) for f in findings}


def test_diagnostics_name_each_violation():
    entries = [
        doc("dup", "a"),
        doc("dup", "a"),
        SampleEntry(sample_id="d-cam", subject_id="a", role=Role.DOCUMENT,
                    label=Label.BONAFIDE, medium=Medium.DIGITAL, split=Split.TRAIN,
                    camera=1),
        SampleEntry(sample_id="p-none", subject_id="a", role=Role.PROBE,
                    label=Label.BONAFIDE, medium=Medium.DIGITAL, split=Split.TRAIN),
        SampleEntry(sample_id="p-cam9", subject_id="a", role=Role.PROBE,
                    label=Label.BONAFIDE, medium=Medium.DIGITAL, split=Split.TRAIN,
                    camera=9, distance=1),
        SampleEntry(sample_id="p-d9", subject_id="a", role=Role.PROBE,
                    label=Label.BONAFIDE, medium=Medium.DIGITAL, split=Split.TRAIN,
                    camera=1, distance=9),
        SampleEntry(sample_id="p-morph", subject_id="a", role=Role.PROBE,
                    label=Label.MORPH, medium=Medium.DIGITAL, split=Split.TRAIN,
                    camera=1, distance=1, contributors=("a", "b")),
        doc("m-alone", "a", label=Label.MORPH),
        doc("b-contrib", "a", contributors=("a", "b")),
        probe("p-orphan", "ghost"),
    ]
    findings = diagnose_manifest(DatasetManifest(entries=entries))
    seen = entry_map(findings)
    assert ("duplicate-sample-id", "dup") in seen
    assert ("document-capture-attrs", "d-cam") in seen
    assert ("probe-missing-capture-attrs", "p-none") in seen
    assert ("camera-out-of-range", "p-cam9") in seen
    assert ("distance-out-of-range", "p-d9") in seen
    assert ("probe-not-bonafide", "p-morph") in seen
    assert ("morph-missing-contributors", "m-alone") in seen
    assert ("contributors-on-bonafide", "b-contrib") in seen
    assert ("probe-without-document", "p-orphan") in seen


def test_clean_manifest_has_no_findings(small_dataset):
    manifest, _ = small_dataset
    assert diagnose_manifest(manifest) == []
    validate_manifest(manifest)


def test_validate_manifest_raises_with_all_findings():
    entries = [doc("dup", "a"), doc("dup", "a"), probe("p", "ghost")]
    with pytest.raises(ValidationError) as err:
        validate_manifest(DatasetManifest(entries=entries))
    assert "duplicate-sample-id" in str(err.value)
    assert len(err.value.diagnostics) >= 2


def test_diagnostic_str_names_the_sample():
    entries = [doc("a", "s"), doc("a", "s")]
    findings = diagnose_manifest(DatasetManifest(entries=entries))
    assert str(findings[0]) == "[duplicate-sample-id] a: sample_id appears more than once"


def test_manifest_json_roundtrip(tmp_path, small_dataset):
    manifest, _ = small_dataset
    path = tmp_path / "manifest.json"
    save_manifest(manifest, path)
    back = load_manifest(path)
    assert back.format_version == manifest.format_version
    assert back.entries == manifest.entries
    assert back.generator == manifest.generator


def test_manifest_serialization_shape(tmp_path):
    entries = [
        doc("m1", "a", label=Label.MORPH, contributors=("a", "b")),
        probe("p1", "a", camera=3, distance=2),
    ]
    path = tmp_path / "m.json"
    save_manifest(DatasetManifest(entries=entries), path)
    raw = json.loads(path.read_text())
    by_id = {e["sample_id"]: e for e in raw["entries"]}
    assert by_id["m1"]["contributors"] == ["a", "b"]
    assert "camera" not in by_id["m1"]
    assert by_id["p1"]["camera"] == 3
    assert by_id["p1"]["distance"] == 2
    assert "contributors" not in by_id["p1"]


def test_manifest_from_dict_rejects_garbage(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"format_version": 1, "entries": [{"sample_id": "x"}]}))
    with pytest.raises(FormatError):
        load_manifest(path)
    path.write_text("{not json")
    with pytest.raises(FormatError):
        load_manifest(path)


def test_infer_scheme_from_store(small_data_dir):
    manifest = load_manifest(small_data_dir / "manifest.json")
    store = EmbeddingDir(small_data_dir / "embeddings", scheme=None)
    scheme = infer_scheme(store, manifest)
    assert (scheme.g1, scheme.g2) == (64, 32)
