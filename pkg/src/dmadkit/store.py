"""Embedding interchange format, dataset manifest, and pair construction.

An embedding travels as a tiny binary record (EMB1): magic ``EMB1``, a
version byte, the dimension as a little-endian uint32, then that many
little-endian float32 values. The record body carries no identity; the
(sample_id, network) identity lives in the filename,
``<sample_id>.<network>.emb``.

Dataset composition lives in a JSON manifest listing one entry per
sample. Pairing walks that manifest: each document meets every probe
whose subject it claims, where a bonafide document claims its own
subject and a morph claims each listed contributor.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Protocol

import numpy as np

from .errors import DataError, FormatError, ValidationError
from .networks import CANONICAL_SCHEME, DimScheme, Group, NetworkId, parse_network

EMB1_MAGIC = b"EMB1"
EMB1_VERSION = 1
MANIFEST_FORMAT_VERSION = 1

CAMERAS = (1, 2, 3, 4, 5)
DISTANCES = (1, 2, 3)


class Role(str, Enum):
    DOCUMENT = "document"
    PROBE = "probe"


class Label(str, Enum):
    BONAFIDE = "bonafide"
    MORPH = "morph"


class Medium(str, Enum):
    DIGITAL = "digital"
    PRINTSCAN = "printscan"


class Split(str, Enum):
    TRAIN = "train"
    TEST = "test"


# ---------------------------------------------------------------------------
# Embedding records


@dataclass(frozen=True, eq=False)
class EmbeddingRecord:
    """One feature vector for one (sample, network).

    ``values`` is always stored as a 1-D float32 array; ``network`` may be
    None for records read from a bare stream whose identity is unknown.
    """

    sample_id: str
    network: NetworkId | None
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float32)
        if arr.ndim != 1:
            raise ValidationError(f"embedding values must be 1-D, got shape {arr.shape}")
        object.__setattr__(self, "values", arr)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def validate(self, scheme: DimScheme | None = CANONICAL_SCHEME) -> None:
        """Check finiteness and, when a scheme and network are known, width."""
        if self.dim == 0:
            raise ValidationError(f"embedding '{self.sample_id}' is empty")
        if not np.isfinite(self.values).all():
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise ValidationError(
                f"non-finite value at index {bad} in embedding '{self.sample_id}'"
            )
        if scheme is not None and self.network is not None:
            expected = scheme.expected_dim(self.network)
            if self.dim != expected:
                raise ValidationError(
                    f"dimension mismatch for '{self.sample_id}' ({self.network}): "
                    f"got {self.dim}, expected {expected}"
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (
            self.sample_id == other.sample_id
            and self.network == other.network
            and self.values.shape == other.values.shape
            and self.values.tobytes() == other.values.tobytes()
        )


def write_embedding(
    record: EmbeddingRecord,
    destination: BinaryIO,
    *,
    scheme: DimScheme | None = CANONICAL_SCHEME,
) -> None:
    """Serialize one record to a binary stream in EMB1 layout."""
    record.validate(scheme)
    destination.write(EMB1_MAGIC)
    destination.write(bytes([EMB1_VERSION]))
    destination.write(struct.pack("<I", record.dim))
    destination.write(record.values.astype("<f4", copy=False).tobytes())


def read_embedding(
    source: BinaryIO,
    *,
    sample_id: str = "",
    network: NetworkId | None = None,
    scheme: DimScheme | None = CANONICAL_SCHEME,
) -> EmbeddingRecord:
    """Parse one EMB1 record from a binary stream.

    Identity is not part of the stream, so callers that know it (for
    example from the filename) pass it in; the width check runs only when
    both a network and a scheme are supplied.
    """
    magic = source.read(len(EMB1_MAGIC))
    if magic != EMB1_MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {EMB1_MAGIC!r}")
    version = source.read(1)
    if len(version) != 1:
        raise FormatError("truncated stream: missing version byte")
    if version[0] != EMB1_VERSION:
        raise FormatError(f"unsupported format version {version[0]}")
    dim_raw = source.read(4)
    if len(dim_raw) != 4:
        raise FormatError("truncated stream: missing dimension field")
    dim = struct.unpack("<I", dim_raw)[0]
    if dim == 0:
        raise FormatError("declared dimension is zero")
    payload = source.read(4 * dim)
    if len(payload) != 4 * dim:
        raise FormatError(
            f"truncated stream: declared {dim} values, payload holds {len(payload) // 4}"
        )
    values = np.frombuffer(payload, dtype="<f4").copy()
    record = EmbeddingRecord(sample_id=sample_id, network=network, values=values)
    record.validate(scheme)
    return record


def embedding_filename(sample_id: str, network: NetworkId) -> str:
    return f"{sample_id}.{network.value}.emb"


def parse_embedding_filename(name: str) -> tuple[str, NetworkId]:
    """Recover (sample_id, network) from ``<sample_id>.<network>.emb``."""
    stem, dot, suffix = name.rpartition(".emb")
    if not dot or suffix:
        raise FormatError(f"not an embedding filename: '{name}'")
    sample_id, dot, net_name = stem.rpartition(".")
    if not dot:
        raise FormatError(f"embedding filename lacks a network segment: '{name}'")
    try:
        network = parse_network(net_name)
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return sample_id, network


class EmbeddingProvider(Protocol):
    """Anything that can hand back the vector for a (sample, network)."""

    def vector(self, sample_id: str, network: NetworkId) -> np.ndarray: ...


class EmbeddingDir:
    """Directory of one EMB1 file per (sample, network).

    ``scheme=None`` (the default) skips width checks on load, so the same
    reader serves canonical and reduced datasets; pass a scheme to
    enforce widths. ``cache=True`` keeps loaded vectors in memory, which
    pays off when evaluation protocols revisit the same documents across
    many runs.
    """

    def __init__(
        self,
        root: str | Path,
        *,
        scheme: DimScheme | None = None,
        cache: bool = False,
    ):
        self.root = Path(root)
        self.scheme = scheme
        self._cache: dict[tuple[str, NetworkId], np.ndarray] | None = {} if cache else None

    def path_for(self, sample_id: str, network: NetworkId) -> Path:
        return self.root / embedding_filename(sample_id, network)

    def save(self, record: EmbeddingRecord) -> Path:
        if record.network is None:
            raise DataError(f"record '{record.sample_id}' has no network, cannot name its file")
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.path_for(record.sample_id, record.network)
        with open(path, "wb") as fh:
            write_embedding(record, fh, scheme=self.scheme)
        return path

    def load(self, sample_id: str, network: NetworkId) -> EmbeddingRecord:
        path = self.path_for(sample_id, network)
        if not path.exists():
            raise DataError(f"missing embedding file: {path.name}")
        with open(path, "rb") as fh:
            return read_embedding(
                fh, sample_id=sample_id, network=network, scheme=self.scheme
            )

    def vector(self, sample_id: str, network: NetworkId) -> np.ndarray:
        if self._cache is not None:
            key = (sample_id, network)
            hit = self._cache.get(key)
            if hit is None:
                hit = self.load(sample_id, network).values
                self._cache[key] = hit
            return hit
        return self.load(sample_id, network).values

    def exists(self, sample_id: str, network: NetworkId) -> bool:
        return self.path_for(sample_id, network).exists()


class InMemoryEmbeddings:
    """Dict-backed embedding provider, used by the synthetic generator."""

    def __init__(self) -> None:
        self._data: dict[tuple[str, NetworkId], np.ndarray] = {}

    def put(self, sample_id: str, network: NetworkId, values: np.ndarray) -> None:
        self._data[(sample_id, network)] = np.asarray(values, dtype=np.float32)

    def vector(self, sample_id: str, network: NetworkId) -> np.ndarray:
        try:
            return self._data[(sample_id, network)]
        except KeyError:
            raise DataError(f"no embedding stored for ('{sample_id}', '{network}')") from None

    def items(self) -> Iterator[tuple[str, NetworkId, np.ndarray]]:
        for (sample_id, network), values in sorted(
            self._data.items(), key=lambda kv: (kv[0][0], kv[0][1].value)
        ):
            yield sample_id, network, values

    def save_dir(self, root: str | Path, *, scheme: DimScheme | None = None) -> None:
        store = EmbeddingDir(root, scheme=scheme)
        for sample_id, network, values in self.items():
            store.save(EmbeddingRecord(sample_id, network, values))

    def __len__(self) -> int:
        return len(self._data)


# ---------------------------------------------------------------------------
# Manifest


@dataclass(frozen=True)
class SampleEntry:
    """One sample row in the dataset manifest.

    Documents never carry capture attributes; probes always carry a
    camera (1..5) and a distance (1..3). Morph documents list two or
    more contributing subjects, and pairing matches probes against that
    list rather than against the synthetic subject_id of the morph.
    """

    sample_id: str
    subject_id: str
    role: Role
    label: Label
    medium: Medium
    split: Split
    camera: int | None = None
    distance: int | None = None
    contributors: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out: dict = {
            "sample_id": self.sample_id,
            "subject_id": self.subject_id,
            "role": self.role.value,
            "label": self.label.value,
            "medium": self.medium.value,
            "split": self.split.value,
        }
        if self.camera is not None:
            out["camera"] = self.camera
        if self.distance is not None:
            out["distance"] = self.distance
        if self.label is Label.MORPH:
            out["contributors"] = list(self.contributors)
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "SampleEntry":
        try:
            return cls(
                sample_id=str(raw["sample_id"]),
                subject_id=str(raw["subject_id"]),
                role=Role(raw["role"]),
                label=Label(raw["label"]),
                medium=Medium(raw["medium"]),
                split=Split(raw["split"]),
                camera=raw.get("camera"),
                distance=raw.get("distance"),
                contributors=tuple(raw.get("contributors", ())),
            )
        except KeyError as exc:
            raise FormatError(f"manifest entry missing field {exc}") from None
        except ValueError as exc:
            raise FormatError(f"manifest entry invalid: {exc}") from None


@dataclass
class DatasetManifest:
    entries: list[SampleEntry] = field(default_factory=list)
    format_version: int = MANIFEST_FORMAT_VERSION
    generator: str | None = None

    def to_dict(self) -> dict:
        out: dict = {
            "format_version": self.format_version,
            "entries": [e.to_dict() for e in self.entries],
        }
        if self.generator is not None:
            out["generator"] = self.generator
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "DatasetManifest":
        if not isinstance(raw, dict) or "entries" not in raw:
            raise FormatError("manifest JSON must be an object with an 'entries' array")
        version = raw.get("format_version", MANIFEST_FORMAT_VERSION)
        if version != MANIFEST_FORMAT_VERSION:
            raise FormatError(f"unsupported manifest format_version {version}")
        entries = [SampleEntry.from_dict(e) for e in raw["entries"]]
        return cls(entries=entries, format_version=version, generator=raw.get("generator"))

    def by_id(self) -> dict[str, SampleEntry]:
        return {e.sample_id: e for e in self.entries}

    def documents(self, split: Split | None = None) -> list[SampleEntry]:
        return [
            e
            for e in self.entries
            if e.role is Role.DOCUMENT and (split is None or e.split is split)
        ]

    def probes(self, split: Split | None = None) -> list[SampleEntry]:
        return [
            e
            for e in self.entries
            if e.role is Role.PROBE and (split is None or e.split is split)
        ]


def save_manifest(manifest: DatasetManifest, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest.to_dict(), fh, indent=2, sort_keys=False)
        fh.write("\n")


def load_manifest(path: str | Path) -> DatasetManifest:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise DataError(f"manifest not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"manifest is not valid JSON: {exc}") from None
    return DatasetManifest.from_dict(raw)


@dataclass(frozen=True)
class Diagnostic:
    """One named validation finding, tied to the sample that caused it."""

    code: str
    message: str
    sample_id: str | None = None

    def __str__(self) -> str:
        prefix = f"[{self.code}]"
        if self.sample_id is not None:
            prefix += f" {self.sample_id}:"
        return f"{prefix} {self.message}"


def diagnose_manifest(manifest: DatasetManifest) -> list[Diagnostic]:
    """Collect every invariant violation in the manifest.

    Returns an empty list for a healthy manifest. Checks, per entry:
    unique ids, capture attributes present exactly on probes and within
    range, probes bonafide, contributor lists present exactly on morphs
    with at least two distinct subjects. Cross-entry: every probed
    subject has a document in the same split.
    """
    findings: list[Diagnostic] = []
    seen: set[str] = set()
    doc_subjects: dict[Split, set[str]] = {s: set() for s in Split}

    for entry in manifest.entries:
        sid = entry.sample_id
        if sid in seen:
            findings.append(Diagnostic("duplicate-sample-id", "sample_id appears more than once", sid))
        seen.add(sid)

        if entry.role is Role.DOCUMENT:
            doc_subjects[entry.split].add(entry.subject_id)
            if entry.camera is not None or entry.distance is not None:
                findings.append(
                    Diagnostic("document-capture-attrs", "documents must not carry camera/distance", sid)
                )
        else:
            if entry.camera is None or entry.distance is None:
                findings.append(
                    Diagnostic("probe-missing-capture-attrs", "probes must carry camera and distance", sid)
                )
            if entry.camera is not None and entry.camera not in CAMERAS:
                findings.append(
                    Diagnostic("camera-out-of-range", f"camera {entry.camera} outside {CAMERAS}", sid)
                )
            if entry.distance is not None and entry.distance not in DISTANCES:
                findings.append(
                    Diagnostic("distance-out-of-range", f"distance {entry.distance} outside {DISTANCES}", sid)
                )
            if entry.label is not Label.BONAFIDE:
                findings.append(
                    Diagnostic("probe-not-bonafide", "probes are live captures and must be bonafide", sid)
                )

        if entry.label is Label.MORPH:
            if len(set(entry.contributors or ())) < 2:
                findings.append(
                    Diagnostic(
                        "morph-missing-contributors",
                        "morph entries need at least two distinct contributors",
                        sid,
                    )
                )
        elif entry.contributors:
            findings.append(
                Diagnostic("contributors-on-bonafide", "only morph entries may list contributors", sid)
            )

    for entry in manifest.entries:
        if entry.role is Role.PROBE and entry.subject_id not in doc_subjects[entry.split]:
            findings.append(
                Diagnostic(
                    "probe-without-document",
                    f"no {entry.split.value} document for subject '{entry.subject_id}'",
                    entry.sample_id,
                )
            )
    return findings


def validate_manifest(manifest: DatasetManifest) -> None:
    """Raise ValidationError listing every finding, or return quietly."""
    findings = diagnose_manifest(manifest)
    if findings:
        lines = "\n".join(str(f) for f in findings)
        raise ValidationError(
            f"manifest failed validation with {len(findings)} finding(s):\n{lines}",
            diagnostics=findings,
        )


# ---------------------------------------------------------------------------
# Pairing


@dataclass(frozen=True)
class PairFilter:
    """Attribute predicate applied while pairing documents with probes.

    ``doc_medium`` constrains the document side and ``probe_medium`` the
    probe side (live captures are digital in practice, so the latter is
    rarely set); ``cameras`` and ``distances`` constrain the probe's
    capture cell. None leaves an attribute unconstrained.
    """

    doc_medium: Medium | None = None
    probe_medium: Medium | None = None
    cameras: tuple[int, ...] | None = None
    distances: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        for cam in self.cameras or ():
            if cam not in CAMERAS:
                raise DataError(f"invalid camera {cam}, expected one of {CAMERAS}")
        for dist in self.distances or ():
            if dist not in DISTANCES:
                raise DataError(f"invalid distance {dist}, expected one of {DISTANCES}")

    def admits_document(self, entry: SampleEntry) -> bool:
        return self.doc_medium is None or entry.medium is self.doc_medium

    def admits_probe(self, entry: SampleEntry) -> bool:
        if self.probe_medium is not None and entry.medium is not self.probe_medium:
            return False
        if self.cameras is not None and entry.camera not in self.cameras:
            return False
        if self.distances is not None and entry.distance not in self.distances:
            return False
        return True


@dataclass(frozen=True)
class EvaluationPair:
    """A (document, probe) comparison; the label follows the document."""

    document_id: str
    probe_id: str
    label: Label


def build_pairs(
    manifest: DatasetManifest,
    split: Split,
    pair_filter: PairFilter = PairFilter(),
) -> list[EvaluationPair]:
    """Enumerate every admissible document/probe comparison in a split.

    A bonafide document meets the probes of its own subject; a morph
    document meets the probes of every contributor, so each morph is
    attacked once per contributor probe. Output is sorted by
    (document_id, probe_id) for reproducibility.
    """
    documents = [
        e
        for e in manifest.documents(split)
        if pair_filter.admits_document(e)
    ]
    probes_by_subject: dict[str, list[SampleEntry]] = {}
    for probe in manifest.probes(split):
        if pair_filter.admits_probe(probe):
            probes_by_subject.setdefault(probe.subject_id, []).append(probe)

    pairs: list[EvaluationPair] = []
    for doc in documents:
        if doc.label is Label.BONAFIDE:
            subjects: Iterable[str] = (doc.subject_id,)
        else:
            subjects = dict.fromkeys(doc.contributors)
        for subject in subjects:
            for probe in probes_by_subject.get(subject, ()):
                pairs.append(EvaluationPair(doc.sample_id, probe.sample_id, doc.label))
    pairs.sort(key=lambda p: (p.document_id, p.probe_id))
    return pairs


def infer_scheme(store: EmbeddingDir, manifest: DatasetManifest) -> DimScheme:
    """Derive the dataset's width scheme from one stored file per group."""
    dims: dict[Group, int] = {}
    for entry in manifest.entries:
        for network in NetworkId:
            if network.group in dims:
                continue
            if store.exists(entry.sample_id, network):
                dims[network.group] = store.load(entry.sample_id, network).dim
        if len(dims) == len(Group):
            break
    if len(dims) != len(Group):
        missing = [g.value for g in Group if g not in dims]
        raise DataError(f"cannot infer embedding widths, no files found for group(s) {missing}")
    return DimScheme(g1=dims[Group.G1], g2=dims[Group.G2])
