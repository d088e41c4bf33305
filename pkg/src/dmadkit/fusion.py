"""Residual features, correlation-driven pair selection, slerp residues.

The detector never classifies raw embeddings. Each network contributes
the difference between the document and probe vectors, and within each
width group the three difference signals are combined: an anchor
network is chosen so that its differences correlate least with its two
group mates on training data, and the residue between the two spherical
interpolations (anchor with each mate) becomes an extra feature stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import DataError, NumericError
from .networks import GROUP_MEMBERS, Group, NetworkId


@dataclass(frozen=True)
class SlerpConfig:
    """Interpolation parameter and the near-parallel fallback threshold."""

    t: float = 0.5
    parallel_threshold: float = 1e-7

    def __post_init__(self) -> None:
        if not 0.0 <= self.t <= 1.0:
            raise ValueError(f"t must lie in [0, 1], got {self.t}")
        if not self.parallel_threshold > 0.0:
            raise ValueError("parallel_threshold must be positive")


@dataclass(frozen=True)
class GroupSelection:
    """The anchor of a group and its two partners, in declaration order."""

    group: Group
    anchor: NetworkId
    partner_a: NetworkId
    partner_b: NetworkId

    def __post_init__(self) -> None:
        members = set(GROUP_MEMBERS[self.group])
        chosen = {self.anchor, self.partner_a, self.partner_b}
        if chosen != members or len(chosen) != 3:
            raise ValueError(
                f"selection must name the three {self.group.value} networks exactly once"
            )

    @property
    def pairs(self) -> tuple[tuple[NetworkId, NetworkId], tuple[NetworkId, NetworkId]]:
        return (self.anchor, self.partner_a), (self.anchor, self.partner_b)

    def to_dict(self) -> dict:
        return {
            "group": self.group.value,
            "anchor": self.anchor.value,
            "partner_a": self.partner_a.value,
            "partner_b": self.partner_b.value,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "GroupSelection":
        return cls(
            group=Group(raw["group"]),
            anchor=NetworkId(raw["anchor"]),
            partner_a=NetworkId(raw["partner_a"]),
            partner_b=NetworkId(raw["partner_b"]),
        )


def difference(document: np.ndarray, probe: np.ndarray) -> np.ndarray:
    """Element-wise document minus probe, in float64."""
    a = np.asarray(document, dtype=np.float64)
    b = np.asarray(probe, dtype=np.float64)
    if a.shape != b.shape:
        raise DataError(f"difference needs equal shapes, got {a.shape} vs {b.shape}")
    return a - b


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two 1-D vectors, clipped to [-1, 1]."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise DataError(f"pearson needs two equal-length 1-D vectors, got {x.shape} vs {y.shape}")
    if x.size < 2:
        raise DataError("pearson needs at least two elements")
    dx = x - x.mean()
    dy = y - y.mean()
    vx = float(dx @ dx)
    vy = float(dy @ dy)
    if vx <= 0.0 or vy <= 0.0:
        raise NumericError("degenerate variance: constant input to correlation")
    r = float(dx @ dy) / math.sqrt(vx * vy)
    return min(1.0, max(-1.0, r))


def _rowwise_pearson(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Correlation of corresponding rows of two (n, d) matrices."""
    da = a - a.mean(axis=1, keepdims=True)
    db = b - b.mean(axis=1, keepdims=True)
    va = np.einsum("ij,ij->i", da, da)
    vb = np.einsum("ij,ij->i", db, db)
    bad = np.flatnonzero((va <= 0.0) | (vb <= 0.0))
    if bad.size:
        raise NumericError(
            f"degenerate variance: constant difference vector in training sample {int(bad[0])}"
        )
    r = np.einsum("ij,ij->i", da, db) / np.sqrt(va * vb)
    return np.clip(r, -1.0, 1.0)


def select_optimal_pairs(
    training_differences: Mapping[NetworkId, np.ndarray],
    group: Group,
) -> GroupSelection:
    """Pick the group's anchor by minimal summed correlation with its mates.

    For each candidate anchor the cost is the mean, over training
    samples, of the sum of its correlations with the other two members'
    difference vectors for the same sample. The argmin wins; ties go to
    the earliest network in declaration order, and the partners keep
    declaration order as well.
    """
    members = GROUP_MEMBERS[group]
    mats = []
    for member in members:
        if member not in training_differences:
            raise DataError(f"missing training differences for {member}")
        mat = np.asarray(training_differences[member], dtype=np.float64)
        if mat.ndim == 1:
            mat = mat[None, :]
        if mat.ndim != 2:
            raise DataError(f"training differences for {member} must be 2-D, got {mat.ndim}-D")
        mats.append(mat)
    n = mats[0].shape[0]
    if n == 0:
        raise DataError("empty training set for pair selection")
    if any(m.shape[0] != n for m in mats):
        raise DataError("training difference matrices differ in sample count")
    if mats[0].shape[1] < 2 or any(m.shape[1] != mats[0].shape[1] for m in mats):
        raise DataError("training difference matrices differ in width")

    mean_rho: dict[tuple[int, int], float] = {}
    for i in range(3):
        for j in range(i + 1, 3):
            rho = float(_rowwise_pearson(mats[i], mats[j]).mean())
            mean_rho[(i, j)] = mean_rho[(j, i)] = rho

    costs = [
        mean_rho[(i, (i + 1) % 3)] + mean_rho[(i, (i + 2) % 3)]
        for i in range(3)
    ]
    anchor_index = int(np.argmin(costs))  # argmin takes the first minimum
    partners = [m for k, m in enumerate(members) if k != anchor_index]
    return GroupSelection(
        group=group,
        anchor=members[anchor_index],
        partner_a=partners[0],
        partner_b=partners[1],
    )


def rotate_selection(selection: GroupSelection, steps: int) -> GroupSelection:
    """Move the anchor ``steps`` positions along the group's declaration
    order, keeping the remaining two networks as partners in that order.
    Used by the pairing ablations; steps=0 returns an equal selection."""
    members = GROUP_MEMBERS[selection.group]
    index = (members.index(selection.anchor) + steps) % len(members)
    partners = [m for k, m in enumerate(members) if k != index]
    return GroupSelection(
        group=selection.group,
        anchor=members[index],
        partner_a=partners[0],
        partner_b=partners[1],
    )


def _slerp_rows(
    a: np.ndarray,
    b: np.ndarray,
    config: SlerpConfig,
    *,
    zero_fallback: bool = False,
) -> np.ndarray:
    """Spherical linear interpolation of corresponding rows.

    Near-parallel rows (|sin omega| below the threshold) fall back to
    linear interpolation; near-antipodal rows have no defined path and
    raise. Zero-norm rows raise unless ``zero_fallback`` is set, in
    which case they take the linear branch too (the scoring pipeline
    needs that to stay defined when document and probe coincide).
    """
    t = config.t
    na = np.linalg.norm(a, axis=1)
    nb = np.linalg.norm(b, axis=1)
    zero = (na == 0.0) | (nb == 0.0)
    if zero.any() and not zero_fallback:
        raise NumericError("zero-norm vector has no direction to interpolate")
    denom = np.where(zero, 1.0, na * nb)
    cos_omega = np.clip(np.einsum("ij,ij->i", a, b) / denom, -1.0, 1.0)
    omega = np.arccos(cos_omega)
    sin_omega = np.sin(omega)
    parallel = (np.abs(sin_omega) < config.parallel_threshold) | zero
    if np.any(parallel & (cos_omega < 0.0) & ~zero):
        raise NumericError("antipodal vectors: interpolation path is undefined")

    out = np.empty_like(a, dtype=np.float64)
    if parallel.any():
        out[parallel] = (1.0 - t) * a[parallel] + t * b[parallel]
    rest = ~parallel
    if rest.any():
        w1 = np.sin((1.0 - t) * omega[rest]) / sin_omega[rest]
        w2 = np.sin(t * omega[rest]) / sin_omega[rest]
        out[rest] = w1[:, None] * a[rest] + w2[:, None] * b[rest]
    return out


def slerp(a: np.ndarray, b: np.ndarray, config: SlerpConfig = SlerpConfig()) -> np.ndarray:
    """Interpolate between two vectors along the great circle joining
    their directions, at parameter ``config.t``.

    Magnitudes are not renormalized: endpoints are reproduced exactly at
    t=0 and t=1. Nearly parallel inputs use linear interpolation;
    zero-norm or antipodal inputs raise NumericError.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.ndim != 1 or y.ndim != 1 or x.shape != y.shape:
        raise DataError(f"slerp needs two equal-length 1-D vectors, got {x.shape} vs {y.shape}")
    return _slerp_rows(x[None, :], y[None, :], config)[0]


def slerp_residue(
    differences: Mapping[NetworkId, np.ndarray],
    selection: GroupSelection,
    config: SlerpConfig = SlerpConfig(),
) -> np.ndarray:
    """Difference of the two anchor interpolations for one comparison:
    slerp(anchor, partner_a) minus slerp(anchor, partner_b)."""
    rows = {n: np.asarray(differences[n], dtype=np.float64)[None, :] for n in
            (selection.anchor, selection.partner_a, selection.partner_b)}
    fa = _slerp_rows(rows[selection.anchor], rows[selection.partner_a], config)
    fb = _slerp_rows(rows[selection.anchor], rows[selection.partner_b], config)
    return (fa - fb)[0]


def slerp_residues(
    differences: Mapping[NetworkId, np.ndarray],
    selection: GroupSelection,
    config: SlerpConfig = SlerpConfig(),
    *,
    zero_fallback: bool = False,
) -> np.ndarray:
    """Row-wise residues for a batch of comparisons (n, d) per network."""
    anchor = np.asarray(differences[selection.anchor], dtype=np.float64)
    pa = np.asarray(differences[selection.partner_a], dtype=np.float64)
    pb = np.asarray(differences[selection.partner_b], dtype=np.float64)
    if anchor.shape != pa.shape or anchor.shape != pb.shape:
        raise DataError("residue inputs must share one shape per group")
    fa = _slerp_rows(anchor, pa, config, zero_fallback=zero_fallback)
    fb = _slerp_rows(anchor, pb, config, zero_fallback=zero_fallback)
    return fa - fb
