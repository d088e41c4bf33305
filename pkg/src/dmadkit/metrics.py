"""Presentation-attack detection error rates, in percent.

The decision rule is fixed: a comparison is called an attack when its
score is greater than or equal to the threshold. APCER is the fraction
of attacks scored below the threshold (missed), BPCER the fraction of
bonafide comparisons at or above it (falsely flagged). Sweeping the
threshold over every distinct score, plus sentinels at both infinities,
gives the full trade-off curve; the detection equal error rate is read
off that curve, interpolating between brackets when no threshold hits
APCER = BPCER exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import DataError, NumericError
from .store import Label


@dataclass(frozen=True)
class ScoredSample:
    score: float
    label: Label

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise NumericError(f"scores must be finite, got {self.score}")


@dataclass(frozen=True)
class DetCurve:
    """APCER/BPCER in percent at each swept threshold.

    Thresholds run from -inf (everything flagged: APCER 0, BPCER 100) to
    +inf (nothing flagged: APCER 100, BPCER 0); APCER is non-decreasing
    and BPCER non-increasing along the way.
    """

    thresholds: np.ndarray
    apcer: np.ndarray
    bpcer: np.ndarray

    @property
    def points(self) -> list[tuple[float, float, float]]:
        return [
            (float(t), float(a), float(b))
            for t, a, b in zip(self.thresholds, self.apcer, self.bpcer)
        ]

    def write_csv(self, out: IO[str]) -> None:
        out.write("threshold,apcer_percent,bpcer_percent\n")
        for t, a, b in self.points:
            out.write(f"{t:.6f},{a:.6f},{b:.6f}\n")


def _split_scores(samples: Iterable[ScoredSample]) -> tuple[np.ndarray, np.ndarray]:
    attack = []
    bonafide = []
    for s in samples:
        if s.label is Label.MORPH:
            attack.append(s.score)
        else:
            bonafide.append(s.score)
    if not attack or not bonafide:
        raise DataError("metrics need both attack and bonafide samples")
    return np.sort(np.asarray(attack, dtype=np.float64)), np.sort(
        np.asarray(bonafide, dtype=np.float64)
    )


def det_curve(samples: Sequence[ScoredSample]) -> DetCurve:
    """Sweep thresholds over {-inf} + distinct scores + {+inf}."""
    attack, bonafide = _split_scores(samples)
    thresholds = np.concatenate(
        ([-np.inf], np.unique(np.concatenate((attack, bonafide))), [np.inf])
    )
    # score < t  <=> index below the left insertion point in the sorted array
    apcer = np.searchsorted(attack, thresholds, side="left") / attack.size * 100.0
    bpcer = (
        (bonafide.size - np.searchsorted(bonafide, thresholds, side="left"))
        / bonafide.size
        * 100.0
    )
    return DetCurve(thresholds=thresholds, apcer=apcer, bpcer=bpcer)


def d_eer(samples: Sequence[ScoredSample]) -> float:
    """Detection equal error rate in percent.

    APCER - BPCER is non-decreasing along the sweep, so the sign change
    is unique. An exact zero wins (the lowest such threshold); otherwise
    the rate is interpolated linearly in (APCER, BPCER) space between
    the bracketing thresholds.
    """
    curve = det_curve(samples)
    diff = curve.apcer - curve.bpcer
    zeros = np.flatnonzero(diff == 0.0)
    if zeros.size:
        return float(curve.apcer[zeros[0]])
    k = int(np.argmax(diff > 0.0))  # first index with diff > 0
    # diff[0] = -100 and diff[-1] = +100, so 0 < k < len(diff)
    a1, a2 = curve.apcer[k - 1], curve.apcer[k]
    b1, b2 = curve.bpcer[k - 1], curve.bpcer[k]
    lam = (b1 - a1) / ((a2 - a1) - (b2 - b1))
    return float(a1 + lam * (a2 - a1))


def bpcer_at_apcer(samples: Sequence[ScoredSample], apcer_target: float) -> float:
    """Lowest BPCER among thresholds whose APCER stays at or below the
    target (percent). The -inf sentinel always qualifies, so the result
    is well defined for any target in (0, 100)."""
    if not 0.0 < apcer_target < 100.0:
        raise DataError(f"apcer_target must lie in (0, 100), got {apcer_target}")
    curve = det_curve(samples)
    feasible = curve.apcer <= apcer_target
    return float(curve.bpcer[feasible].min())
