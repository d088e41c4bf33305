"""Independent reference implementations used only by the tests.

Every function here recomputes a library quantity through a deliberately
different route: arbitrary-precision arithmetic, exhaustive sweeps with
plain Python loops, or central finite differences. They are slow on
purpose; sharing a bug with the vectorized production code is what they
are built to avoid, so none of them import anything from dmadkit.
"""

from __future__ import annotations

import math

import mpmath

mpmath.mp.dps = 50


def mp_pearson(a, b) -> float:
    """Pearson correlation at 50 significant digits, rounded at the end."""
    xs = [mpmath.mpf(float(v)) for v in a]
    ys = [mpmath.mpf(float(v)) for v in b]
    n = len(xs)
    mx = mpmath.fsum(xs) / n
    my = mpmath.fsum(ys) / n
    dx = [v - mx for v in xs]
    dy = [v - my for v in ys]
    num = mpmath.fsum(u * v for u, v in zip(dx, dy))
    den = mpmath.sqrt(mpmath.fsum(u * u for u in dx) * mpmath.fsum(v * v for v in dy))
    return float(num / den)


def mp_slerp(a, b, t, parallel_threshold=1e-7):
    """Spherical interpolation recomputed in arbitrary precision.

    Mirrors the published contract: the angle comes from the clamped
    cosine of normalized inputs, and nearly parallel inputs fall back to
    the straight line between the originals.
    """
    xs = [mpmath.mpf(float(v)) for v in a]
    ys = [mpmath.mpf(float(v)) for v in b]
    tt = mpmath.mpf(float(t))
    na = mpmath.sqrt(mpmath.fsum(v * v for v in xs))
    nb = mpmath.sqrt(mpmath.fsum(v * v for v in ys))
    cos = mpmath.fsum(u * v for u, v in zip(xs, ys)) / (na * nb)
    cos = max(mpmath.mpf(-1), min(mpmath.mpf(1), cos))
    omega = mpmath.acos(cos)
    if abs(mpmath.sin(omega)) < parallel_threshold:
        return [float((1 - tt) * u + tt * v) for u, v in zip(xs, ys)]
    wa = mpmath.sin((1 - tt) * omega) / mpmath.sin(omega)
    wb = mpmath.sin(tt * omega) / mpmath.sin(omega)
    return [float(wa * u + wb * v) for u, v in zip(xs, ys)]


def mp_residue(anchor, partner_a, partner_b, t=0.5):
    """slerp(anchor, partner_a) minus slerp(anchor, partner_b)."""
    fa = mp_slerp(anchor, partner_a, t)
    fb = mp_slerp(anchor, partner_b, t)
    return [u - v for u, v in zip(fa, fb)]


def py_pearson(a, b) -> float:
    """Plain-float Pearson, loop based, for the selection oracle."""
    n = len(a)
    mx = sum(a) / n
    my = sum(b) / n
    dx = [v - mx for v in a]
    dy = [v - my for v in b]
    num = sum(u * v for u, v in zip(dx, dy))
    den = math.sqrt(sum(u * u for u in dx) * sum(v * v for v in dy))
    return num / den


def exhaustive_anchor(mats) -> int:
    """Try all three anchor choices and return the cheapest index.

    mats holds the three per-network difference matrices in declaration
    order, each a list of per-sample rows. The cost of a candidate is
    the mean over samples of its summed correlations with the other two
    members, exactly as defined, just recomputed sample by sample.
    """
    n = len(mats[0])
    costs = []
    for i in range(3):
        others = [j for j in range(3) if j != i]
        total = 0.0
        for s in range(n):
            for j in others:
                total += py_pearson(list(mats[i][s]), list(mats[j][s]))
        costs.append(total / n)
    best = 0
    for i in (1, 2):
        if costs[i] < costs[best]:
            best = i
    return best


def sweep_points(scores, labels):
    """Full threshold sweep by brute force.

    labels are truthy for attacks. Returns (thresholds, apcer, bpcer)
    with rates in percent, computed as count / total * 100.0 in plain
    floats so a correct vectorized implementation matches bit for bit.
    """
    attack = [s for s, m in zip(scores, labels) if m]
    bona = [s for s, m in zip(scores, labels) if not m]
    thresholds = [float("-inf")] + sorted(set(attack + bona)) + [float("inf")]
    apcer = []
    bpcer = []
    for t in thresholds:
        missed = sum(1 for s in attack if s < t)
        flagged = sum(1 for s in bona if s >= t)
        apcer.append(missed / len(attack) * 100.0)
        bpcer.append(flagged / len(bona) * 100.0)
    return thresholds, apcer, bpcer


def sweep_d_eer(scores, labels) -> float:
    """Equal error rate read off the brute-force sweep.

    The first threshold where the rates agree wins outright; otherwise
    the crossing is interpolated linearly between the two bracketing
    sweep points.
    """
    _, apcer, bpcer = sweep_points(scores, labels)
    for a, b in zip(apcer, bpcer):
        if a == b:
            return a
    k = 0
    while apcer[k] - bpcer[k] <= 0.0:
        k += 1
    a1, a2 = apcer[k - 1], apcer[k]
    b1, b2 = bpcer[k - 1], bpcer[k]
    lam = (b1 - a1) / ((a2 - a1) - (b2 - b1))
    return a1 + lam * (a2 - a1)


def sweep_bpcer_at(scores, labels, target) -> float:
    """Lowest BPCER among sweep points with APCER at or below target."""
    _, apcer, bpcer = sweep_points(scores, labels)
    return min(b for a, b in zip(apcer, bpcer) if a <= target)


def py_objective(weights, bias, rows, labels, c) -> float:
    """Hinge objective by plain loops: 0.5 w.w + C sum max(0, 1 - margin)."""
    value = 0.5 * sum(w * w for w in weights)
    for row, y in zip(rows, labels):
        margin = y * (sum(w * x for w, x in zip(weights, row)) + bias)
        value += c * max(0.0, 1.0 - margin)
    return value


def fd_gradient(weights, bias, rows, labels, c, eps=1e-6):
    """Central finite differences of py_objective at (weights, bias)."""
    grad_w = []
    for i in range(len(weights)):
        up = list(weights)
        down = list(weights)
        up[i] += eps
        down[i] -= eps
        grad_w.append(
            (py_objective(up, bias, rows, labels, c) - py_objective(down, bias, rows, labels, c))
            / (2.0 * eps)
        )
    grad_b = (
        py_objective(weights, bias + eps, rows, labels, c)
        - py_objective(weights, bias - eps, rows, labels, c)
    ) / (2.0 * eps)
    return grad_w, grad_b
