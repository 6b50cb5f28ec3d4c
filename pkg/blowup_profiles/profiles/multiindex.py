"""Crossing structure of computed profiles: multiindex extraction and interface estimates."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..core import MultiIndex, ProfileForm, ProfileSolution, RightBC
from ..errors import DomainError
from ..oscillatory import ExponentOrder, interface_exponent

logger = logging.getLogger(__name__)

DEFAULT_TAIL_THRESHOLD = 1e-4
BODY_FRACTION = 0.5
# crossings of +-F_* closer to the level than this fraction of it are shallow wiggles
EXCURSION_FRACTION = 0.25
# tail lobes below NONLINEAR_FACTOR * eps belong to the linearized, exponentially decaying region
NONLINEAR_FACTOR = 10.0


@dataclass(frozen=True)
class Lobe:
    start: float
    end: float
    sign: int
    peak: float
    y_peak: float


def lobes(y: np.ndarray, v: np.ndarray, floor: float = 0.0) -> List[Lobe]:
    """Constant-sign stretches of v with peak |v| >= floor; smaller ones are absorbed."""
    s = np.sign(v)
    nz = s != 0
    if not nz.any():
        return []
    # zeros take the sign of the preceding sample
    idx = np.where(nz, np.arange(s.size), 0)
    np.maximum.accumulate(idx, out=idx)
    s = s[idx]
    first = int(np.argmax(nz))
    s[:first] = s[first]
    cuts = np.nonzero(s[1:] != s[:-1])[0] + 1
    merged: List[Lobe] = []
    for seg in np.split(np.arange(s.size), cuts):
        a = np.abs(v[seg])
        k = seg[int(np.argmax(a))]
        lobe = Lobe(float(y[seg[0]]), float(y[seg[-1]]), int(s[seg[0]]), float(a.max()), float(y[k]))
        if lobe.peak < floor:
            continue
        if merged and merged[-1].sign == lobe.sign:
            prev = merged[-1]
            top = prev if prev.peak >= lobe.peak else lobe
            merged[-1] = Lobe(prev.start, lobe.end, prev.sign, top.peak, top.y_peak)
        else:
            merged.append(lobe)
    return merged


def _crossings(y, v, floor) -> List[float]:
    ls = lobes(y, v, floor)
    return [0.5 * (a.end + b.start) for a, b in zip(ls[:-1], ls[1:])]


def equilibrium_level(sol: ProfileSolution) -> float:
    if sol.form in (ProfileForm.GENERAL, ProfileForm.F_FORM):
        return sol.params.F_star
    return 1.0


def body_window(y: np.ndarray, F: np.ndarray, floor: float) -> Tuple[float, float]:
    """Span from the first to the last lobe of F reaching BODY_FRACTION of sup |F|.

    The oscillatory interface tails outside it carry no dominant extrema.
    """
    sup = float(np.max(np.abs(F)))
    body = [lb for lb in lobes(y, F, floor) if lb.peak >= BODY_FRACTION * sup]
    if not body:
        return float(y[0]), float(y[-1])
    return body[0].start, body[-1].end


def classify(sol: ProfileSolution, tail_threshold: Optional[float] = None, refine: int = 8,
             excursion: float = EXCURSION_FRACTION) -> MultiIndex:
    """Multiindex of crossings of +F_*, 0 and -F_* along the body of the symmetric profile.

    Zeros count between body lobes whenever the lobe between them peaks above
    tail_threshold * sup |F|; a crossing of +-F_* counts only when F - (+-F_*)
    moves more than ``excursion`` * F_* away from the level on both sides.
    """
    if not sol.converged:
        raise DomainError("classify needs a converged solution")
    thr = DEFAULT_TAIL_THRESHOLD if tail_threshold is None else tail_threshold
    data = sol.full_domain(refine)
    y, F = data["y"], data["F"]
    floor = thr * float(np.max(np.abs(F)))
    level = equilibrium_level(sol)
    lo, hi = body_window(y, F, floor)
    inside = (y >= lo) & (y <= hi)
    y, F = y[inside], F[inside]

    events: List[Tuple[float, int]] = [(pos, 0) for pos in _crossings(y, F, floor)]
    for kind, shifted in ((1, F - level), (-1, F + level)):
        events.extend((pos, kind) for pos in _crossings(y, shifted, max(floor, excursion * level)))
    events.sort()

    entries: List[List[int]] = []
    for _, kind in events:
        if entries and entries[-1][0] == kind:
            entries[-1][1] += 1
        else:
            entries.append([kind, 1])
    return MultiIndex(tuple((k, c) for k, c in entries), thr)


@dataclass(frozen=True)
class InterfaceEstimate:
    y0: float
    zero_count: int
    slope: Optional[float]
    exponent: float
    lobe_positions: Tuple[float, ...] = ()
    lobe_peaks: Tuple[float, ...] = ()


def _free_slope(y0: float, yk: np.ndarray, logp: np.ndarray) -> float:
    z = np.log(y0 - yk)
    A = np.column_stack([z, np.ones_like(z)])
    coef, *_ = np.linalg.lstsq(A, logp, rcond=None)
    return float(coef[0])


def _geometric_y0(yk: np.ndarray, peaks: np.ndarray, mu: float) -> Optional[float]:
    """Median over consecutive lobe pairs of the point where d_k = y0 - y_k contracts to zero.

    With |F| ~ (y0 - y)^mu the ratio of consecutive peaks fixes q = d_{k+1}/d_k,
    and then y0 = y_{k+1} + (y_{k+1} - y_k) q / (1 - q).
    """
    out = []
    for k in range(yk.size - 1):
        if not peaks[k + 1] < peaks[k]:
            continue
        q = (peaks[k + 1] / peaks[k]) ** (1.0 / mu)
        out.append(yk[k + 1] + (yk[k + 1] - yk[k]) * q / (1.0 - q))
    return float(np.median(out)) if out else None


def interface_estimate(sol: ProfileSolution, refine: int = 8,
                       nonlinear_factor: float = NONLINEAR_FACTOR) -> InterfaceEstimate:
    """Right interface position from the nonlinear part of the oscillatory tail.

    Only lobes beyond the body whose peak exceeds ``nonlinear_factor`` * eps
    enter; past them the regularized equation is linear and decays
    exponentially. Lobe peaks follow |F| ~ A (y0 - y)^mu with mu = 4(n+1)/n,
    so consecutive peaks give y0 by geometric extrapolation. ``zero_count``
    is the number of sign changes from the body through the nonlinear lobes;
    a free-slope fit of log peak against log(y0 - y) is reported as ``slope``
    when at least three lobes are resolved. With fewer than two lobes y0 is
    where |F| drops below the nonlinear floor for good.
    """
    if sol.right_bc is not RightBC.COMPACT:
        raise DomainError("interface estimates apply to compact-support profiles")
    y = sol.fine_nodes(refine)
    F = sol.evaluate(y)
    sup = float(np.max(np.abs(F)))
    if sup == 0.0:
        raise DomainError("no decaying tail found: profile vanishes identically")
    mu = interface_exponent(sol.params.n, ExponentOrder.PROFILE)
    floor = max(nonlinear_factor * sol.eps, 1e-15 * sup)

    above = np.nonzero(np.abs(F) > floor)[0]
    if above.size == 0 or above[-1] == y.size - 1:
        raise DomainError("no decaying tail found before the right boundary")
    y_floor = float(y[above[-1] + 1])

    all_lobes = lobes(y, F, floor)
    body = max((i for i, lb in enumerate(all_lobes) if lb.peak >= BODY_FRACTION * sup), default=None)
    tail = all_lobes[body + 1:] if body is not None else []
    yk = np.array([lb.y_peak for lb in tail])
    peaks = np.array([lb.peak for lb in tail])

    y0 = _geometric_y0(yk, peaks, mu) if len(tail) >= 2 else None
    if y0 is None:
        logger.info("[interface] fewer than two nonlinear tail lobes above %.1e; using the floor point", floor)
        y0 = y_floor
    y0 = float(min(max(y0, float(yk[-1]) if yk.size else y0), sol.radius))
    slope = _free_slope(y0, yk, np.log(peaks)) if len(tail) >= 3 and np.all(yk < y0) else None
    return InterfaceEstimate(y0=y0, zero_count=len(tail), slope=slope, exponent=mu,
                             lobe_positions=tuple(float(v) for v in yk),
                             lobe_peaks=tuple(float(v) for v in peaks))
