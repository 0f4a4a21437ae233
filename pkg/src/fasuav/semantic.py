"""Piecewise-linear compute load of semantic compression and its power cost."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .errors import OutOfDomainError, SegmentMismatchError

_EDGE_TOL = 1e-12


@dataclass(frozen=True)
class Segment:
    slope: float
    intercept: float
    lower_break: float

    def __call__(self, rho):
        return self.slope * rho + self.intercept


@dataclass(frozen=True)
class PiecewiseLoadModel:
    """Load ``c(rho)`` made of linear pieces over ``[D_S, 1]``.

    Segment ``s`` (1-based) covers ``D_s <= rho < D_{s-1}`` with ``D_0 = 1``;
    ``rho = 1`` belongs to segment 1.
    """

    segments: tuple[Segment, ...]
    p0: float = 1.0

    def __post_init__(self):
        segs = tuple(s if isinstance(s, Segment) else Segment(*s) for s in self.segments)
        object.__setattr__(self, "segments", segs)
        problems = validate_load_model(segs, self.p0)
        if problems:
            raise ValueError("; ".join(problems))

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def min_ratio(self) -> float:
        return self.segments[-1].lower_break

    def breaks(self, s: int) -> tuple[float, float]:
        """``(D_s, D_{s-1})`` for 1-based segment ``s``."""
        lo = self.segments[s - 1].lower_break
        hi = 1.0 if s == 1 else self.segments[s - 2].lower_break
        return lo, hi

    def segment_of(self, rho: float) -> int:
        if not self.min_ratio <= rho <= 1.0:
            raise OutOfDomainError(f"rho={rho} outside [{self.min_ratio}, 1]")
        for s, seg in enumerate(self.segments, start=1):
            if rho >= seg.lower_break:
                return s
        return self.n_segments  # unreachable


def validate_load_model(segments, p0) -> list[str]:
    """Return the list of shape violations (empty when valid)."""
    problems = []
    if not segments:
        return ["at least one segment is required"]
    if not p0 > 0:
        problems.append("p0 must be positive")
    slopes = [s.slope for s in segments]
    lows = [s.lower_break for s in segments]
    if not slopes[0] < 0:
        problems.append("slopes must be negative")
    if any(b >= a for a, b in zip(slopes, slopes[1:])):
        problems.append("slopes must be strictly decreasing")
    uppers = [1.0] + lows[:-1]
    if not all(0 < lo < hi for lo, hi in zip(lows, uppers)):
        problems.append("breakpoints must satisfy 1 > D_1 > ... > D_S > 0")
        return problems
    for i, seg in enumerate(segments, start=1):
        # linear and decreasing: smallest value at the upper end
        if seg(uppers[i - 1]) < -_EDGE_TOL:
            problems.append(f"segment {i}: load negative inside its interval")
    for i in range(len(segments) - 1):
        d = lows[i]
        if segments[i](d) > segments[i + 1](d) + _EDGE_TOL:
            problems.append(f"load increases across breakpoint D_{i + 1}={d}")
    return problems


DEFAULT_LOAD_MODEL = PiecewiseLoadModel(
    segments=(Segment(-2.0, 2.0, 0.6), Segment(-5.0, 3.8, 0.4)), p0=1.0)


def load(model: PiecewiseLoadModel, rho: float) -> float:
    s = model.segment_of(rho)
    return model.segments[s - 1](rho)


def compression_power(model: PiecewiseLoadModel, rho: float) -> float:
    return load(model, rho) * model.p0


def ratio_from_power(model: PiecewiseLoadModel, p_com: float, s: int) -> float:
    """Invert ``compression_power`` on segment ``s``.

    The segment's upper breakpoint is accepted as well (closure of the
    half-open interval), so optimizers working on the closed trace interval
    can always map back.
    """
    seg = model.segments[s - 1]
    rho = (p_com / model.p0 - seg.intercept) / seg.slope
    lo, hi = model.breaks(s)
    tol = _EDGE_TOL * max(1.0, abs(rho))
    if rho < lo - tol or rho > hi + tol:
        raise SegmentMismatchError(
            f"P_com={p_com} maps to rho={rho}, outside segment {s} [{lo}, {hi})")
    return min(max(rho, lo), hi)


class TraceInterval(NamedTuple):
    lower: float
    upper: float


def trace_budget_bounds(model: PiecewiseLoadModel, s: int, p_max: float):
    """Admissible ``tr(Q)`` range when compression runs on segment ``s``.

    Returns a :class:`TraceInterval`, or ``None`` when the segment cannot be
    afforded within ``p_max``.
    """
    seg = model.segments[s - 1]
    lo_rho, hi_rho = model.breaks(s)
    lower = p_max - model.p0 * seg(lo_rho)
    upper = p_max - model.p0 * seg(hi_rho)
    lower, upper = max(lower, 0.0), min(upper, p_max)
    if lower > upper:
        return None
    return TraceInterval(lower, upper)
