"""Closed-form dimension predictions for geometrically finite groups.

A group is summarized by its :class:`GroupProfile`: the critical
exponent delta of the orbital counting series, the minimal and maximal
ranks of its parabolic fixed points, and the boundary dimension d.  All
seven derived quantities (Hausdorff, Assouad, and lower dimensions of
the limit set, upper and lower regularity dimensions of the conformal
measure, and the extremal local dimensions) are exact piecewise linear
functions of delta:

    upper_reg     = max(k_max, 2 delta - k_min)
    lower_reg     = min(k_min, 2 delta - k_max)
    dim_A         = max(k_max, delta)
    dim_L         = min(k_min, delta)
    dim_H         = delta
    sup_upper_loc = max(delta, 2 delta - k_min)
    inf_lower_loc = min(delta, 2 delta - k_max)

For parabolic-free groups every quantity collapses to delta (the
conformal measure is Ahlfors-David regular).  Both regularity curves
kink exactly once, at delta = (k_min + k_max) / 2.

Everything here is exact binary float arithmetic with no tolerances;
corollary flags compare delta with exact equality, so supply
delta = (k_min + k_max) / 2 exactly to land on the transition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PHASE_HEADER = "delta,upper_reg,lower_reg,dim_A,dim_L,poincare"


@dataclass(frozen=True)
class GroupProfile:
    """Dimension-relevant summary of a geometrically finite group.

    ``delta`` is the critical exponent, ``k_min <= k_max`` the extreme
    parabolic ranks (both 0 for parabolic-free groups), and ``d`` the
    dimension of the boundary sphere the limit set lives in.
    """

    delta: float
    k_min: int
    k_max: int
    d: int
    parabolic_free: bool = False

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("boundary dimension d must be at least 1")
        if not (0.0 < self.delta <= self.d):
            raise ValueError(
                f"delta must lie in (0, d]; got {self.delta} with d={self.d}"
            )
        if self.parabolic_free:
            if self.k_min != 0 or self.k_max != 0:
                raise ValueError("parabolic-free profiles must have k_min = k_max = 0")
        else:
            if not (1 <= self.k_min <= self.k_max <= self.d):
                raise ValueError(
                    "cusped profiles need 1 <= k_min <= k_max <= d; "
                    f"got k_min={self.k_min}, k_max={self.k_max}, d={self.d}"
                )
            if not (self.delta > self.k_max / 2.0):
                raise ValueError(
                    f"delta={self.delta} must exceed k_max/2={self.k_max / 2.0}"
                )

    @property
    def transition(self) -> float:
        """The phase-transition exponent (k_min + k_max) / 2."""
        return (self.k_min + self.k_max) / 2.0


@dataclass(frozen=True)
class DimensionReport:
    """All predicted dimension values for one profile, plus corollary flags."""

    dim_H: float
    dim_A: float
    dim_L: float
    upper_reg: float
    lower_reg: float
    sup_upper_loc: float
    inf_lower_loc: float
    flags: frozenset = field(default_factory=frozenset)


def predict_dims(profile: GroupProfile) -> DimensionReport:
    """Evaluate every closed-form dimension formula for the profile."""
    delta = float(profile.delta)
    if profile.parabolic_free:
        return DimensionReport(
            dim_H=delta,
            dim_A=delta,
            dim_L=delta,
            upper_reg=delta,
            lower_reg=delta,
            sup_upper_loc=delta,
            inf_lower_loc=delta,
            flags=classify_corollaries(profile),
        )
    k_min, k_max = profile.k_min, profile.k_max
    return DimensionReport(
        dim_H=delta,
        dim_A=max(float(k_max), delta),
        dim_L=min(float(k_min), delta),
        upper_reg=max(float(k_max), 2.0 * delta - k_min),
        lower_reg=min(float(k_min), 2.0 * delta - k_max),
        sup_upper_loc=max(delta, 2.0 * delta - k_min),
        inf_lower_loc=min(delta, 2.0 * delta - k_max),
        flags=classify_corollaries(profile),
    )


def classify_corollaries(profile: GroupProfile) -> frozenset:
    """Flag which of the structural corollaries apply to the profile.

    Exact float comparisons throughout: the measure-zero boundary cases
    (delta exactly at the transition, or exactly k for uniform ranks)
    get their own labels rather than being absorbed into a side.
    """
    flags = set()
    delta = float(profile.delta)
    if profile.parabolic_free:
        flags.add("ahlfors_david_regular")
        if profile.d == 1:
            flags.add("fuchsian_parabolic_free")
        return frozenset(flags)

    mid = profile.transition
    if profile.k_max == profile.d:
        flags.add("full_assouad")  # equivalently: the limit set is non-porous
    if delta <= mid:
        flags.add("upper_reg_attains_assouad")
    if delta >= mid:
        flags.add("lower_reg_attains_lower")
    if profile.k_min < profile.k_max and delta == mid:
        flags.add("triple_gap")
    if profile.d == 1:
        flags.add("fuchsian_cusped")
    if profile.k_min == profile.k_max:
        k = float(profile.k_min)
        if delta < k:
            flags.add("uniform_rank_lower_equals_hausdorff")
        elif delta > k:
            flags.add("uniform_rank_hausdorff_equals_assouad")
        else:
            flags.add("uniform_rank_all_equal")
    return frozenset(flags)


def phase_plot(
    k_min: int,
    k_max: int,
    d: int,
    delta_grid: Sequence[float],
) -> np.ndarray:
    """Evaluate the cusped formulas on a grid of delta values.

    Returns one row per grid point: (delta, upper_reg, lower_reg,
    dim_A, dim_L, delta).  The sixth column repeats delta so the table
    shows the Hausdorff/Poincare reference line alongside the others.
    """
    grid = [float(x) for x in delta_grid]
    if not grid:
        raise ValueError("empty delta grid")
    for x in grid:
        if x <= k_max / 2.0:
            raise ValueError(f"grid point {x} is not above k_max/2 = {k_max / 2.0}")
        if x > d:
            raise ValueError(f"grid point {x} exceeds the ambient dimension {d}")
    rows = np.empty((len(grid), 6))
    for i, x in enumerate(grid):
        rep = predict_dims(GroupProfile(delta=x, k_min=k_min, k_max=k_max, d=d))
        rows[i] = (x, rep.upper_reg, rep.lower_reg, rep.dim_A, rep.dim_L, x)
    return rows


def format_phase_table(rows: Iterable[Sequence[float]]) -> str:
    """Render phase-plot rows as the canonical plain-text table.

    12 significant digits per value; this exact formatting is the
    interchange format, so it must stay byte-stable.
    """
    lines = [PHASE_HEADER]
    for row in rows:
        lines.append(",".join(f"{float(v):.12g}" for v in row))
    return "\n".join(lines) + "\n"
