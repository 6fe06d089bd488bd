"""Empirical conformal measures on the limit set and scaling diagnostics.

The conformal (Patterson-Sullivan type) measure of a discrete group is
approximated by weighting every enumerated orbit point g(o) with
exp(-s d(o, g(o))) for an exponent s strictly above the critical
exponent, normalizing, and placing each weight at the boundary
projection of g(o).  The weak limit s -> delta is replaced by a
declared margin; comparing runs at margin and margin/2 is the standard
convergence diagnostic.

The second half of the module is the measure-formula machinery: the
escape depth rho(z, t) and cusp rank k(z, t) of geodesic ray points
relative to a disjoint horoball family, the model ball-mass value
exp(-t delta - rho (delta - k)), mass-ratio regularity exponents,
local dimensions, horoball counting sums, squeezed-shadow mass checks,
and the deep-excursion witness construction used to exhibit the
upper-regularity behaviour near a cusp.

All Euclidean ball masses are planar halfspace-model masses; groups
whose limit set is unbounded should be conjugated into a bounded chart
first (see ``group.bounded_model``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress

from . import hypgeom as hg
from .estdim import PointCloud, _farthest_point_sample, poincare_exponent
from .group import Cusp, GroupPresentation, HoroballFamily, OrbitData, enumerate_orbit

# atoms are aggregated on a grid this many times finer than the
# declared reliable scale
ATOM_GRID_FACTOR = 16.0
# default relative margin of the weighting exponent above the fitted
# critical exponent
S_MARGIN = 0.05
# smallest admissible mass-ratio scale separation R/r
MIN_RATIO = 8.0


class DivergentWeights(ValueError):
    """Weighting exponent at or below the measured orbital growth rate."""


class MeasureScaleError(ValueError):
    """A requested scale lies below the measure's reliable resolution."""


# ---------------------------------------------------------------------------
# empirical measures
# ---------------------------------------------------------------------------


@dataclass
class EmpiricalMeasure:
    """Finitely many weighted atoms approximating a boundary measure.

    ``coords`` holds one planar halfspace-model position per atom (one
    column for d = 1, two for d = 2) and ``weights`` the corresponding
    masses, positive with total 1.  ``resolution`` is the finest scale
    at which ball masses are trusted; queries below it see individual
    atoms instead of the measure.  ``provenance`` records the exponent
    and orbit budget that produced the measure.
    """

    coords: np.ndarray
    weights: np.ndarray
    d: int
    resolution: float
    provenance: dict = field(default_factory=dict)
    _tree: Optional[cKDTree] = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        if self.d not in (1, 2):
            raise ValueError("boundary dimension must be 1 or 2")
        if self.coords.shape[1] != self.d:
            raise ValueError(
                f"d={self.d} measure needs {self.d} coordinate columns, "
                f"got {self.coords.shape[1]}"
            )
        if len(self.weights) != len(self.coords):
            raise ValueError("one weight per atom required")
        if len(self.weights) == 0:
            raise ValueError("a measure needs at least one atom")
        if not np.all(self.weights > 0):
            raise ValueError("atom weights must be positive")
        if not (self.resolution > 0):
            raise ValueError("resolution must be positive")
        total = float(self.weights.sum())
        self.weights = self.weights / total
        assert abs(float(self.weights.sum()) - 1.0) <= 1e-12

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def atoms(self):
        """The (boundary point, weight) view of the atom list."""
        out = []
        for row, wt in zip(self.coords, self.weights):
            out.append((hg.BoundaryPoint(hg.HALFSPACE, tuple(row)), float(wt)))
        return out

    def extent(self) -> float:
        span = self.coords.max(axis=0) - self.coords.min(axis=0)
        return float(np.linalg.norm(span))

    def support_cloud(self) -> PointCloud:
        """The atom positions as a point cloud, for the set estimators."""
        return PointCloud(
            coords=self.coords.copy(),
            model=hg.HALFSPACE,
            d=self.d,
            resolution=self.resolution,
            meta=dict(self.provenance),
        )

    def tree(self) -> cKDTree:
        if self._tree is None:
            self._tree = cKDTree(self.coords)
        return self._tree

    def save(self, path: str) -> None:
        import os

        tmp = f"{path}.tmp.{os.getpid()}"
        header = (
            f"kleindim-measure model=halfspace d={self.d} "
            f"atom_count={self.n} resolution={self.resolution!r}"
        )
        table = np.column_stack([self.coords, self.weights])
        np.savetxt(tmp, table, header=header, fmt="%.17g")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "EmpiricalMeasure":
        with open(path) as fh:
            first = fh.readline()
        if "kleindim-measure" not in first:
            raise ValueError(f"{path} is not a kleindim measure file")
        fields = dict(tok.split("=", 1) for tok in first.split() if "=" in tok)
        table = np.loadtxt(path, ndmin=2)
        return cls(
            coords=table[:, :-1],
            weights=table[:, -1],
            d=int(fields["d"]),
            resolution=float(fields["resolution"]),
            provenance={"source": path},
        )


def _aggregate_atoms(coords: np.ndarray, weights: np.ndarray, cell: float):
    """Merge atoms sharing a grid cell into their centre of mass."""
    cells = np.floor(coords / cell).astype(np.int64)
    if coords.shape[1] == 1:
        packed = cells[:, 0]
    else:
        packed = (cells[:, 0] << np.int64(32)) ^ (cells[:, 1] & np.int64(0xFFFFFFFF))
    _, inverse, counts = np.unique(packed, return_inverse=True, return_counts=True)
    k = len(counts)
    w = np.zeros(k)
    np.add.at(w, inverse, weights)
    merged = np.zeros((k, coords.shape[1]))
    for j in range(coords.shape[1]):
        np.add.at(merged[:, j], inverse, weights * coords[:, j])
    merged /= w[:, None]
    return merged, w


def patterson_measure(
    group: GroupPresentation,
    s: Optional[float] = None,
    *,
    max_dist: Optional[float] = None,
    max_word_length: Optional[int] = None,
    max_elements: int = 2_000_000,
    orbit: Optional[OrbitData] = None,
    margin: float = S_MARGIN,
    band: Optional[float] = None,
) -> EmpiricalMeasure:
    """Weight orbit projections by exp(-s * orbit distance) and normalize.

    With ``s`` omitted the exponent is set to (1 + margin) times the
    fitted critical exponent of the supplied orbit.  Passing an ``s`` at
    or below the fitted exponent raises :class:`DivergentWeights`, since
    the normalized atoms would then never stabilize as the budget grows.

    ``band`` restricts the budget to orbit points within that distance of
    the completeness horizon before weighting.  A full finite orbit
    over-weights coarse scales relative to the converged measure, because
    every ball is missing exactly the atoms beyond the horizon and the
    missing fraction grows with the ball; reading ball masses off a fixed
    deep band removes that drift at the cost of a grainier measure.
    """
    if orbit is None:
        if max_dist is None and max_word_length is None:
            max_dist = 8.0
        orbit = enumerate_orbit(
            group, max_dist, max_elements=max_elements, max_word_length=max_word_length
        )

    delta_hat: Optional[float] = None
    try:
        delta_hat = float(poincare_exponent(orbit).value)
    except ValueError:
        pass
    if s is None:
        if delta_hat is None:
            raise ValueError(
                "orbit too shallow to fit a growth rate; pass the weighting "
                "exponent s explicitly"
            )
        s = delta_hat * (1.0 + margin)
    elif delta_hat is not None and s <= delta_hat:
        raise DivergentWeights(
            f"s={s:.6g} is at or below the measured orbital growth rate "
            f"{delta_hat:.6g}; the weight series diverges with the budget"
        )

    proj, finite = orbit.boundary_projections()
    keep = finite
    if band is not None:
        if not (band > 0):
            raise ValueError("band must be positive")
        keep = finite & (orbit.dists >= orbit.t_valid - float(band))
    raw = np.exp(-float(s) * (orbit.dists - float(orbit.dists.min())))
    pts = proj[keep]
    wts = raw[keep]
    n_dropped = int((~keep).sum())

    resolution = max(2.0 * math.exp(-orbit.t_valid), 1e-14)
    provenance = {
        "group": group.name,
        "s": float(s),
        "delta_hat": delta_hat,
        "n_orbit": orbit.n,
        "n_dropped": n_dropped,
        "band": band,
        "t_valid": orbit.t_valid,
        "orbit_truncated": orbit.truncated,
    }

    if len(pts) == 0:
        if finite.any():
            raise ValueError("the band excluded every atom; widen it")
        # a word-length-0 budget only sees the base point, whose radial
        # projection is taken downward by convention
        provenance["base_projection"] = True
        coords = np.zeros((1, group.d))
        return EmpiricalMeasure(
            coords=coords,
            weights=np.ones(1),
            d=group.d,
            resolution=resolution,
            provenance=provenance,
        )

    if group.d == 1:
        bad = np.abs(pts.imag) > 1e-7 * np.maximum(1.0, np.abs(pts))
        if bad.any():
            raise ValueError(
                "projections left the real line for a d=1 group; "
                "check the presentation"
            )
        coords = pts.real[:, None]
    else:
        coords = np.column_stack([pts.real, pts.imag])

    coords, weights = _aggregate_atoms(coords, wts, resolution / ATOM_GRID_FACTOR)
    if len(coords) >= 16:
        # ball masses are only smooth above the atom spacing, so the
        # declared reliable scale is the typical distance to the 8th
        # nearest atom, not the finer set-sampling resolution
        nn = cKDTree(coords).query(coords, k=9)[0][:, -1]
        resolution = max(resolution, 2.0 * float(np.median(nn)))
    return EmpiricalMeasure(
        coords=coords,
        weights=weights,
        d=group.d,
        resolution=resolution,
        provenance=provenance,
    )


def _center_coords(measure: EmpiricalMeasure, x) -> np.ndarray:
    """A query centre as a planar coordinate row matching the measure."""
    if isinstance(x, hg.BoundaryPoint):
        if x.is_infinity:
            raise ValueError("ball masses near infinity are not defined; "
                             "conjugate to a bounded chart first")
        row = np.asarray(x.coords, dtype=float)
    elif isinstance(x, complex):
        row = np.asarray([x.real, x.imag]) if measure.d == 2 else np.asarray([x.real])
    else:
        row = np.asarray(x, dtype=float).ravel()
    if len(row) != measure.d:
        raise ValueError(f"centre needs {measure.d} coordinates, got {len(row)}")
    return row


def ball_mass(measure: EmpiricalMeasure, x, r: float) -> float:
    """Total weight within Euclidean distance r of the centre."""
    if not (r > 0):
        raise ValueError("radius must be positive")
    row = _center_coords(measure, x)
    idx = measure.tree().query_ball_point(row, float(r))
    if not idx:
        return 0.0
    return float(measure.weights[idx].sum())


def _ball_masses(measure: EmpiricalMeasure, centers: np.ndarray, r: float) -> np.ndarray:
    hits = measure.tree().query_ball_point(centers, float(r))
    return np.array(
        [float(measure.weights[idx].sum()) if idx else 0.0 for idx in hits]
    )


# ---------------------------------------------------------------------------
# global measure formula
# ---------------------------------------------------------------------------


@dataclass
class GMFContext:
    """Everything the measure formula needs: delta, horoballs, base point.

    The standing geometric fact delta > k/2 for every cusp rank k is
    enforced at construction; a fitted delta violating it is estimator
    error and has no meaningful formula semantics.
    """

    delta: float
    family: HoroballFamily
    base: Optional[hg.InteriorPoint] = None

    def __post_init__(self) -> None:
        if not (self.delta > 0):
            raise ValueError("delta must be positive")
        ranks = set(int(r) for r in self.family.ranks)
        if self.family.inf_height is not None:
            ranks.add(int(self.family.inf_rank))
        for k in sorted(ranks):
            if k > 0 and not (self.delta > k / 2.0):
                raise ValueError(
                    f"delta={self.delta} violates delta > k/2 for cusp rank {k}"
                )
        if self.base is None:
            self.base = hg.origin(self.family.d, hg.HALFSPACE)


def k_and_rho(ctx: GMFContext, z, t: float) -> tuple[int, float]:
    """Cusp rank and escape depth of the ray point z_t.

    z_t is the point at distance t from the base along the geodesic ray
    toward z.  Inside a family horoball the pair is (member rank,
    distance to the member's boundary); outside every member it is
    (0, 0).  Disjointness makes the member unambiguous.
    """
    if not (t > 0):
        raise ValueError("t must be positive")
    zb = _as_boundary(z, ctx.family.d)
    zt = hg.geodesic_point(zb, float(t), base=ctx.base)
    w, h = hg._hs_interior(zt)
    depth, rank = ctx.family.deepest(np.asarray([w]), np.asarray([h]))
    if depth[0] > 0.0:
        return int(rank[0]), float(depth[0])
    return 0, 0.0


def gmf_value(ctx: GMFContext, z, t: float) -> float:
    """The model ball mass exp(-t delta - rho (delta - k)) at (z, t).

    With an empty family (parabolic-free group) this reduces to the
    Ahlfors-David regular form exp(-t delta).
    """
    k, rho = k_and_rho(ctx, z, t)
    return math.exp(-float(t) * ctx.delta - rho * (ctx.delta - k))


def _as_boundary(z, d: int) -> hg.BoundaryPoint:
    if isinstance(z, hg.BoundaryPoint):
        return z
    if isinstance(z, complex):
        coords = (z.real, z.imag) if d == 2 else (z.real,)
        return hg.BoundaryPoint(hg.HALFSPACE, coords)
    row = np.asarray(z, dtype=float).ravel()
    return hg.BoundaryPoint(hg.HALFSPACE, tuple(row[:d]))


@dataclass(frozen=True)
class GMFReport:
    """Drift diagnostics of log(empirical mass / formula value).

    ``slope`` is the regression slope against t: a value near zero means
    the formula tracks the empirical masses with no exponential drift,
    which is the strongest statement available while the two-sided
    constants stay untracked.
    """

    slope: float
    spread: float
    rows: tuple
    n_zero_mass: int


def gmf_drift(
    ctx: GMFContext,
    measure: EmpiricalMeasure,
    n_samples: int = 200,
    t_range: tuple[float, float] = (2.0, 6.0),
    seed: int = 0,
) -> GMFReport:
    """Compare empirical ball masses against the formula on random (z, t).

    Centres are atoms drawn with probability proportional to their mass
    (typical points of the measure); t is uniform on the window.  Rows
    record (z, t, k, rho, mass, formula value, log ratio).
    """
    rng = np.random.default_rng(seed)
    idx = rng.choice(measure.n, size=n_samples, p=measure.weights)
    ts = rng.uniform(t_range[0], t_range[1], size=n_samples)
    rows = []
    n_zero = 0
    for i, t in zip(idx, ts):
        row = measure.coords[i]
        z = complex(row[0], row[1] if measure.d == 2 else 0.0)
        mass = ball_mass(measure, row, math.exp(-t))
        if mass <= 0.0:
            n_zero += 1
            continue
        k, rho = k_and_rho(ctx, z, float(t))
        g = math.exp(-float(t) * ctx.delta - rho * (ctx.delta - k))
        rows.append((z, float(t), k, rho, mass, g, math.log(mass / g)))
    if len(rows) < 8:
        raise ValueError("too few usable samples; enlarge the measure budget")
    ts_used = np.array([r[1] for r in rows])
    logr = np.array([r[6] for r in rows])
    fit = linregress(ts_used, logr)
    return GMFReport(
        slope=float(fit.slope),
        spread=float(logr.max() - logr.min()),
        rows=tuple(rows),
        n_zero_mass=n_zero,
    )


def format_gmf_report(report: GMFReport) -> str:
    lines = [
        f"# gmf drift slope={report.slope:.6g} spread={report.spread:.6g} "
        f"zero_mass={report.n_zero_mass}",
        "t,k,rho,mass,gmf,log_ratio",
    ]
    for z, t, k, rho, mass, g, lr in report.rows:
        lines.append(f"{t:.6g},{k},{rho:.6g},{mass:.6g},{g:.6g},{lr:.6g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# regularity exponents of the measure
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularityEstimate:
    """Extremal mass-ratio exponent with its witnessing ball pair."""

    value: float
    direction: str
    witness: dict
    window: dict

    def recheck(self) -> float:
        """Recompute the exponent from the stored witness masses."""
        w = self.witness
        return math.log(w["mass_R"] / w["mass_r"]) / math.log(w["R"] / w["r"])


def regularity_exponents(
    measure: EmpiricalMeasure,
    *,
    radii: Optional[Sequence[float]] = None,
    ratios: Sequence[float] = (8.0, 64.0),
    n_centers: int = 256,
    extra_centers: Optional[np.ndarray] = None,
    min_atoms: int = 32,
    seed: int = 0,
) -> tuple[RegularityEstimate, RegularityEstimate]:
    """Extremal exponents of mass ratios of concentric balls.

    Sweeping centres (a farthest-point sample of the atoms plus any
    supplied extra centres, typically detected parabolic points) and
    scale pairs (R, R/ratio), the upper estimate is the largest observed
    log(mass ratio) / log(scale ratio) and the lower estimate the
    smallest.  Scales below the measure's reliable resolution are
    refused; scale ratios must be at least 8 so the exponent is read
    over a genuine scale separation; the inner ball must hold at least
    ``min_atoms`` atoms' worth of mass, since the extremes of a sweep
    are exactly where sampling graininess shows up first.
    """
    if measure.n < 16:
        raise ValueError("measure has fewer than 16 atoms; enlarge the budget")
    for ratio in ratios:
        if ratio < MIN_RATIO:
            raise ValueError(f"scale ratio {ratio} is below the minimum {MIN_RATIO}")
    min_mass = min(float(min_atoms), measure.n / 4.0) / measure.n
    floor = measure.resolution
    if radii is None:
        top = measure.extent() / 4.0
        lo = floor * min(ratios)
        if top <= lo:
            radii = [top]
        else:
            radii = np.geomspace(top, lo, 8)
    centers_idx = _farthest_point_sample(measure.coords, n_centers, seed)
    centers = measure.coords[centers_idx]
    if extra_centers is not None:
        extra = np.atleast_2d(np.asarray(extra_centers, dtype=float))
        centers = np.vstack([centers, extra]) if len(centers) else extra
    if len(centers) == 0:
        raise ValueError("no centres to sweep; raise n_centers or pass extras")

    best_hi = None
    best_lo = None
    n_pairs = 0
    for R in radii:
        R = float(R)
        if R < floor:
            continue
        mass_R = _ball_masses(measure, centers, R)
        for ratio in ratios:
            r = R / float(ratio)
            if r < floor:
                continue
            mass_r = _ball_masses(measure, centers, r)
            ok = (mass_r >= min_mass) & (mass_R > 0.0)
            if not ok.any():
                continue
            slopes = np.full(len(centers), np.nan)
            slopes[ok] = np.log(mass_R[ok] / mass_r[ok]) / math.log(ratio)
            n_pairs += int(ok.sum())
            hi = int(np.nanargmax(slopes))
            lo = int(np.nanargmin(slopes))
            for pick, best, is_hi in ((hi, best_hi, True), (lo, best_lo, False)):
                cand = (
                    float(slopes[pick]),
                    {
                        "center": centers[pick].tolist(),
                        "R": R,
                        "r": r,
                        "mass_R": float(mass_R[pick]),
                        "mass_r": float(mass_r[pick]),
                    },
                )
                if is_hi and (best_hi is None or cand[0] > best_hi[0]):
                    best_hi = cand
                if not is_hi and (best_lo is None or cand[0] < best_lo[0]):
                    best_lo = cand
    if best_hi is None:
        raise MeasureScaleError(
            "no admissible scale pair above the measure's reliable resolution"
        )
    window = {
        "radii": [float(R) for R in radii],
        "ratios": [float(x) for x in ratios],
        "floor": floor,
        "n_pairs": n_pairs,
    }
    upper = RegularityEstimate(
        value=best_hi[0], direction="upper", witness=best_hi[1], window=window
    )
    lower = RegularityEstimate(
        value=best_lo[0], direction="lower", witness=best_lo[1], window=window
    )
    return upper, lower


def upper_regularity(measure: EmpiricalMeasure, **kw) -> RegularityEstimate:
    return regularity_exponents(measure, **kw)[0]


def lower_regularity(measure: EmpiricalMeasure, **kw) -> RegularityEstimate:
    return regularity_exponents(measure, **kw)[1]


# ---------------------------------------------------------------------------
# local dimensions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LocalDimension:
    """Running-slope summary of log mass over a window of scales.

    Iterating yields (lower, upper); ``slope`` is the least-squares
    slope over the whole window, the stablest single-number reading.
    """

    lower: float
    upper: float
    slope: float
    ts: tuple
    log_masses: tuple

    def __iter__(self):
        yield self.lower
        yield self.upper


def local_dimension(
    measure: EmpiricalMeasure,
    z,
    t_window: tuple[float, float] = (2.0, 6.0),
    n_steps: int = 13,
) -> LocalDimension:
    """Local scaling exponents of the measure at z.

    Ball masses are read at radii e^-t for t on a uniform grid over the
    window; the returned pair is the (min, max) of the slopes between
    consecutive grid points.  Zero mass at the largest scale means z is
    too far from the support for the window and is an error; zero mass
    at finer scales truncates the window (recorded by the grid length).
    """
    t0, t1 = float(t_window[0]), float(t_window[1])
    if not (0 < t0 < t1):
        raise ValueError("need 0 < t_min < t_max")
    row = _center_coords(measure, z)
    if math.exp(-t1) < measure.resolution:
        raise MeasureScaleError(
            f"window reaches e^-{t1:.3g} below the reliable resolution "
            f"{measure.resolution:.3g}"
        )
    ts = np.linspace(t0, t1, n_steps)
    masses = np.array([ball_mass(measure, row, math.exp(-t)) for t in ts])
    if masses[0] <= 0.0:
        raise ValueError("zero mass at the largest window scale")
    keep = masses > 0.0
    cut = int(np.argmin(keep)) if not keep.all() else len(ts)
    ts = ts[:cut]
    masses = masses[:cut]
    if len(ts) < 3:
        raise ValueError("fewer than 3 usable scales in the window")
    logm = np.log(masses)
    run = (logm[:-1] - logm[1:]) / np.diff(ts)
    fit = linregress(ts, logm)
    return LocalDimension(
        lower=float(run.min()),
        upper=float(run.max()),
        slope=float(-fit.slope),
        ts=tuple(float(t) for t in ts),
        log_masses=tuple(float(v) for v in logm),
    )


# ---------------------------------------------------------------------------
# horoball counting and squeezing
# ---------------------------------------------------------------------------


def horoball_sum(ctx: GMFContext, z, t: float, T: float) -> float:
    """Sum of |H|^delta over family members based near z with mid sizes.

    Counts members whose base lies in B(z, e^-t) and whose diameter lies
    in [e^-T, e^-t); for a conformal density of exponent delta this sum
    is bounded by a multiple of (T - t) times the mass of B(z, e^-t).
    """
    if not (T > t > 0):
        raise ValueError("need T > t > 0")
    zb = _as_boundary(z, ctx.family.d)
    zc = complex(zb.coords[0], zb.coords[1] if ctx.family.d == 2 else 0.0)
    hi = math.exp(-float(t))
    lo = math.exp(-float(T))
    sel = (
        (np.abs(ctx.family.bases - zc) <= hi)
        & (ctx.family.sizes >= lo)
        & (ctx.family.sizes < hi)
    )
    if not sel.any():
        return 0.0
    return float((ctx.family.sizes[sel] ** ctx.delta).sum())


@dataclass(frozen=True)
class SqueezeRow:
    theta: float
    shadow_radius: float
    mass: float
    predicted: float

    @property
    def ratio(self) -> float:
        return self.mass / self.predicted


def squeeze_mass_check(
    ctx: GMFContext,
    measure: EmpiricalMeasure,
    H: hg.Horoball,
    thetas: Sequence[float] = (1.0, 0.5, 0.25, 0.125),
) -> list[SqueezeRow]:
    """Empirical shadow masses of squeezed horoballs against the model.

    For each squeezing factor theta the shadow of theta H is projected
    from the base point and its mass compared with
    theta^(2 delta - k) |H|^delta.  The ratios are only meaningful up to
    the untracked two-sided constant, so consumers look at their spread
    and at the slope of log mass against log theta.
    """
    rows = []
    for theta in thetas:
        if not (0 < theta <= 1):
            raise ValueError("squeezing factors must lie in (0, 1]")
        sh = hg.shadow(hg.squeeze(H, float(theta)), base=ctx.base)
        if sh.radius < measure.resolution:
            raise MeasureScaleError(
                f"shadow radius {sh.radius:.3g} at theta={theta} is below "
                f"the reliable resolution {measure.resolution:.3g}"
            )
        mass = ball_mass(measure, sh.center, sh.radius)
        predicted = theta ** (2.0 * ctx.delta - H.rank) * H.size**ctx.delta
        rows.append(
            SqueezeRow(
                theta=float(theta),
                shadow_radius=float(sh.radius),
                mass=mass,
                predicted=float(predicted),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# deep-excursion witness
# ---------------------------------------------------------------------------


def ureg_witness(
    group: GroupPresentation,
    cusp: Cusp,
    n: int,
    family: HoroballFamily,
    z0: Optional[complex] = None,
) -> tuple[hg.BoundaryPoint, float, float]:
    """A limit point with a long horoball excursion near the cusp.

    Pushing a fixed limit point z0 toward the cusp point with the n-th
    power of the cusp's parabolic yields z = f^n(z0).  T is the exit
    time of the ray toward z from the cusp's horoball.  The earlier time
    t is fixed by the classical picture: u is the point of the horoball
    boundary (in the plane spanned by the cusp point, z, and the exit
    point) at hyperbolic distance 1 from the exit point on the far side
    from the cusp, and z_t is the ray point directly above u once the
    cusp is rotated to infinity.  By construction the escape depth at
    (z, t) is at least T - t - 1, which is what makes the pair a
    mass-ratio witness: both scales see essentially the cusp's rank.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if cusp.point.is_infinity:
        raise ValueError("conjugate the cusp away from infinity first")
    d = group.d
    p = complex(cusp.point.coords[0], cusp.point.coords[1] if d == 2 else 0.0)

    i = int(np.argmin(np.abs(family.bases - p))) if len(family.bases) else -1
    if i < 0 or abs(family.bases[i] - p) > 1e-8 * max(1.0, abs(p)):
        raise ValueError("the family has no horoball at the cusp point")
    H_p = hg.Horoball(cusp.point, float(family.sizes[i]), int(family.ranks[i]))

    if z0 is None:
        far = int(np.argmax(np.abs(family.bases - p)))
        z0 = complex(family.bases[far])
        if abs(z0 - p) < 1e-8:
            raise ValueError("no limit point away from the cusp is available")

    fn = hg.MobiusMap(np.linalg.matrix_power(cusp.generator.matrix, n))
    z = hg._apply_boundary_mat(fn.matrix, complex(z0))
    if z is None:
        raise ValueError("z0 maps to infinity; choose a different z0")
    zb = hg.BoundaryPoint(hg.HALFSPACE, (z.real,) if d == 1 else (z.real, z.imag))

    base = hg.origin(d, hg.HALFSPACE)
    times = hg.horoball_crossing_times(zb, H_p, base=base)
    if times is None:
        raise ValueError("the ray toward f^n(z0) misses the horoball; increase n")
    T = float(times[1])
    if not math.isfinite(T):
        raise ValueError("z equals the cusp point; the ray never exits")

    # rotate the cusp to infinity: the horoball becomes a height plane
    M = hg._mobius_to_infinity(p)
    Hc = hg.apply_horoball(M, H_p, d=d)
    eta = float(Hc.size)
    ob = hg.apply(M, base)
    wo, ho = hg._hs_interior(ob)
    zc = hg._hs_boundary(hg.apply(M, zb))
    if zc is None:
        raise ValueError("z coincides with the cusp point; increase n is futile")

    # the base, z, the exit point and the cusp are coplanar, so after the
    # rotation everything lives in the vertical plane over one line
    axis = zc - wo
    axis_len = abs(axis)
    if axis_len < 1e-13:
        raise ValueError("degenerate configuration: z sits under the base")
    e = axis / axis_len
    zT = hg.apply(M, hg.geodesic_point(zb, T, base=base))
    wT, hT = hg._hs_interior(zT)
    xi_T = ((wT - wo) / e).real

    # semicircle carrying the ray in (xi, h) coordinates
    xi_z = axis_len
    xi_c = (xi_z * xi_z - ho * ho) / (2.0 * xi_z)
    rad = math.hypot(xi_c, ho)

    # boundary-circle point at hyperbolic distance 1 from the exit point,
    # on whichever side is farther from the cusp in the original chart
    lam = 2.0 * eta * math.sinh(0.5)
    Minv = M.inverse()
    candidates = []
    for xi_u in (xi_T - lam, xi_T + lam):
        wu = wo + xi_u * e
        coords = (wu.real, eta) if d == 1 else (wu.real, wu.imag, eta)
        back = hg.apply(Minv, hg.InteriorPoint(hg.HALFSPACE, coords))
        wb, hb = hg._hs_interior(back)
        candidates.append((math.hypot(abs(wb - p), hb), xi_u))
    xi_u = max(candidates)[1]

    under = rad * rad - (xi_u - xi_c) ** 2
    if under <= 0:
        raise ValueError("the normal foot misses the ray; increase n")
    h_t = math.sqrt(under)
    if h_t <= eta:
        raise ValueError("the normal foot lies outside the horoball; increase n")
    wu = wo + xi_u * e
    coords = (wu.real, h_t) if d == 1 else (wu.real, wu.imag, h_t)
    zt = hg.InteriorPoint(hg.HALFSPACE, coords)
    t = hg.hyp_distance(ob, zt)
    return zb, float(t), T
