"""Dimension estimators for finite point clouds.

A :class:`PointCloud` is a finite sample of a bounded set together with
the resolution it was produced at; every estimator refuses to look below
twice that resolution, since structure there is sampling artefact.

Estimators return a :class:`DimensionEstimate` carrying the headline
value, the raw (unclamped) fit, and enough diagnostics to judge the fit
quality: scales, counts, regression stderr, and for the extremal
estimators the witness ball achieving the extreme.

Box dimension is a least-squares slope of log-covering counts.  Assouad
and lower dimensions are extrema of local covering exponents over
sampled windows (a centre x and an outer radius R).  With a single
ratio the window exponent is the two-scale quotient
log N_r(B(x, R)) / log(R / r); with several ratios it is the
least-squares slope of log N against log(R / r) across the inner
scales, which cancels the window's multiplicative constant (a ball
that is nearly full at one scale no longer reads as inflated
dimension).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import linregress

BALL = "ball"
HALFSPACE = "halfspace"

# estimators ignore scales below this multiple of the sampling resolution
MIN_SCALE_FACTOR = 2.0
# number of deterministic grid offsets tried per covering count
GRID_OFFSETS = 3


def worker_count() -> int:
    """Thread budget for sweep parallelism, capped by KLEINIAN_DIM_THREADS."""
    n = os.cpu_count() or 1
    env = os.environ.get("KLEINIAN_DIM_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return n


@dataclass
class PointCloud:
    """Finite sample of a boundary set.

    ``coords`` has one row per point: d columns of planar coordinates in
    the halfspace model, d+1 columns of unit-sphere coordinates in the
    ball model.  ``resolution`` is the scale down to which the sample is
    trusted to resolve the underlying set.
    """

    coords: np.ndarray
    model: str
    d: int
    resolution: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if self.model not in (BALL, HALFSPACE):
            raise ValueError(f"unknown model {self.model!r}")
        if self.d not in (1, 2):
            raise ValueError("boundary dimension must be 1 or 2")
        expected = self.d if self.model == HALFSPACE else self.d + 1
        if self.coords.shape[1] != expected:
            raise ValueError(
                f"{self.model} cloud with d={self.d} needs {expected} columns, "
                f"got {self.coords.shape[1]}"
            )
        if not (self.resolution > 0):
            raise ValueError("resolution must be positive")

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    def extent(self) -> float:
        """Bounding box diagonal, an upper bound for the diameter."""
        if self.n == 0:
            return 0.0
        span = self.coords.max(axis=0) - self.coords.min(axis=0)
        return float(np.linalg.norm(span))

    def save(self, path: str) -> None:
        tmp = f"{path}.tmp.{os.getpid()}"
        header = f"kleindim-cloud model={self.model} d={self.d} resolution={self.resolution!r}"
        np.savetxt(tmp, self.coords, header=header, fmt="%.17g")
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "PointCloud":
        with open(path) as fh:
            first = fh.readline()
        if "kleindim-cloud" not in first:
            raise ValueError(f"{path} is not a kleindim point cloud file")
        fields = dict(tok.split("=", 1) for tok in first.split() if "=" in tok)
        coords = np.loadtxt(path, ndmin=2)
        return cls(
            coords=coords,
            model=fields["model"],
            d=int(fields["d"]),
            resolution=float(fields["resolution"]),
            meta={"source": path},
        )


@dataclass(frozen=True)
class CloudSummary:
    n_points: int
    extent: float
    resolution: float
    nn_median: float


def summarize(cloud: PointCloud) -> CloudSummary:
    nn = math.nan
    if cloud.n >= 2:
        tree = cKDTree(cloud.coords)
        dd, _ = tree.query(cloud.coords, k=2)
        nn = float(np.median(dd[:, 1]))
    return CloudSummary(cloud.n, cloud.extent(), cloud.resolution, nn)


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    method: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __float__(self) -> float:
        return self.value


# ---------------------------------------------------------------------------
# covering counts
# ---------------------------------------------------------------------------


def _cell_ids(coords: np.ndarray, r: float, offset: np.ndarray) -> np.ndarray:
    cells = np.floor((coords - offset) / r).astype(np.int64)
    k = cells.shape[1]
    if k == 1:
        return cells[:, 0]
    lo = cells.min(axis=0)
    cells = cells - lo  # nonnegative, keeps the packing collision free
    if k == 2 and cells.max() < 2**31:
        return (cells[:, 0] << 32) | cells[:, 1]
    if k == 3 and cells.max() < 2**20:
        return (cells[:, 0] << 42) | (cells[:, 1] << 21) | cells[:, 2]
    # fallback: exact row dedup
    rows = np.ascontiguousarray(cells)
    return np.unique(rows, axis=0, return_inverse=True)[1]


def covering_count(coords: np.ndarray, r: float, offsets: int = GRID_OFFSETS) -> int:
    """Number of r-grid cells hit, minimized over a few grid offsets.

    The minimum over offsets removes the worst of the grid alignment
    noise while staying a genuine covering count at scale r.
    """
    if len(coords) == 0:
        return 0
    rng = np.random.default_rng(12345)
    best = None
    for i in range(max(1, offsets)):
        off = np.zeros(coords.shape[1]) if i == 0 else rng.uniform(0.0, r, coords.shape[1])
        n = len(np.unique(_cell_ids(coords, r, off)))
        best = n if best is None else min(best, n)
    return int(best)


def _scale_window(cloud: PointCloud, scales: Optional[Sequence[float]], n_scales: int):
    floor = MIN_SCALE_FACTOR * cloud.resolution
    if scales is not None:
        arr = np.asarray(sorted(set(float(s) for s in scales), reverse=True))
        arr = arr[arr >= floor]
        return arr
    top = cloud.extent() / 4.0
    if top <= floor:
        return np.asarray([max(top, floor)])
    return np.geomspace(top, floor, n_scales)


# ---------------------------------------------------------------------------
# box dimension
# ---------------------------------------------------------------------------


def _trivial_estimate(method: str) -> DimensionEstimate:
    """A one-point set has every dimension equal to zero."""
    return DimensionEstimate(
        value=0.0, method=method, diagnostics={"trivial": True}
    )


def box_dimension(
    cloud: PointCloud,
    scales: Optional[Sequence[float]] = None,
    n_scales: int = 12,
) -> DimensionEstimate:
    """Upper box dimension estimate from a log-log covering count fit."""
    if len(cloud.coords) < 2:
        return _trivial_estimate("box")
    rs = _scale_window(cloud, scales, n_scales)
    if len(rs) < 4:
        raise ValueError(
            "need at least 4 usable scales above twice the resolution; "
            f"got {len(rs)} (resolution {cloud.resolution:g})"
        )
    counts = np.array([covering_count(cloud.coords, float(r)) for r in rs])
    fit = linregress(np.log(1.0 / rs), np.log(counts))
    value = float(np.clip(fit.slope, 0.0, cloud.d))
    return DimensionEstimate(
        value=value,
        method="box",
        diagnostics={
            "slope_raw": float(fit.slope),
            "stderr": float(fit.stderr),
            "r2": float(fit.rvalue**2),
            "scales": rs.tolist(),
            "counts": counts.tolist(),
        },
    )


# ---------------------------------------------------------------------------
# Assouad and lower dimensions
# ---------------------------------------------------------------------------


def _farthest_point_sample(coords: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Indices of a k-point farthest-point subsample (2-approx net)."""
    n = len(coords)
    if k <= 0:
        return np.empty(0, dtype=np.intp)
    rng = np.random.default_rng(seed)
    if n > 50_000:
        pool = rng.choice(n, size=50_000, replace=False)
    else:
        pool = np.arange(n)
    pts = coords[pool]
    k = min(k, len(pool))
    chosen = [int(rng.integers(len(pool)))]
    dist = np.linalg.norm(pts - pts[chosen[0]], axis=1)
    for _ in range(k - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(pts - pts[nxt], axis=1))
    return pool[np.asarray(chosen)]


def _window_slopes(
    cloud: PointCloud,
    radii: Optional[Sequence[float]],
    ratios: Sequence[float],
    n_centers: int,
    seed: int,
):
    """All (slope, witness) pairs of local covering exponents.

    A window is a centre x with an outer radius R; its exponent comes
    from the covering counts of B(x, R) at the inner scales r = R/q
    over the requested ratios q.  One ratio gives the plain quotient
    log N / log(R/r).  Several ratios give the least-squares slope of
    log N against log(R/r), so the window's multiplicative constant
    drops out instead of polluting the exponent by log C / log q.

    A window only contributes when every requested inner scale sits
    above the resolution floor; mixing windows fitted over different
    scale sets would make the extrema incomparable.
    """
    coords = cloud.coords
    floor = MIN_SCALE_FACTOR * cloud.resolution
    ratios = sorted(float(q) for q in ratios)
    if not ratios or ratios[0] <= 1.0:
        raise ValueError("every ratio must exceed 1")
    if radii is None:
        top = cloud.extent() / 4.0
        lo = floor * ratios[-1]
        if top <= lo:
            radii = [top]
        else:
            radii = np.geomspace(top, lo, 8)
    centers_idx = _farthest_point_sample(coords, n_centers, seed)
    centers = coords[centers_idx]
    tree = cKDTree(coords)
    log_q = np.log(ratios)
    out = []
    for R in radii:
        R = float(R)
        scales = [R / q for q in ratios]
        if scales[-1] < floor * (1.0 - 1e-9):
            continue
        hits = tree.query_ball_point(centers, R)
        for ci, idx in enumerate(hits):
            if not idx:
                continue
            ball = coords[idx]
            counts = [covering_count(ball, r) for r in scales]
            if len(ratios) == 1:
                slope = math.log(counts[0]) / log_q[0]
                witness = {
                    "center": centers[ci].tolist(),
                    "R": R,
                    "r": scales[0],
                    "count": counts[0],
                    "ball_points": len(idx),
                }
            else:
                slope = float(linregress(log_q, np.log(counts)).slope)
                witness = {
                    "center": centers[ci].tolist(),
                    "R": R,
                    "scales": scales,
                    "counts": counts,
                    "ball_points": len(idx),
                }
            out.append((slope, witness))
    if not out:
        raise ValueError(
            "no sample window resolves every requested ratio above twice "
            "the resolution; supply coarser radii or smaller ratios"
        )
    return out


def assouad_dimension(
    cloud: PointCloud,
    radii: Optional[Sequence[float]] = None,
    ratios: Sequence[float] = (8.0, 64.0),
    n_centers: int = 512,
    seed: int = 0,
) -> DimensionEstimate:
    """Assouad dimension estimate: worst-case local covering exponent."""
    if len(cloud.coords) < 2:
        return _trivial_estimate("assouad")
    slopes = _window_slopes(cloud, radii, ratios, n_centers, seed)
    slopes.sort(key=lambda t: (-t[0], repr(t[1])))
    best, witness = slopes[0]
    return DimensionEstimate(
        value=float(np.clip(best, 0.0, cloud.d)),
        method="assouad",
        diagnostics={"slope_raw": best, "witness": witness, "n_samples": len(slopes)},
    )


def lower_dimension(
    cloud: PointCloud,
    radii: Optional[Sequence[float]] = None,
    ratios: Sequence[float] = (8.0, 64.0),
    n_centers: int = 512,
    seed: int = 0,
) -> DimensionEstimate:
    """Lower dimension estimate: best-case (thinnest) local covering exponent."""
    if len(cloud.coords) < 2:
        return _trivial_estimate("lower")
    slopes = _window_slopes(cloud, radii, ratios, n_centers, seed)
    slopes.sort(key=lambda t: (t[0], repr(t[1])))
    best, witness = slopes[0]
    return DimensionEstimate(
        value=float(np.clip(best, 0.0, cloud.d)),
        method="lower",
        diagnostics={"slope_raw": best, "witness": witness, "n_samples": len(slopes)},
    )


# ---------------------------------------------------------------------------
# orbital growth exponent
# ---------------------------------------------------------------------------


def poincare_exponent(
    dists,
    t_valid: Optional[float] = None,
    window: float = 3.5,
) -> DimensionEstimate:
    """Critical exponent estimate from orbit point distances.

    ``dists`` is either an array of d(o, g o) values or an object with
    ``dists`` and ``t_valid`` attributes (an enumerated orbit).  The
    headline value is the least-squares slope of log N(t) over the last
    ``window`` units before the completeness horizon; an independent
    annulus-sum estimate is reported in the diagnostics together with
    the disagreement between the two.
    """
    if hasattr(dists, "dists"):
        if t_valid is None:
            t_valid = getattr(dists, "t_valid", None)
        dists = dists.dists
    dd = np.sort(np.asarray(dists, dtype=float))
    if t_valid is None:
        t_valid = float(dd[-1])
    t_hi = min(float(t_valid), float(dd[-1]))
    t_lo = max(t_hi - window, float(dd[0]) + 0.5)
    if t_hi - t_lo < 1.0:
        raise ValueError("orbit too shallow to fit a growth rate")
    ts = np.linspace(t_lo, t_hi, 25)
    counts = np.searchsorted(dd, ts, side="right")
    if counts[0] < 2:
        raise ValueError("orbit too sparse in the fit window")
    fit = linregress(ts, np.log(counts))
    cumulative = float(fit.slope)

    annulus = _annulus_exponent(dd, t_hi)
    disagreement = abs(cumulative - annulus) if not math.isnan(annulus) else math.nan
    return DimensionEstimate(
        value=cumulative,
        method="poincare",
        diagnostics={
            "stderr": float(fit.stderr),
            "annulus": annulus,
            "disagreement": disagreement,
            "window": (t_lo, t_hi),
            "n_points": int(counts[-1]),
        },
    )


def _annulus_exponent(sorted_dists: np.ndarray, t_hi: float) -> float:
    """Exponent s at which the partial sums over unit annuli stop growing."""
    n_hi = int(math.floor(t_hi))
    n_lo = max(0, n_hi - 5)
    if n_hi - n_lo < 3:
        return math.nan
    edges = np.arange(n_lo, n_hi + 1, dtype=float)
    idx = np.searchsorted(sorted_dists, edges, side="right")
    if np.any(np.diff(idx) == 0):
        return math.nan

    centers = []
    for i in range(len(edges) - 1):
        centers.append(sorted_dists[idx[i] : idx[i + 1]])

    def annulus_slope(s: float) -> float:
        logs = [math.log(np.exp(-s * c).sum()) for c in centers]
        ns = edges[:-1] + 0.5
        return float(linregress(ns, logs).slope)

    lo, hi = 0.0, 5.0
    # annulus sums grow like e^{(delta - s) n}: bisect the flat point
    f_lo = annulus_slope(lo)
    if f_lo <= 0:
        return 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if annulus_slope(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
