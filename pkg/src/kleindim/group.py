"""Finitely generated Kleinian and Fuchsian groups.

A :class:`GroupPresentation` is a finite list of Moebius generators with a
declared boundary dimension.  The heavy lifting is orbit enumeration: a
breadth-first walk over reduced words with vectorized matrix products,
grid-canonical deduplication and a distance prune, producing the orbit of
the canonical base point together with a completeness horizon up to which
the element list is believed exhaustive.

On top of the enumeration sit parabolic/cusp detection with rank
computation, construction of a disjoint invariant horoball family (one
reference horoball per detected cusp orbit, shrunk by a dyadic factor
until disjoint), and limit set sampling by radial projection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from . import hypgeom as hg
from .estdim import PointCloud

# more than this many distinct elements within distance 1/2 of the base
# point is taken as proof of non-discreteness
NONDISCRETE_COUNT = 500
NONDISCRETE_RADIUS = 0.5
# distance slack for expanding words whose prefixes overshoot the target
DEFAULT_SLACK = 2.5
# rows of the frontier expanded per vectorized chunk
EXPAND_CHUNK = 200_000

_FNV_OFFSET = np.uint64(0xCBF29CE484222325)
_FNV_PRIME = np.uint64(0x100000001B3)


class NonDiscreteError(ValueError):
    """The generators produced an implausibly dense orbit."""


class CuspDetectionError(ValueError):
    """Inconsistent parabolic data while building a horoball family."""


@dataclass(frozen=True)
class GroupPresentation:
    """Finitely many Moebius generators plus a boundary dimension.

    ``metadata`` carries optional construction facts used downstream:
    ``known_delta``, ``k_min``/``k_max`` (cusp ranks), ``gap_point`` (a
    boundary point in the complement of the limit set, for conjugating an
    unbounded limit set into a bounded chart), ``resolution_floor``,
    ``fixed_point_sampling``, ``geometrically_finite``.
    """

    generators: tuple[hg.MobiusMap, ...]
    d: int
    name: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.generators:
            raise ValueError("need at least one generator")
        if self.d not in (1, 2):
            raise ValueError("boundary dimension must be 1 or 2")
        object.__setattr__(self, "generators", tuple(self.generators))
        for g in self.generators:
            if g.is_identity:
                raise ValueError("identity is not a useful generator")
            if self.d == 1 and float(np.abs(g.matrix.imag).max()) > 1e-10:
                raise ValueError("d=1 requires real generator matrices")

    @property
    def n_generators(self) -> int:
        return len(self.generators)


def conjugated_presentation(group: GroupPresentation, q: hg.MobiusMap) -> GroupPresentation:
    """The presentation of q Gamma q^-1, with coordinate metadata dropped."""
    qi = q.inverse().matrix
    gens = tuple(
        hg.MobiusMap(q.matrix @ g.matrix @ qi, label=g.label) for g in group.generators
    )
    meta = {k: v for k, v in group.metadata.items() if k != "gap_point"}
    meta["conjugated"] = True
    d = group.d
    if d == 1 and any(float(np.abs(g.matrix.imag).max()) > 1e-10 for g in gens):
        d = 2  # a complex conjugator moves a Fuchsian group off the real line
    return GroupPresentation(gens, d, name=group.name, metadata=meta)


def bounded_model(group: GroupPresentation) -> tuple[GroupPresentation, hg.MobiusMap]:
    """Conjugate a known gap point to infinity, bounding the limit set.

    Returns the (possibly unchanged) presentation and the conjugator used.
    """
    gap = group.metadata.get("gap_point")
    if gap is None:
        return group, hg.identity_map()
    p = complex(gap)
    q = hg.MobiusMap(np.array([[0.0, -1.0], [1.0, -p]], dtype=complex))
    return conjugated_presentation(group, q), q


# ---------------------------------------------------------------------------
# vectorized canonical form and identification keys
# ---------------------------------------------------------------------------


def _canonicalize_signs(mats: np.ndarray) -> np.ndarray:
    """Vectorized PSL sign fix matching MobiusMap's canonical form."""
    flat = mats.reshape(len(mats), 4)
    scale = np.abs(flat).max(axis=1)
    tol = hg.ENTRY_TOL * scale
    big = np.abs(flat) > tol[:, None]
    first = np.argmax(big, axis=1)
    v = flat[np.arange(len(flat)), first]
    use_re = np.abs(v.real) > tol
    s = np.where(use_re, np.sign(v.real), np.sign(v.imag))
    s[s == 0] = 1.0
    return mats * s[:, None, None]


def _key_ints(mats: np.ndarray) -> np.ndarray:
    flat = mats.reshape(len(mats), 4)
    parts = np.empty((len(flat), 8))
    parts[:, 0::2] = flat.real
    parts[:, 1::2] = flat.imag
    cells = np.clip(np.round(parts / hg.MATRIX_GRID), -hg.KEY_CLAMP, hg.KEY_CLAMP)
    return cells.astype(np.int64)


def _key_hashes(mats: np.ndarray) -> np.ndarray:
    """64-bit FNV-style hash of the grid-rounded canonical entries."""
    ints = _key_ints(mats).view(np.uint64)
    h = np.full(len(ints), _FNV_OFFSET)
    for k in range(8):
        h = (h ^ ints[:, k]) * _FNV_PRIME
    return h.view(np.int64)


def _orbit_dists(mats: np.ndarray) -> np.ndarray:
    fro = (np.abs(mats) ** 2).sum(axis=(1, 2))
    return np.arccosh(np.maximum(fro / 2.0, 1.0))


# ---------------------------------------------------------------------------
# orbit enumeration
# ---------------------------------------------------------------------------


@dataclass
class OrbitData:
    """Enumerated orbit of the canonical base point.

    ``matrices`` holds one canonical unit-determinant matrix per distinct
    group element with d(o, g o) <= the requested distance; ``t_valid`` is
    the horizon up to which the listing is believed complete (equal to the
    requested distance unless a budget truncated the walk).
    """

    matrices: np.ndarray
    dists: np.ndarray
    word_lengths: np.ndarray
    t_valid: float
    truncated: bool
    d: int
    words: Optional[tuple[bytes, ...]] = None
    group: Optional[GroupPresentation] = None

    @property
    def n(self) -> int:
        return len(self.dists)

    def orbit_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Halfspace coordinates (w complex, h > 0) of every g(o)."""
        m = self.matrices
        a, b = m[:, 0, 0], m[:, 0, 1]
        c, dd = m[:, 1, 0], m[:, 1, 1]
        big_d = np.abs(c) ** 2 + np.abs(dd) ** 2
        w = (b * dd.conjugate() + a * c.conjugate()) / big_d
        return w, 1.0 / big_d

    def boundary_projections(self) -> tuple[np.ndarray, np.ndarray]:
        """Radial projections of the orbit points from the base point.

        Returns (projections, finite_mask); rows with finite_mask False
        project to infinity and carry no planar coordinate.
        """
        w, h = self.orbit_points()
        sep = np.abs(w)
        vertical = sep < 1e-14
        sep_safe = np.where(vertical, 1.0, sep)
        m = (sep_safe**2 + h**2 - 1.0) / (2.0 * sep_safe)
        hyp = np.hypot(m, 1.0)
        ep = np.where(m >= 0, m + hyp, 1.0 / (hyp - m))
        proj = ep * w / sep_safe
        proj[vertical] = 0.0
        finite = ~(vertical & (h >= 1.0))
        return proj, finite


def _generator_stack(group: GroupPresentation) -> np.ndarray:
    mats = []
    for g in group.generators:
        mats.append(g.matrix)
        mats.append(g.inverse().matrix)
    return np.stack(mats)


class _HashSet:
    """Membership structure over int64 hashes: a few sorted chunks,
    consolidated when they pile up, so levels with few new elements do
    not pay a full re-sort of everything seen so far."""

    def __init__(self, initial: np.ndarray) -> None:
        self.chunks: list[np.ndarray] = [np.sort(initial)]
        self.n = len(initial)

    def contains(self, values: np.ndarray) -> np.ndarray:
        out = np.zeros(len(values), dtype=bool)
        for chunk in self.chunks:
            idx = np.searchsorted(chunk, values)
            idx[idx == len(chunk)] = len(chunk) - 1
            out |= chunk[idx] == values
        return out

    def add(self, values: np.ndarray) -> None:
        if not len(values):
            return
        self.chunks.append(np.sort(values))
        self.n += len(values)
        if len(self.chunks) > 8:
            self.chunks = [np.sort(np.concatenate(self.chunks))]


def enumerate_orbit(
    group: GroupPresentation,
    max_dist: Optional[float] = None,
    *,
    max_elements: int = 2_000_000,
    max_word_length: Optional[int] = None,
    keep_words: bool = False,
    slack: float = DEFAULT_SLACK,
) -> OrbitData:
    """Breadth-first enumeration of distinct group elements.

    Elements are reported when d(o, g o) <= max_dist; words are expanded
    while their running distance stays below max_dist + slack, so short
    elements reached only through overshooting prefixes are still found
    as long as the overshoot is under the slack.  Deduplication uses the
    canonical matrix form rounded to a 1e-9 grid, hashed to 64 bits.

    When ``max_elements`` or ``max_word_length`` stops the walk early,
    ``t_valid`` drops to the smallest distance whose ball might be
    incomplete, and ``truncated`` is set.
    """
    if max_dist is None and max_word_length is None:
        raise ValueError("need max_dist or max_word_length")
    report_dist = math.inf if max_dist is None else float(max_dist)
    expand_dist = report_dist + slack
    gens = _generator_stack(group)
    n_letters = len(gens)

    ident = np.eye(2, dtype=complex)
    visited = _HashSet(_key_hashes(ident[None]))
    acc_m = [ident[None].copy()]
    acc_dist = [np.zeros(1)]
    acc_len = [np.zeros(1, dtype=np.int32)]
    acc_words: Optional[list[bytes]] = [b""] if keep_words else None

    frontier = ident[None].copy()
    frontier_last = np.array([255], dtype=np.uint8)  # 255: no previous letter
    frontier_dist = np.zeros(1)
    frontier_words: list[bytes] = [b""]

    truncated = False
    horizon = math.inf
    level = 0
    n_close = 0

    while len(frontier):
        level += 1
        if max_word_length is not None and level > max_word_length:
            truncated = True
            horizon = min(horizon, float(frontier_dist.min()))
            break
        if visited.n >= max_elements:
            truncated = True
            horizon = min(horizon, float(frontier_dist.min()))
            break

        lvl_m, lvl_dist, lvl_last, lvl_hash = [], [], [], []
        lvl_words: list[bytes] = []
        stopped = False
        for start in range(0, len(frontier), EXPAND_CHUNK):
            if visited.n + sum(len(x) for x in lvl_dist) >= max_elements and start > 0:
                truncated = True
                horizon = min(horizon, float(frontier_dist[start:].min()))
                stopped = True
                break
            chunk = frontier[start : start + EXPAND_CHUNK]
            chunk_last = frontier_last[start : start + EXPAND_CHUNK]
            cand = np.einsum("fij,kjl->fkil", chunk, gens).reshape(-1, 2, 2)
            letters = np.tile(np.arange(n_letters, dtype=np.uint8), len(chunk))
            parents = np.repeat(np.arange(len(chunk)), n_letters)
            ok = letters != (np.repeat(chunk_last, n_letters) ^ 1)
            cand, letters, parents = cand[ok], letters[ok], parents[ok]

            dists = _orbit_dists(cand)
            # matrices whose norm overflows double precision are dropped;
            # they sit far beyond any usable horizon
            keep = (dists <= expand_dist) & np.isfinite(dists)
            cand, letters, parents, dists = cand[keep], letters[keep], parents[keep], dists[keep]
            if not len(cand):
                continue
            cand = _canonicalize_signs(cand)
            hashes = _key_hashes(cand)
            _, first_idx = np.unique(hashes, return_index=True)
            first_idx.sort()
            cand, letters, parents, dists, hashes = (
                cand[first_idx],
                letters[first_idx],
                parents[first_idx],
                dists[first_idx],
                hashes[first_idx],
            )
            new = ~visited.contains(hashes)
            if not new.any():
                continue
            lvl_m.append(cand[new])
            lvl_dist.append(dists[new])
            lvl_last.append(letters[new])
            lvl_hash.append(hashes[new])
            if keep_words:
                for p, a in zip(parents[new], letters[new]):
                    lvl_words.append(frontier_words[start + int(p)] + bytes([int(a)]))

        if not lvl_dist:
            if stopped:
                break
            frontier = np.empty((0, 2, 2), dtype=complex)
            continue

        new_m = np.concatenate(lvl_m)
        new_dist = np.concatenate(lvl_dist)
        new_last = np.concatenate(lvl_last)
        new_hash = np.concatenate(lvl_hash)
        # chunks were deduplicated locally; a duplicate can straddle chunks
        _, cross = np.unique(new_hash, return_index=True)
        if len(cross) < len(new_hash):
            cross.sort()
            new_m, new_dist, new_last, new_hash = (
                new_m[cross],
                new_dist[cross],
                new_last[cross],
                new_hash[cross],
            )
            if keep_words:
                lvl_words = [lvl_words[i] for i in cross]

        visited.add(new_hash)

        report = new_dist <= report_dist
        acc_m.append(new_m[report])
        acc_dist.append(new_dist[report])
        acc_len.append(np.full(int(report.sum()), level, dtype=np.int32))
        if keep_words:
            acc_words.extend(w for w, r in zip(lvl_words, report) if r)

        n_close += int((new_dist[report] <= NONDISCRETE_RADIUS).sum())
        if n_close > NONDISCRETE_COUNT:
            raise NonDiscreteError(
                f"{n_close} distinct elements within distance "
                f"{NONDISCRETE_RADIUS} of the base point; the group is "
                "almost certainly non-discrete"
            )

        frontier = new_m
        frontier_last = new_last
        frontier_dist = new_dist
        frontier_words = lvl_words if keep_words else []
        if stopped:
            # the level just created was never expanded either
            horizon = min(horizon, float(new_dist.min()))
            break

    t_valid = min(report_dist, horizon) if truncated else report_dist
    matrices = np.concatenate(acc_m)
    return OrbitData(
        matrices=matrices,
        dists=np.concatenate(acc_dist),
        word_lengths=np.concatenate(acc_len),
        t_valid=float(t_valid),
        truncated=truncated,
        d=group.d,
        words=tuple(acc_words) if keep_words else None,
        group=group,
    )


# ---------------------------------------------------------------------------
# cusp detection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cusp:
    """One detected cusp orbit: a representative fixed point, its rank,
    and a shortest enumerated parabolic fixing it."""

    point: hg.BoundaryPoint
    rank: int
    generator: hg.MobiusMap
    n_conjugates: int


@dataclass(frozen=True)
class CuspSummary:
    cusps: tuple[Cusp, ...]
    k_min: Optional[int]
    k_max: Optional[int]
    n_parabolics: int
    orbit_truncated: bool

    @property
    def has_cusps(self) -> bool:
        return bool(self.cusps)


class _GridIndex:
    """Hash grid over the plane for tolerance-based point identification."""

    def __init__(self, tol: float) -> None:
        self.tol = tol
        self.cells: dict[tuple[int, int], list[int]] = {}
        self.points: list[complex] = []

    def _cell(self, z: complex) -> tuple[int, int]:
        return (int(math.floor(z.real / self.tol)), int(math.floor(z.imag / self.tol)))

    def find(self, z: complex) -> int:
        cx, cy = self._cell(z)
        for nx in (cx - 1, cx, cx + 1):
            for ny in (cy - 1, cy, cy + 1):
                for idx in self.cells.get((nx, ny), ()):
                    if abs(self.points[idx] - z) <= self.tol:
                        return idx
        return -1

    def insert(self, z: complex) -> int:
        idx = len(self.points)
        self.points.append(z)
        self.cells.setdefault(self._cell(z), []).append(idx)
        return idx


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _parabolic_translations(mats: np.ndarray, p: Optional[complex]) -> np.ndarray:
    """Translation parts of parabolics fixing p, read off at infinity."""
    taus = []
    if p is None:
        q = np.eye(2, dtype=complex)
        qi = q
    else:
        q = np.array([[0.0, -1.0], [1.0, -p]], dtype=complex)
        qi = np.array([[-p, 1.0], [-1.0, 0.0]], dtype=complex)
    for m in mats:
        u = q @ m @ qi
        taus.append(complex(u[0, 1] / u[0, 0]))
    return np.asarray(taus)


def _rank_from_translations(taus: np.ndarray, d: int) -> int:
    if d == 1 or len(taus) < 2:
        return 1
    ref = taus[np.argmax(np.abs(taus))]
    cross = np.abs((taus * ref.conjugate()).imag)
    independent = cross > 1e-8 * np.abs(taus) * abs(ref)
    return 2 if independent.any() else 1


def find_cusps(
    orbit: OrbitData,
    *,
    cluster_tol: float = 1e-8,
    max_rank_sample: int = 32,
) -> CuspSummary:
    """Detect parabolic fixed points, group them into cusp orbits.

    Fixed points are clustered with a hash grid at ``cluster_tol``; the
    clusters are then joined into orbits by following generator images.
    The orbit partition is a lower bound on the truth (two clusters whose
    connecting element was not enumerated stay separate); downstream
    horoball construction merges orbits when it finds evidence for it.
    """
    group = orbit.group
    if group is None:
        raise ValueError("orbit does not reference its group presentation")
    m = orbit.matrices
    tr2 = (m[:, 0, 0] + m[:, 1, 1]) ** 2
    nontrivial = orbit.word_lengths > 0
    para = nontrivial & (np.abs(tr2 - 4.0) <= hg.PARABOLIC_TOL)
    not_ident = np.abs(m - np.eye(2)).max(axis=(1, 2)) > 1e-9
    para &= not_ident
    pm = m[para]
    pd = orbit.dists[para]
    plen = orbit.word_lengths[para]
    n_para = len(pm)

    if n_para == 0:
        return CuspSummary((), None, None, 0, orbit.truncated)

    a, c = pm[:, 0, 0], pm[:, 1, 0]
    dd = pm[:, 1, 1]
    scale = np.abs(pm).max(axis=(1, 2))
    at_inf = np.abs(c) <= hg.ENTRY_TOL * scale
    fp = np.zeros(n_para, dtype=complex)
    fin = ~at_inf
    fp[fin] = (a[fin] - dd[fin]) / (2.0 * c[fin])

    cluster_of = np.empty(n_para, dtype=np.int64)
    members: list[list[int]] = []
    cluster_ids: dict[int, int] = {}
    inf_id = -1
    grid = _GridIndex(cluster_tol)
    for i in range(n_para):
        if at_inf[i]:
            if inf_id < 0:
                inf_id = len(members)
                members.append([])
            cluster_of[i] = inf_id
            members[inf_id].append(i)
            continue
        z = complex(fp[i])
        idx = grid.find(z)
        if idx < 0:
            idx = grid.insert(z)
            cluster_ids[idx] = len(members)
            members.append([])
        cl = cluster_ids[idx]
        cluster_of[i] = cl
        members[cl].append(i)

    n_clusters = len(members)
    reps: list[Optional[complex]] = []
    for cl, mem in enumerate(members):
        if inf_id == cl:
            reps.append(None)
        else:
            reps.append(complex(fp[mem[0]]))

    # join clusters connected by a generator image of any member point
    uf = _UnionFind(n_clusters)
    gen_mats = _generator_stack(group)
    for gm in gen_mats:
        ga, gb, gc, gd = gm[0, 0], gm[0, 1], gm[1, 0], gm[1, 1]
        gscale = float(np.abs(gm).max())
        den = gc * fp + gd
        ok = np.abs(den) > 1e-13 * gscale * np.maximum(1.0, np.abs(fp))
        img = (ga * fp + gb) / np.where(ok, den, 1.0)
        inf_img = None if abs(gc) < 1e-13 * gscale else complex(ga / gc)
        for i in range(n_para):
            if at_inf[i]:
                if inf_img is None:
                    tgt = inf_id
                else:
                    gi = grid.find(inf_img)
                    tgt = cluster_ids.get(gi, -1) if gi >= 0 else -1
            elif ok[i]:
                gi = grid.find(complex(img[i]))
                tgt = cluster_ids.get(gi, -1) if gi >= 0 else -1
            else:
                tgt = inf_id
            if tgt >= 0:
                uf.union(int(cluster_of[i]), tgt)

    comp_members: dict[int, list[int]] = {}
    for cl in range(n_clusters):
        comp_members.setdefault(uf.find(cl), []).append(cl)

    cusps = []
    for comp_clusters in comp_members.values():
        elems = [i for cl in comp_clusters for i in members[cl]]
        rank = 1
        if group.d == 2:
            rank_max = 1
            for cl in comp_clusters:
                mem = members[cl]
                order = np.lexsort((pd[mem],))[:max_rank_sample]
                sel = [mem[int(k)] for k in order]
                taus = _parabolic_translations(pm[sel], reps[cl])
                rank_max = max(rank_max, _rank_from_translations(taus, group.d))
                if rank_max == 2:
                    break
            rank = rank_max
        best = min(elems, key=lambda i: (plen[i], pd[i]))
        gen = hg.MobiusMap(pm[best])
        p_best = None if at_inf[best] else complex(fp[best])
        if p_best is None:
            point = hg.infinity()
        elif group.d == 1:
            point = hg.BoundaryPoint(hg.HALFSPACE, (p_best.real,))
        else:
            point = hg.BoundaryPoint(hg.HALFSPACE, (p_best.real, p_best.imag))
        cusps.append(Cusp(point=point, rank=rank, generator=gen, n_conjugates=len(elems)))

    cusps.sort(key=lambda cu: (math.inf,) if cu.point.is_infinity else cu.point.coords)
    ranks = [cu.rank for cu in cusps]
    return CuspSummary(tuple(cusps), min(ranks), max(ranks), n_para, orbit.truncated)


# ---------------------------------------------------------------------------
# invariant horoball families
# ---------------------------------------------------------------------------


@dataclass
class HoroballFamily:
    """Disjoint family of horoballs over the detected cusp orbits.

    ``bases``/``sizes`` describe finite-based horoballs (tangent-point
    diameter convention); an optional member at infinity is a horizontal
    plane at ``inf_height``.  ``theta`` is the dyadic squeeze that was
    applied to the raw family to make it disjoint.  Members based beyond
    ``query_window`` were discarded during construction (they cannot
    contain any point with planar norm inside the window and height at
    most 1), so ``deepest`` only answers queries inside the window.
    """

    bases: np.ndarray
    sizes: np.ndarray
    ranks: np.ndarray
    d: int
    inf_height: Optional[float] = None
    inf_rank: int = 0
    theta: float = 1.0
    query_window: float = math.inf
    n_references: int = 0
    _bins: Optional[list] = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.sizes) + (1 if self.inf_height is not None else 0)

    def to_horoballs(self, min_size: float = 0.0) -> list[hg.Horoball]:
        out = []
        if self.inf_height is not None:
            out.append(hg.Horoball(hg.infinity(), float(self.inf_height), int(self.inf_rank)))
        for p, s, r in zip(self.bases, self.sizes, self.ranks):
            if s < min_size:
                continue
            if self.d == 1:
                bp = hg.BoundaryPoint(hg.HALFSPACE, (p.real,))
            else:
                bp = hg.BoundaryPoint(hg.HALFSPACE, (p.real, p.imag))
            out.append(hg.Horoball(bp, float(s), int(r)))
        return out

    def _octaves(self):
        if self._bins is None:
            self._bins = _size_octave_bins(self.bases, self.sizes)
        return self._bins

    def deepest(self, w: np.ndarray, h: np.ndarray):
        """Escape depth and cusp rank of the member containing each point.

        Points outside every member get depth 0 and rank 0.  The family
        is disjoint, so "the" member is unambiguous.
        """
        w = np.asarray(w, dtype=complex).ravel()
        h = np.asarray(h, dtype=float).ravel()
        if len(w) and float(np.abs(w).max()) > self.query_window:
            raise ValueError(
                "query point outside the family's working window; rebuild "
                "the family from an orbit covering this region"
            )
        depth = np.zeros(len(w))
        rank = np.zeros(len(w), dtype=np.int32)
        if self.inf_height is not None:
            above = h > self.inf_height
            depth[above] = np.log(h[above] / self.inf_height)
            rank[above] = self.inf_rank
        pts = np.column_stack([w.real, w.imag])
        for tree, idx, s_max in self._octaves():
            cand = h <= s_max
            if not cand.any():
                continue
            radii = np.sqrt(np.maximum(s_max * h, 0.0))
            for i in np.flatnonzero(cand):
                hits = tree.query_ball_point(pts[i], radii[i])
                if not hits:
                    continue
                gi = idx[hits]
                q = np.abs(self.bases[gi] - w[i]) ** 2 + h[i] ** 2
                val = self.sizes[gi] * h[i] / q
                j = int(np.argmax(val))
                if val[j] > 1.0 and math.log(val[j]) > depth[i]:
                    depth[i] = math.log(val[j])
                    rank[i] = self.ranks[gi[j]]
        return depth, rank


def _size_octave_bins(bases: np.ndarray, sizes: np.ndarray):
    bins = []
    if len(sizes) == 0:
        return bins
    octave = np.floor(np.log2(sizes)).astype(int)
    pts = np.column_stack([bases.real, bases.imag])
    for o in np.unique(octave):
        idx = np.flatnonzero(octave == o)
        bins.append((cKDTree(pts[idx]), idx, float(2.0 ** (o + 1))))
    return bins


def _horoball_images(mats: np.ndarray, p: Optional[complex]):
    """Images of the unit reference horoball at p under every matrix.

    Returns (finite_bases, finite_sizes, inf_heights).  The reference is
    the tangent horoball of diameter 1 (finite p) or the plane at height
    1 (p = None).  Image sizes are exact, via the derivative formula.
    """
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, dd = mats[:, 1, 0], mats[:, 1, 1]
    scale = np.abs(mats).max(axis=(1, 2))
    if p is None:
        den = c
        pole = np.abs(den) <= 1e-13 * scale
        bases = np.where(pole, 0.0, a) / np.where(pole, 1.0, den)
        sizes = 1.0 / np.abs(np.where(pole, 1.0, den)) ** 2
        inf_heights = np.abs(a[pole]) ** 2
    else:
        den = c * p + dd
        pole = np.abs(den) <= 1e-13 * scale * max(1.0, abs(p))
        num = a * p + b
        bases = np.where(pole, 0.0, num) / np.where(pole, 1.0, den)
        sizes = 1.0 / np.abs(np.where(pole, 1.0, den)) ** 2
        inf_heights = np.abs(num[pole]) ** 2
    return bases[~pole], sizes[~pole], inf_heights


def _max_overlap_ratio(bases: np.ndarray, sizes: np.ndarray, inf_height: Optional[float]) -> float:
    """max over pairs of s_i s_j / |p_i - p_j|^2 (and s_i / H for the plane).

    1.0 means tangency; above 1 means overlap.  Uses size-octave KD trees
    so only plausibly-overlapping pairs are inspected.
    """
    worst = 0.0
    if inf_height is not None and len(sizes):
        worst = float(sizes.max() / inf_height)
    if len(sizes) < 2:
        return worst
    bins = _size_octave_bins(bases, sizes)
    for bi, (tree_i, idx_i, smax_i) in enumerate(bins):
        for tree_j, idx_j, smax_j in bins[bi:]:
            r = math.sqrt(smax_i * smax_j) * (1.0 + 1e-12)
            hits = tree_i.sparse_distance_matrix(tree_j, r, output_type="ndarray")
            if not len(hits):
                continue
            gi = idx_i[hits["i"]]
            gj = idx_j[hits["j"]]
            m = gi < gj
            if not m.any():
                continue
            d2 = hits["v"][m] ** 2
            if (d2 == 0.0).any():
                return math.inf
            worst = max(worst, float((sizes[gi[m]] * sizes[gj[m]] / d2).max()))
    return worst


def _premerge_refs(mats: np.ndarray, refs: list, grid: float = 1e-8) -> _UnionFind:
    """Union cusp references connected by a single enumerated element.

    Cusp detection may split one orbit into many satellite clusters.
    Building horoball images for every satellite multiplies the memory
    bill by the split factor, so references whose points are mapped onto
    each other by some enumerated element are merged beforehand.  The
    size-conflict restart in the family builder remains as a backstop
    for orbit pairs whose connecting element was not enumerated.
    """
    uf = _UnionFind(len(refs))
    pts = [p for p, _ in refs]
    fin = [i for i, p in enumerate(pts) if p is not None]
    inf_i = next((i for i, p in enumerate(pts) if p is None), None)
    if len(fin) + (inf_i is not None) < 2:
        return uf
    a, b = mats[:, 0, 0], mats[:, 0, 1]
    c, dd = mats[:, 1, 0], mats[:, 1, 1]
    scale = np.abs(mats).max(axis=(1, 2))

    def pack(w: np.ndarray, frac: float) -> np.ndarray:
        c0 = np.floor(w.real / grid + frac).astype(np.int64)
        c1 = np.floor(w.imag / grid + frac).astype(np.int64)
        return (c0 << np.int64(32)) | (c1 & np.int64(0xFFFFFFFF))

    fin_pts = np.array([pts[i] for i in fin], dtype=complex)
    fin_ids = np.asarray(fin)
    targets = {}
    for frac in (0.0, 0.5):
        keys = pack(fin_pts, frac)
        order = np.argsort(keys)
        targets[frac] = (keys[order], fin_ids[order])

    for i in fin + ([inf_i] if inf_i is not None else []):
        if pts[i] is None:
            num, den = a, c
        else:
            num, den = a * pts[i] + b, c * pts[i] + dd
        to_inf = np.abs(den) <= 1e-12 * scale
        if inf_i is not None and i != inf_i and bool(to_inf.any()):
            uf.union(i, inf_i)
        w = num[~to_inf] / den[~to_inf]
        for frac in (0.0, 0.5):
            keys, owners = targets[frac]
            kk = pack(w, frac)
            pos = np.searchsorted(keys, kk)
            ok = pos < len(keys)
            hit = np.zeros(len(kk), dtype=bool)
            hit[ok] = keys[pos[ok]] == kk[ok]
            for j in np.unique(owners[pos[hit]]):
                uf.union(i, int(j))
    return uf


def standard_horoballs(
    orbit: OrbitData,
    cusps: Optional[CuspSummary] = None,
    *,
    dedup_grid: float = 1e-9,
    size_rel_tol: float = 1e-6,
    max_shrink_steps: int = 40,
) -> HoroballFamily:
    """Invariant disjoint horoball family from enumerated group elements.

    One unit reference horoball is placed at a representative of each
    detected cusp orbit and pushed around by every enumerated element.
    If two references turn out to generate horoballs at the same base
    point with different sizes, that proves the two detected orbits are
    really one; the later reference is dropped and construction restarts.
    Finally the family is squeezed by a dyadic theta until disjoint.
    """
    if cusps is None:
        cusps = find_cusps(orbit)
    if not cusps.has_cusps:
        raise CuspDetectionError("no parabolic elements found; the group has no cusps")

    refs: list[tuple[Optional[complex], int]] = []
    for cu in cusps.cusps:
        if cu.point.is_infinity:
            refs.append((None, cu.rank))
        else:
            z = cu.point.coords
            refs.append((complex(z[0], 0.0 if len(z) == 1 else z[1]), cu.rank))

    ow, _ = orbit.orbit_points()
    window = max(16.0, 4.0 * float(np.abs(ow).max()) + 8.0)

    uf = _premerge_refs(orbit.matrices, refs)
    components: dict[int, list[int]] = {}
    for i in range(len(refs)):
        components.setdefault(uf.find(i), []).append(i)
    active = []
    for members in components.values():
        winner = min(members)
        pw, _ = refs[winner]
        refs[winner] = (pw, max(refs[mbr][1] for mbr in members))
        active.append(winner)
    active.sort()
    while True:
        bases_l, sizes_l, ranks_l, ref_l = [], [], [], []
        inf_h: list[tuple[float, int, int]] = []  # (height, rank, ref)
        for ri in active:
            p, rank = refs[ri]
            fb, fs, ih = _horoball_images(orbit.matrices, p)
            near = _window_filter(fb, fs, window)
            fb, fs = fb[near], fs[near]
            bases_l.append(fb)
            sizes_l.append(fs)
            ranks_l.append(np.full(len(fs), rank, dtype=np.int32))
            ref_l.append(np.full(len(fs), ri, dtype=np.int32))
            inf_h.extend((float(hh), rank, ri) for hh in ih)
        bases = np.concatenate(bases_l)
        sizes = np.concatenate(sizes_l)
        ranks = np.concatenate(ranks_l)
        ref_of = np.concatenate(ref_l)

        conflict = _dedup_and_find_conflict(bases, sizes, ref_of, dedup_grid, size_rel_tol)
        if isinstance(conflict, tuple) and conflict[0] == "merge":
            # conflicting sizes between references prove their detected
            # orbits coincide; merge every proven pair in one restart
            uf = _UnionFind(len(refs))
            for i, j in conflict[1]:
                if i == j:
                    raise CuspDetectionError(
                        "inconsistent horoball sizes within one cusp orbit; "
                        "parabolic detection is unreliable for this input"
                    )
                uf.union(i, j)
            components: dict[int, list[int]] = {}
            for ri in active:
                components.setdefault(uf.find(ri), []).append(ri)
            for members in components.values():
                if len(members) < 2:
                    continue
                winner = min(members)
                pw, _ = refs[winner]
                refs[winner] = (pw, max(refs[mbr][1] for mbr in members))
                for mbr in members:
                    if mbr != winner:
                        active.remove(mbr)
            continue
        keep = conflict
        bases, sizes, ranks = bases[keep], sizes[keep], ranks[keep]

        inf_height = None
        inf_rank = 0
        if inf_h:
            hs = sorted(set(round(h, 12) for h, _, _ in inf_h))
            if len(hs) > 1:
                lo_ref = min(r for _, _, r in inf_h)
                hi_ref = max(r for _, _, r in inf_h)
                if lo_ref != hi_ref:
                    active.remove(hi_ref)
                    continue
                raise CuspDetectionError(
                    "inconsistent plane heights at the infinite cusp"
                )
            inf_height = float(inf_h[0][0])
            inf_rank = int(inf_h[0][1])
        break

    worst = _max_overlap_ratio(bases, sizes, inf_height)
    # the enumeration base at height 1 must stay strictly outside every
    # member, else rays have no horoball-free start and escape depths
    # lose their normalization; a finite ball swallows it exactly when
    # its diameter exceeds 1 + |base|^2
    base_ratio = float((sizes / (1.0 + np.abs(bases) ** 2)).max()) if len(sizes) else 0.0
    if inf_height is not None:
        base_ratio = max(base_ratio, 1.0 / inf_height)
    m = 0
    if worst > 1.0 + 1e-6:
        m = math.ceil(math.log(worst) / math.log(4.0))
    if base_ratio > 1.0 - 1e-6:
        m = max(m, 1, math.ceil(math.log2(base_ratio / (1.0 - 1e-6))))
    while m <= max_shrink_steps:
        theta = 2.0**-m if m else 1.0
        ih = None if inf_height is None else inf_height / theta
        ok = _max_overlap_ratio(bases, sizes * theta, ih) <= 1.0 + 1e-6
        if len(sizes):
            ok &= float((sizes * theta / (1.0 + np.abs(bases) ** 2)).max()) <= 1.0 - 1e-6
        if ih is not None:
            ok &= ih >= 1.0 + 1e-6
        if ok:
            break
        m += 1
    if m > max_shrink_steps:
        raise CuspDetectionError(
            f"family needs theta below 2^-{max_shrink_steps}; "
            "the input looks degenerate"
        )
    fam = HoroballFamily(
        bases=bases,
        sizes=sizes * theta,
        ranks=ranks,
        d=orbit.d,
        inf_height=None if inf_height is None else inf_height / theta,
        inf_rank=inf_rank,
        theta=theta,
        query_window=window,
        n_references=len(active),
    )
    check = _max_overlap_ratio(fam.bases, fam.sizes, fam.inf_height)
    if check > 1.0 + 1e-6:
        raise CuspDetectionError(
            f"family still overlaps after squeeze (ratio {check:.3g})"
        )
    return fam


def _dedup_and_find_conflict(bases, sizes, ref_of, grid, rel_tol):
    """Indices of base-deduplicated horoballs, or a merge directive.

    Two entries at the same base with agreeing sizes are duplicates (the
    stabilizer coset redundancy); agreeing means within ``rel_tol``
    relative size.  Disagreeing macroscopic sizes from different
    references prove the referenced cusp orbits coincide.  Two grid
    passes with offset cells catch duplicate pairs that straddle a cell
    boundary of the first pass.
    """
    idx = np.arange(len(bases))
    for frac in (0.0, 0.5):
        res = _dedup_pass(bases[idx], sizes[idx], ref_of[idx], grid, rel_tol, frac)
        if isinstance(res, tuple):
            return res
        idx = idx[res]
    return idx


def _dedup_pass(bases, sizes, ref_of, grid, rel_tol, frac):
    c0 = np.floor(bases.real / grid + frac)
    c1 = np.floor(bases.imag / grid + frac)
    if len(c0) and max(np.abs(c0).max(), np.abs(c1).max()) > 4.0e18:
        raise CuspDetectionError(
            "horoball base beyond the integer grid range; apply the "
            "working-window filter first"
        )
    c0i = c0.astype(np.int64)
    c1i = c1.astype(np.int64)
    order = np.lexsort((-sizes, c1i, c0i))
    oc0, oc1, os_ = c0i[order], c1i[order], sizes[order]
    new_group = np.ones(len(order), dtype=bool)
    if len(order) > 1:
        new_group[1:] = (oc0[1:] != oc0[:-1]) | (oc1[1:] != oc1[:-1])
    gid = np.cumsum(new_group) - 1
    lead_rows = np.flatnonzero(new_group)
    lead_size = os_[lead_rows][gid]
    dup = np.abs(os_ - lead_size) <= rel_tol * lead_size
    conflict = ~new_group & ~dup & (os_ > 1e-9) & (lead_size > 1e-9)
    if conflict.any():
        rows = np.flatnonzero(conflict)
        pairs = set()
        for row in rows:
            lead_row = int(lead_rows[gid[int(row)]])
            pairs.add((int(ref_of[order[lead_row]]), int(ref_of[order[int(row)]])))
        return ("merge", sorted(pairs))
    keep_mask = new_group | ~dup
    keep = order[keep_mask]
    keep.sort()
    return keep


def _window_filter(bases, sizes, window):
    """Mask of members that can contain some point with |w| <= window, h <= 1.

    Containment needs |w - p|^2 + h^2 <= s h, so a member based farther
    than the window can only matter if (|p| - window)^2 <= s.
    """
    far = np.abs(bases) > window
    reachable = (np.abs(bases) - window) ** 2 <= sizes
    return ~far | reachable


# ---------------------------------------------------------------------------
# limit set sampling
# ---------------------------------------------------------------------------


def _loxodromic_fixed_points(orbit: OrbitData) -> np.ndarray:
    m = orbit.matrices
    tr2 = (m[:, 0, 0] + m[:, 1, 1]) ** 2
    seg = np.hypot(tr2.real - np.clip(tr2.real, 0.0, 4.0), tr2.imag)
    lox = (orbit.word_lengths > 0) & (np.abs(tr2 - 4.0) > hg.PARABOLIC_TOL) & (
        seg > hg.PARABOLIC_TOL
    )
    mm = m[lox]
    if not len(mm):
        return np.empty(0, dtype=complex)
    a, b = mm[:, 0, 0], mm[:, 0, 1]
    c, dd = mm[:, 1, 0], mm[:, 1, 1]
    scale = np.abs(mm).max(axis=(1, 2))
    disc = np.sqrt((a - dd) ** 2 + 4.0 * b * c)
    cz = np.abs(c) <= hg.ENTRY_TOL * scale
    c_safe = np.where(cz, 1.0, c)
    r1 = (a - dd + disc) / (2.0 * c_safe)
    r2 = (a - dd - disc) / (2.0 * c_safe)
    # c = 0: one fixed point at infinity (dropped), the other at b/(d-a)
    ad = np.abs(a - dd) > hg.ENTRY_TOL * scale
    alt = np.where(cz & ad, b / np.where(cz & ad, dd - a, 1.0), np.nan)
    pts = np.concatenate([r1[~cz], r2[~cz], alt[cz & ad]])
    pts = pts[~np.isnan(pts)]
    if orbit.d == 1:
        pts = pts[np.abs(pts.imag) <= 1e-7 * np.maximum(1.0, np.abs(pts))].real.astype(
            complex
        )
    return pts


def sample_limit_set(
    group: GroupPresentation,
    target_resolution: float = 1e-3,
    *,
    max_elements: int = 2_000_000,
    max_dist: Optional[float] = None,
    include_fixed_points: Optional[bool] = None,
    orbit: Optional[OrbitData] = None,
) -> PointCloud:
    """Sample the limit set by projecting deep orbit points to the boundary.

    Orbit points at distance t project within about e^-t of the limit
    set, so points past log(1/resolution) are kept.  Groups flagged with
    ``fixed_point_sampling`` (sparse, very non-uniform orbit growth) also
    contribute the boundary fixed points of every enumerated element.
    The declared resolution of the returned cloud degrades to match the
    enumeration horizon when a budget truncated the walk, and never goes
    below the presentation's ``resolution_floor``.
    """
    if not (0 < target_resolution < 1):
        raise ValueError("target_resolution must be in (0, 1)")
    t_cut = math.log(1.0 / target_resolution)
    auto_window = orbit is None and max_dist is None
    if orbit is None:
        if max_dist is None:
            max_dist = t_cut + math.log(4.0)
        orbit = enumerate_orbit(group, max_dist, max_elements=max_elements)
    if include_fixed_points is None:
        include_fixed_points = bool(group.metadata.get("fixed_point_sampling", False))

    proj, finite = orbit.boundary_projections()
    t_sel = min(t_cut, orbit.t_valid)
    deep = orbit.dists >= t_sel
    if auto_window and not orbit.truncated and not deep.any():
        # Groups whose shortest motions are long (widely separated Schottky
        # circles) can have a spectral gap covering the default window.  One
        # generator step bounds the gap length, so widening by that much
        # guarantees a hit.
        step = float(_orbit_dists(np.stack([g.matrix for g in group.generators])).max())
        orbit = enumerate_orbit(
            group, t_cut + step + math.log(4.0), max_elements=max_elements
        )
        proj, finite = orbit.boundary_projections()
        t_sel = min(t_cut, orbit.t_valid)
        deep = orbit.dists >= t_sel
    pts = proj[deep & finite]
    n_dropped_inf = int((deep & ~finite).sum())

    n_fixed = 0
    if include_fixed_points:
        fps = _loxodromic_fixed_points(orbit)
        gen_fps = []
        for g in group.generators:
            for bp in hg.classify(g, d=group.d).fixed_points:
                if not bp.is_infinity:
                    z = bp.coords
                    gen_fps.append(complex(z[0], 0.0 if len(z) == 1 else z[1]))
        n_fixed = len(fps) + len(gen_fps)
        pts = np.concatenate([pts, fps, np.asarray(gen_fps, dtype=complex)])

    resolution = target_resolution
    if orbit.truncated and orbit.t_valid < t_cut and not include_fixed_points:
        resolution = max(resolution, 2.0 * math.exp(-orbit.t_valid))
    floor = group.metadata.get("resolution_floor")
    if floor is not None:
        resolution = max(resolution, float(floor))

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

    # deduplicate on a grid much finer than the resolution
    cell = np.floor(coords / (resolution / 16.0)).astype(np.int64)
    if coords.shape[1] == 1:
        packed = cell[:, 0]
    else:
        packed = (cell[:, 0] << np.int64(32)) ^ (cell[:, 1] & np.int64(0xFFFFFFFF))
    _, first = np.unique(packed, return_index=True)
    first.sort()
    coords = coords[first]

    return PointCloud(
        coords=coords,
        model="halfspace",
        d=group.d,
        resolution=resolution,
        meta={
            "group": group.name,
            "n_orbit": orbit.n,
            "n_projected": int((deep & finite).sum()),
            "n_dropped_infinite": n_dropped_inf,
            "n_fixed_points": n_fixed,
            "t_valid": orbit.t_valid,
            "orbit_truncated": orbit.truncated,
        },
    )


# ---------------------------------------------------------------------------
# builtin presentations
# ---------------------------------------------------------------------------


def _inversion_matrix(center: complex, radius: float) -> np.ndarray:
    # scaled to determinant -1 so products of inversions in circles of
    # wildly different radii stay numerically well conditioned
    c = complex(center)
    m = np.array([[c, radius * radius - abs(c) ** 2], [1.0, -c.conjugate()]], dtype=complex)
    return m / radius


def _inversion_product(c_out, r_out, c_in, r_in, label="") -> hg.MobiusMap:
    """sigma_outer o sigma_inner as a Moebius map (matrix M_out conj(M_in))."""
    m = _inversion_matrix(c_out, r_out) @ np.conj(_inversion_matrix(c_in, r_in))
    return hg.MobiusMap(m, label=label)


def _apollonian() -> GroupPresentation:
    """Symmetry group of the bounded Apollonian gasket with root curvatures
    (-1, 2, 2, 3): products of inversions in the four mutually tangent dual
    circles (the real line and three circles through the tangency points).
    """
    m1 = np.eye(2, dtype=complex)  # inversion in the real line
    m2 = _inversion_matrix(-1.0 + 1.0j, 1.0)
    m3 = _inversion_matrix(1.0 + 1.0j, 1.0)
    m4 = _inversion_matrix(0.25j, 0.25)
    gens = (
        hg.MobiusMap(m1 @ np.conj(m2), label="a"),
        hg.MobiusMap(m2 @ np.conj(m3), label="b"),
        hg.MobiusMap(m3 @ np.conj(m4), label="c"),
        hg.MobiusMap(m4 @ np.conj(m1), label="d"),
    )
    return GroupPresentation(
        gens,
        d=2,
        name="apollonian",
        metadata={
            "known_delta": 1.305688,
            "k_min": 1,
            "k_max": 1,
            "geometrically_finite": True,
            "bounded_limit_set": True,
        },
    )


def _schottky(n_pairs: int = 2, separation: float = 3.0, radius: float = 1.0) -> GroupPresentation:
    """Classical Fuchsian Schottky group: each generator is the product of
    inversions in a disjoint pair of circles on the real line, mapping the
    exterior of one into the interior of the other.  Free and parabolic
    free by ping-pong.
    """
    if n_pairs < 1:
        raise ValueError("need at least one circle pair")
    if separation <= 2 * radius:
        raise ValueError("circles must be disjoint: separation > 2 radius")
    centers = [(-(2 * n_pairs - 1) / 2.0 + k) * separation for k in range(2 * n_pairs)]
    gens = []
    for k in range(n_pairs):
        c1, c2 = centers[2 * k], centers[2 * k + 1]
        gens.append(_inversion_product(c2, radius, c1, radius, label=f"g{k + 1}"))
    return GroupPresentation(
        tuple(gens),
        d=1,
        name="schottky",
        metadata={
            "geometrically_finite": True,
            "parabolic_free": True,
            "bounded_limit_set": True,
        },
    )


def _parabolic_cusp_fuchsian() -> GroupPresentation:
    """Fuchsian free product of the integer translation and one inversion
    pair: a single rank-1 cusp at infinity plus a loxodromic generator.
    The limit set misses (0.85, 1.15); the midpoint 1.0 is recorded as a
    gap point for bounded-chart conjugation.
    """
    t = hg.MobiusMap(np.array([[1.0, 1.0], [0.0, 1.0]]), label="t")
    h = _inversion_product(0.3, 0.15, -0.3, 0.15, label="h")
    return GroupPresentation(
        (t, h),
        d=1,
        name="parabolic_cusp_fuchsian",
        metadata={
            "k_min": 1,
            "k_max": 1,
            "gap_point": 1.0,
            "geometrically_finite": True,
            "bounded_limit_set": False,
        },
    )


def _rank2_cusp() -> GroupPresentation:
    """Kleinian free product of the Z^2 translation lattice and one
    inversion pair: a single rank-2 cusp at infinity.  The point 0.5 is a
    gap point (all finite limit points lie in lattice translates of the
    two small disks).
    """
    t1 = hg.MobiusMap(np.array([[1.0, 1.0], [0.0, 1.0]]), label="t1")
    t2 = hg.MobiusMap(np.array([[1.0, 1.0j], [0.0, 1.0]]), label="t2")
    h = _inversion_product(0.7 + 0.7j, 0.12, 0.3 + 0.3j, 0.12, label="h")
    return GroupPresentation(
        (t1, t2, h),
        d=2,
        name="rank2_cusp",
        metadata={
            "k_min": 2,
            "k_max": 2,
            "gap_point": 0.5,
            "geometrically_finite": True,
            "bounded_limit_set": False,
        },
    )


def _infinite_fuchsian(
    alpha: float = 0.05, beta: float = 0.75, n_circles: int = 200
) -> GroupPresentation:
    """Truncation of an infinitely generated Fuchsian group.

    Circles C_k sit on the real line at x_k = k^(-gamma) with
    gamma = 1/beta - 1, with radii r_k = alpha * min(e^-k, gap/4) so they
    shrink much faster than their spacing; generator h_k pairs C_1 with
    C_k.  The accumulation rate of the centres is tuned so the box
    dimension of the visible skeleton is beta while individual circles
    carry almost no mass, giving a large gap between the box and lower
    dimensions.  The full (non-truncated) object is geometrically
    infinite, which is how downstream consumers treat it.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must be in (0, 1)")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must be in (0, 1)")
    if not 3 <= n_circles <= 250:
        raise ValueError(
            "n_circles must be between 3 and 250; beyond that the pairing "
            "maps overflow double precision"
        )
    gamma = 1.0 / beta - 1.0
    ks = np.arange(1, n_circles + 1, dtype=float)
    xs = ks**-gamma
    gaps = xs[:-1] - xs[1:]
    r = np.empty(n_circles)
    for i in range(n_circles):
        bound = math.exp(-(i + 1.0))
        if i > 0:
            bound = min(bound, gaps[i - 1] / 4.0)
        if i < n_circles - 1:
            bound = min(bound, gaps[i] / 4.0)
        r[i] = alpha * bound
    gens = tuple(
        _inversion_product(xs[0], r[0], xs[k], r[k], label=f"h{k + 1}")
        for k in range(1, n_circles)
    )
    min_gap = float(gaps.min())
    return GroupPresentation(
        gens,
        d=1,
        name="infinite_fuchsian",
        metadata={
            "geometrically_finite": False,
            "parabolic_free": True,
            "fixed_point_sampling": True,
            "resolution_floor": min_gap / 4.0,
            "bounded_limit_set": True,
            "alpha": alpha,
            "beta": beta,
            "n_circles": n_circles,
        },
    )


_BUILTINS = {
    "apollonian": _apollonian,
    "schottky": _schottky,
    "parabolic_cusp_fuchsian": _parabolic_cusp_fuchsian,
    "rank2_cusp": _rank2_cusp,
    "infinite_fuchsian": _infinite_fuchsian,
}


def builtin_group(name: str, **params) -> GroupPresentation:
    """Construct one of the named example groups.

    Available: apollonian, schottky, parabolic_cusp_fuchsian, rank2_cusp,
    infinite_fuchsian.
    """
    try:
        ctor = _BUILTINS[name]
    except KeyError:
        raise ValueError(
            f"unknown builtin group {name!r}; available: {', '.join(sorted(_BUILTINS))}"
        ) from None
    return ctor(**params)
