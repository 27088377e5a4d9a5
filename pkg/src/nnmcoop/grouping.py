"""Nearest-neighbour graph and the mutual-nearest-neighbour grouping.

An atom is *paired* with ``j`` when each is the other's nearest neighbour,
and *single* otherwise. With ``K = 3`` a pair may additionally absorb one
single whose nearest neighbour is a member of that pair.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .geometry import GAMMA, BoundaryPolicy, displacement
from .process import PointPattern


@dataclass
class NearestNeighbourMap:
    nn_index: np.ndarray
    nn_distance: np.ndarray


@dataclass
class GroupingResult:
    """Partition of atom indices into singles, pairs and triplets.

    ``pairs`` has shape ``(m, 2)`` with ``pairs[:, 0] < pairs[:, 1]``; rows are
    sorted. ``triplets`` has shape ``(t, 3)`` holding ``(pair_a, pair_b, single)``.
    """

    n: int
    singles: np.ndarray
    pairs: np.ndarray
    triplets: np.ndarray = field(default_factory=lambda: np.empty((0, 3), dtype=int))

    def labels(self) -> np.ndarray:
        """Per-atom class code: 0 single, 1 pair member, 2 triplet member."""
        lab = np.zeros(self.n, dtype=int)
        lab[self.pairs.ravel()] = 1
        lab[self.triplets.ravel()] = 2
        return lab

    @property
    def pair_members(self) -> np.ndarray:
        return np.sort(self.pairs.ravel())

    def singles_set(self):
        return {int(i) for i in self.singles}

    def pairs_set(self):
        return {frozenset(map(int, p)) for p in self.pairs}

    def triplets_set(self):
        return {frozenset(map(int, t)) for t in self.triplets}

    def partners(self) -> np.ndarray:
        """``(n, 2)`` array of group partners, ``-1`` where absent."""
        out = np.full((self.n, 2), -1, dtype=int)
        for a, b in self.pairs:
            out[a, 0], out[b, 0] = b, a
        for a, b, c in self.triplets:
            out[a] = (b, c)
            out[b] = (a, c)
            out[c] = (a, b)
        return out

    def to_csv(self, path, header_lines=()):
        """Write ``index,class,partner1,partner2`` with class in ``{S, P, T}``."""
        code = np.array(["S", "P", "T"])[self.labels()]
        partners = self.partners()
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["index", "class", "partner1", "partner2"])
            for i in range(self.n):
                w.writerow([i, code[i], int(partners[i, 0]), int(partners[i, 1])])

    @classmethod
    def from_csv(cls, path) -> "GroupingResult":
        rows = list(csv.reader(line for line in open(path) if not line.startswith("#")))[1:]
        n = len(rows)
        singles, pairs, trip = [], set(), set()
        for r in rows:
            i, c, p1, p2 = int(r[0]), r[1], int(r[2]), int(r[3])
            if c == "S":
                singles.append(i)
            elif c == "P":
                pairs.add(tuple(sorted((i, p1))))
            else:
                trip.add(frozenset((i, p1, p2)))
        # a triplet row lists the pair first, then the attached single
        part = {int(r[0]): (int(r[2]), int(r[3])) for r in rows if r[1] == "T"}
        triplets = []
        for t in trip:
            single = next(i for i in t if set(part[i]) == t - {i} and
                          all(part[j][1] == i for j in t - {i}))
            a, b = sorted(t - {single})
            triplets.append((a, b, single))
        return cls(n, np.array(sorted(singles), dtype=int),
                   np.array(sorted(pairs), dtype=int).reshape(-1, 2),
                   np.array(sorted(triplets), dtype=int).reshape(-1, 3))


def _brute_nn(points, i, window, policy):
    d = displacement(points[i], points, window, policy)
    dist = np.hypot(d[:, 0], d[:, 1])
    dist[i] = np.inf
    dmin = dist.min()
    return int(np.flatnonzero(dist == dmin)[0]), float(dmin)


def build_nn_map(pattern: PointPattern, policy: BoundaryPolicy = BoundaryPolicy()) -> NearestNeighbourMap:
    """Nearest neighbour of every atom, ties broken towards the lowest index.

    Uses a k-d tree (periodic when the policy is toroidal); atoms whose
    first and second neighbour distances tie are resolved by an exact scan.

    Raises
    ------
    DomainError
        Fewer than two atoms, or two atoms at the same location.
    """
    pts = pattern.points
    n = len(pts)
    if n < 2:
        raise DomainError("a nearest-neighbour map needs at least two atoms")
    win = pattern.window
    if policy.is_toroidal:
        sides = np.array([win.width, win.height])
        local = np.mod(pts - [win.x0, win.y0], sides)
        tree = cKDTree(local, boxsize=sides)
        query_pts = local
    else:
        tree = cKDTree(pts)
        query_pts = pts
    k = min(n, 3)
    dist, idx = tree.query(query_pts, k=k)
    if np.any(dist[:, 1] == 0.0):
        raise DomainError("duplicated coordinates are not allowed")
    # column 0 is the atom itself
    nn_index = idx[:, 1].astype(int)
    nn_dist = dist[:, 1].copy()
    # recompute with the exact metric so results do not depend on tree rounding
    d = displacement(pts, pts[nn_index], win, policy)
    nn_dist = np.hypot(d[:, 0], d[:, 1])
    if k == 3:
        suspect = np.flatnonzero(dist[:, 2] <= dist[:, 1] * (1 + 1e-12))
    else:
        suspect = np.empty(0, dtype=int)
    for i in suspect:
        nn_index[i], nn_dist[i] = _brute_nn(pts, i, win, policy)
    return NearestNeighbourMap(nn_index, nn_dist)


def classify_k2(pattern: PointPattern, nn: NearestNeighbourMap) -> GroupingResult:
    """Split atoms into mutual-nearest-neighbour pairs and singles."""
    n = len(pattern)
    idx = np.arange(n)
    nn_index = nn.nn_index
    mutual = nn_index[nn_index] == idx
    first = mutual & (idx < nn_index)
    pairs = np.column_stack([idx[first], nn_index[first]])
    return GroupingResult(n, idx[~mutual], pairs)


def classify_k3(pattern: PointPattern, k2: GroupingResult, nn: NearestNeighbourMap) -> GroupingResult:
    """Attach to each pair the closest single whose nearest neighbour is in it.

    Single pass: every single is offered only to the pair holding its own
    nearest neighbour; when several singles compete for one pair the one
    with the smallest nearest-neighbour distance (then lowest index) wins
    and the others stay single.
    """
    n = len(pattern)
    pair_of = np.full(n, -1, dtype=int)
    pair_of[k2.pairs[:, 0]] = np.arange(len(k2.pairs))
    pair_of[k2.pairs[:, 1]] = np.arange(len(k2.pairs))
    singles = k2.singles
    target = pair_of[nn.nn_index[singles]] if len(singles) else np.empty(0, dtype=int)
    eligible = singles[target >= 0]
    target = target[target >= 0]
    order = np.lexsort((eligible, nn.nn_distance[eligible], target))
    eligible, target = eligible[order], target[order]
    winners = np.ones(len(target), dtype=bool)
    winners[1:] = target[1:] != target[:-1]
    won_pairs = target[winners]
    won_singles = eligible[winners]
    triplets = np.column_stack([k2.pairs[won_pairs], won_singles]).reshape(-1, 3)
    triplets = triplets[np.lexsort(triplets.T[::-1])] if len(triplets) else triplets
    keep_pairs = np.ones(len(k2.pairs), dtype=bool)
    keep_pairs[won_pairs] = False
    return GroupingResult(n, np.setdiff1d(singles, won_singles), k2.pairs[keep_pairs], triplets)


def group(pattern: PointPattern, policy: BoundaryPolicy = BoundaryPolicy(), k: int = 2) -> GroupingResult:
    """Grouping of a pattern of any size (0 or 1 atoms give only singles)."""
    n = len(pattern)
    if k not in (2, 3):
        raise DomainError("only K = 2 and K = 3 groupings are supported")
    if n < 2:
        return GroupingResult(n, np.arange(n), np.empty((0, 2), dtype=int))
    nn = build_nn_map(pattern, policy)
    res = classify_k2(pattern, nn)
    return classify_k3(pattern, res, nn) if k == 3 else res


def subpattern(pattern: PointPattern, grouping: GroupingResult, which: str) -> PointPattern:
    """Restriction of the pattern to ``"singles"`` or ``"pairs"``.

    Original indices are kept in ``source_index``; ``density`` is set to the
    intensity of the thinned process, ``(1 - p*)`` or ``p*`` times the parent's.
    """
    p = 1.0 / (2.0 - GAMMA)
    if which == "singles":
        sel, frac = grouping.singles, 1.0 - p
    elif which == "pairs":
        sel, frac = grouping.pair_members, p
    else:
        raise DomainError(f"which must be 'singles' or 'pairs', got {which!r}")
    return PointPattern(pattern.points[sel], pattern.window, pattern.density * frac,
                        pattern.seed, pattern.indices[sel])
