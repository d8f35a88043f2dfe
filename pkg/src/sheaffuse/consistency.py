"""Maximal consistent vertex sets, cover rank, and cutoff-based face selection."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .sheaf import GLOBAL_SECTION_ATOL, ConsistencyFiltration, PropagationResult, Sheaf, propagate

DEFAULT_MAX_VERTICES = 16
DEFAULT_CUTOFF_STD = 0.5
LANDMARK_ATOL = 1e-9


class TooManyVerticesError(ValueError):
    pass


@dataclass(frozen=True)
class VertexCover:
    """Antichain of vertex subsets over ``n`` vertices."""

    sets: tuple[frozenset[str], ...]
    n: int

    def __post_init__(self):
        for a in self.sets:
            for b in self.sets:
                if a is not b and a < b:
                    raise ValueError(f"cover is not an antichain: {sorted(a)} inside {sorted(b)}")

    def as_lists(self) -> list[list[str]]:
        return sorted(sorted(s) for s in self.sets)

    def __eq__(self, other):
        return isinstance(other, VertexCover) and self.n == other.n and set(self.sets) == set(other.sets)

    def __hash__(self):
        return hash((self.n, frozenset(self.sets)))

    def __len__(self):
        return len(self.sets)


@dataclass
class ConsistentSelection:
    epsilon_c: float
    value_c: float
    faces_c: list[str]
    cutoff: float
    eliminated: list[str]


@dataclass
class Landmark:
    epsilon: float
    cover: VertexCover
    rank: int


def _check_size(sheaf: Sheaf, max_vertices: int) -> None:
    n = len(sheaf.vertices)
    if n > max_vertices:
        raise TooManyVerticesError(
            f"{n} vertices exceeds the brute-force cap of {max_vertices}; the search is exponential in the vertex count"
        )


def _support_masks(sheaf: Sheaf) -> dict[str, int]:
    index = {v: i for i, v in enumerate(sheaf.vertices)}
    return {f: sum(1 << index[v] for v in sheaf.base.nodes[f].support) for f in sheaf.faces}


def _maximal_from_thresholds(sheaf: Sheaf, thresholds: Mapping[str, float], epsilon: float,
                             atol: float = 0.0) -> VertexCover:
    n = len(sheaf.vertices)
    masks = np.arange(1, 1 << n, dtype=np.int64)
    supports = _support_masks(sheaf)
    consistent = np.ones(1 << n, dtype=bool)
    consistent[0] = False
    for f, eps_f in thresholds.items():
        if eps_f > epsilon + atol:
            b = supports[f]
            consistent[1:] &= (masks & b) != b
    maximal = []
    for m in masks[consistent[1:]]:
        if not any(consistent[m | (1 << i)] for i in range(n) if not m & (1 << i)):
            maximal.append(frozenset(v for i, v in enumerate(sheaf.vertices) if m & (1 << i)))
    return VertexCover(tuple(maximal), n)


def maximal_consistent_vertex_sets(sheaf: Sheaf, vertex_assignment: Mapping[str, object], epsilon: float,
                                   convention: str = "reference", ddof: int = 1,
                                   max_vertices: int = DEFAULT_MAX_VERTICES,
                                   result: PropagationResult | None = None,
                                   atol: float = GLOBAL_SECTION_ATOL) -> VertexCover:
    """Maximal vertex sets whose induced faces all have spread at most ``epsilon`` (plus ``atol``).

    A face belongs to the subcomplex induced by ``W`` when every vertex below
    it lies in ``W``.  Face values are taken as lifted-value means, for
    which the swap clause can never exceed the plain spread, so only the
    spread is tested.  Cost is ``O(2^n)`` in the vertex count.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    _check_size(sheaf, max_vertices)
    result = result or propagate(sheaf, vertex_assignment, convention, ddof)
    return _maximal_from_thresholds(sheaf, result.thresholds, epsilon, atol)


def down_set_size(cover: VertexCover, vertices: Iterable[str] | None = None) -> int:
    """Number of subsets (the empty set included) of some member of the cover."""
    order = sorted(set().union(*cover.sets)) if vertices is None else list(vertices)
    index = {v: i for i, v in enumerate(order)}
    seen = set()
    for w in cover.sets:
        full = sum(1 << index[v] for v in w)
        sub = full
        while True:
            seen.add(sub)
            if sub == 0:
                break
            sub = (sub - 1) & full
    return len(seen)


def cover_rank(cover: VertexCover) -> int:
    """Size of the cover's down-set minus ``n + 1``; 0 for all singletons, ``2^n - n - 1`` for the full set."""
    return down_set_size(cover) - (cover.n + 1)


def star_cover(sheaf: Sheaf, cover: VertexCover) -> set[str]:
    """Union of the stars of the induced subcomplexes of a cover."""
    out: set[str] = set()
    for w in cover.sets:
        for node in sheaf.base.induced(w):
            out |= sheaf.base.star(node)
    return out


def landmark_epsilons(thresholds: Iterable[float], atol: float = LANDMARK_ATOL) -> list[float]:
    """0 followed by the distinct thresholds; values within ``atol`` merge."""
    marks = [0.0]
    for e in sorted(thresholds):
        if e - marks[-1] > atol:
            marks.append(float(e))
    return marks


def filtration_landmarks(sheaf: Sheaf, vertex_assignment: Mapping[str, object], convention: str = "reference",
                         ddof: int = 1, max_vertices: int = DEFAULT_MAX_VERTICES,
                         result: PropagationResult | None = None) -> list[Landmark]:
    _check_size(sheaf, max_vertices)
    result = result or propagate(sheaf, vertex_assignment, convention, ddof)
    # 0, then each distinct threshold; covers use the merge tolerance so a
    # threshold merged into an earlier landmark is admitted there
    out = []
    for eps in landmark_epsilons(result.thresholds.values()):
        cover = _maximal_from_thresholds(sheaf, result.thresholds, eps, LANDMARK_ATOL)
        out.append(Landmark(eps, cover, cover_rank(cover)))
    return out


def largest_gap(landmarks: list[Landmark]) -> tuple[Landmark, Landmark] | None:
    """Adjacent landmark pair with the widest epsilon gap."""
    if len(landmarks) < 2:
        return None
    i = int(np.argmax(np.diff([lm.epsilon for lm in landmarks])))
    return landmarks[i], landmarks[i + 1]


def cutoff_value(epsilons, k: float = DEFAULT_CUTOFF_STD) -> float:
    """Mean plus ``k`` population standard deviations."""
    e = np.asarray(epsilons, dtype=float)
    return float(e.mean() + k * e.std())


def select_consistent(filtration: ConsistencyFiltration, values: PropagationResult,
                      k: float | None = DEFAULT_CUTOFF_STD) -> ConsistentSelection:
    """Keep faces at or below the cutoff and average their mean lifted values.

    ``k=None`` disables the cutoff; it is then reported as the radius.
    """
    if not len(filtration):
        raise ValueError("filtration is empty")
    cut = filtration.radius if k is None else cutoff_value(filtration.values, k)
    keep = [(f, e) for f, e in filtration.entries if e <= cut]
    value = float(np.mean([values.face_mean(f) for f, _ in keep]))
    return ConsistentSelection(
        epsilon_c=max(e for _, e in keep),
        value_c=value,
        faces_c=[f for f, _ in keep],
        cutoff=cut,
        eliminated=[f for f, e in filtration.entries if e > cut],
    )


def select_consistent_batch(thresholds: np.ndarray, face_means: np.ndarray, k: float | None = DEFAULT_CUTOFF_STD):
    """Row-wise :func:`select_consistent` on ``(n, n_faces)`` arrays.

    ``k=None`` disables the cutoff.  Returns ``(values, epsilon_c, mask)``.
    """
    if k is None:
        mask = np.ones_like(thresholds, dtype=bool)
    else:
        cut = thresholds.mean(axis=1) + k * thresholds.std(axis=1)
        mask = thresholds <= cut[:, None]
    values = np.where(mask, face_means, 0.0).sum(axis=1) / mask.sum(axis=1)
    eps_c = np.where(mask, thresholds, -np.inf).max(axis=1)
    return values, eps_c, mask
