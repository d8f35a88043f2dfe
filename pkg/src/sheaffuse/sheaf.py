"""Sheaves of real vector spaces over an attachment DAG.

Vertex data are lifted to every higher face along each directed path of the
DAG, composing restriction maps on the way, so a face receives one value per
path.  The spread of those values is the face's consistency threshold; the
sorted thresholds form the consistency filtration and their maximum is the
consistency radius.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .emissions import EmissionFactorTable, GB_MODES, guidebook_array
from .simplicial import AttachmentDag

SPREAD_CONVENTIONS = ("reference", "paper-eq6")
GLOBAL_SECTION_ATOL = 1e-9

Assignment = dict[str, np.ndarray]
"""Face name -> stalk value (1-D array of the stalk's dimension)."""


class SheafError(ValueError):
    """Contract violation while building or evaluating a sheaf."""


@dataclass(frozen=True)
class StalkSpec:
    face: str
    dim: int = 1
    unit: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise SheafError(f"stalk at {self.face!r} must have dimension >= 1")


@dataclass(frozen=True)
class RestrictionMap:
    """Map carrying data from ``source`` to its coface ``target``.

    Subclasses implement ``apply`` on arrays of shape ``(..., in_dim)``.
    """

    source: str
    target: str

    kind = "abstract"

    @property
    def in_dim(self) -> int:
        raise NotImplementedError

    @property
    def out_dim(self) -> int:
        raise NotImplementedError

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.in_dim:
            raise SheafError(
                f"map {self.source}->{self.target} expects dimension {self.in_dim}, got {x.shape[-1]}"
            )
        return self.apply(x)


@dataclass(frozen=True)
class IdentityMap(RestrictionMap):
    dim: int = 1
    kind = "identity"

    @property
    def in_dim(self):
        return self.dim

    @property
    def out_dim(self):
        return self.dim

    def apply(self, x):
        return x


@dataclass(frozen=True)
class LinearMap(RestrictionMap):
    matrix: tuple[tuple[float, ...], ...] = ((1.0,),)
    kind = "linear"

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.size == 0:
            raise SheafError(f"linear map {self.source}->{self.target} needs a non-empty 2-D matrix")
        object.__setattr__(self, "matrix", tuple(tuple(row) for row in m.tolist()))

    @property
    def in_dim(self):
        return len(self.matrix[0])

    @property
    def out_dim(self):
        return len(self.matrix)

    def apply(self, x):
        return x @ np.asarray(self.matrix).T


@dataclass(frozen=True)
class GuidebookMap(RestrictionMap):
    """Vehicle count vector -> PM2.5 scalar via emission factors."""

    ef: EmissionFactorTable = field(default_factory=EmissionFactorTable)
    mode: str = "mass"
    vkt_km: float = 1.0
    kind = "guidebook"

    def __post_init__(self):
        if self.mode not in GB_MODES:
            raise SheafError(f"unknown guidebook mode {self.mode!r}")
        if not self.vkt_km > 0:
            raise SheafError("street segment length must be positive")

    @property
    def in_dim(self):
        return len(self.ef.entries)

    @property
    def out_dim(self):
        return 1

    def apply(self, x):
        return guidebook_array(x, self.ef, self.mode, self.vkt_km)[..., None]


@dataclass(frozen=True)
class CompositeMap(RestrictionMap):
    """Maps applied left to right."""

    maps: tuple[RestrictionMap, ...] = ()
    kind = "composite"

    def __post_init__(self):
        if not self.maps:
            raise SheafError("composite map needs at least one component")
        for a, b in zip(self.maps, self.maps[1:]):
            if a.out_dim != b.in_dim:
                raise SheafError(f"cannot compose {a.source}->{a.target} with {b.source}->{b.target}")

    @property
    def in_dim(self):
        return self.maps[0].in_dim

    @property
    def out_dim(self):
        return self.maps[-1].out_dim

    def apply(self, x):
        for m in self.maps:
            x = m.apply(x)
        return x


class Sheaf:
    """Stalks and restriction maps over an :class:`AttachmentDag`.

    Immutable once built; use :func:`build_sheaf` to construct with checks.
    """

    def __init__(self, base: AttachmentDag, stalks: Mapping[str, StalkSpec], maps: Mapping[tuple[str, str], RestrictionMap]):
        self.base = base
        self.stalks = dict(stalks)
        self.maps = dict(maps)
        self.vertices = base.vertices
        self.faces = base.faces
        offsets = np.cumsum([0] + [self.stalks[v].dim for v in self.vertices])
        self._slices = {v: slice(int(offsets[i]), int(offsets[i + 1])) for i, v in enumerate(self.vertices)}
        self.n_features = int(offsets[-1])

    def stalk_dim(self, name: str) -> int:
        return self.stalks[name].dim

    def restriction(self, source: str, target: str) -> RestrictionMap:
        return self.maps[(source, target)]

    def feature_slice(self, vertex: str) -> slice:
        return self._slices[vertex]

    @property
    def feature_names(self) -> list[str]:
        out = []
        for v in self.vertices:
            d = self.stalks[v].dim
            out.extend([v] if d == 1 else [f"{v}[{i}]" for i in range(d)])
        return out

    def check_vertex_assignment(self, assignment: Mapping[str, object]) -> Assignment:
        missing = [v for v in self.vertices if v not in assignment]
        if missing:
            raise SheafError(f"vertex assignment does not cover vertices {missing}")
        out = {}
        for v in self.vertices:
            val = np.atleast_1d(np.asarray(assignment[v], dtype=float))
            if val.shape != (self.stalks[v].dim,):
                raise SheafError(f"value at {v!r} has shape {val.shape}, stalk dimension is {self.stalks[v].dim}")
            out[v] = val
        return out

    def flatten(self, assignment: Mapping[str, object]) -> np.ndarray:
        a = self.check_vertex_assignment(assignment)
        return np.concatenate([a[v] for v in self.vertices])

    def unflatten(self, X) -> dict[str, np.ndarray]:
        """Split feature rows ``(n, n_features)`` into per-vertex blocks ``(n, dim)``."""
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise SheafError(f"expected rows with {self.n_features} features, got shape {X.shape}")
        return {v: X[:, self._slices[v]] for v in self.vertices}

    def paths(self, face: str) -> list[tuple[str, ...]]:
        """Every directed path from a vertex up to ``face``, in lifting order."""
        node = self.base.nodes[face]
        if node.is_vertex:
            return [(face,)]
        return [p + (face,) for c in node.children for p in self.paths(c)]

    def lift_batch(self, X) -> dict[str, np.ndarray]:
        """Lifted values per face, shape ``(n_paths, n, dim)``, for feature rows ``X``."""
        blocks = self.unflatten(X)
        lifted = {v: blocks[v][None] for v in self.vertices}
        for level in self.base.levels[1:]:
            for face in level:
                parts = [self.maps[(c, face)](lifted[c]) for c in self.base.children(face)]
                lifted[face] = np.concatenate(parts, axis=0)
        return lifted

    def to_common(self, vertex: str, value) -> np.ndarray:
        """Value of a vertex expressed in the stalk of its first coface."""
        parents = self.base.parents(vertex)
        if not parents:
            return np.atleast_1d(np.asarray(value, dtype=float))
        return self.maps[(vertex, parents[0])](value)

    def __repr__(self) -> str:
        return f"Sheaf(vertices={self.vertices}, faces={self.faces})"


def build_sheaf(base: AttachmentDag, stalks: Iterable[StalkSpec], maps: Iterable[RestrictionMap]) -> Sheaf:
    stalk_map: dict[str, StalkSpec] = {}
    for s in stalks:
        if s.face in stalk_map:
            raise SheafError(f"stalk for {s.face!r} declared twice")
        stalk_map[s.face] = s
    missing = [n for n in base.nodes if n not in stalk_map]
    if missing:
        raise SheafError(f"no stalk declared for {missing}")
    extra = [n for n in stalk_map if n not in base.nodes]
    if extra:
        raise SheafError(f"stalks declared for unknown faces {extra}")

    edge_set = set(base.edges)
    map_dict: dict[tuple[str, str], RestrictionMap] = {}
    for m in maps:
        key = (m.source, m.target)
        if key not in edge_set:
            raise SheafError(f"restriction map {m.source}->{m.target} does not match a DAG edge")
        if key in map_dict:
            raise SheafError(f"two restriction maps on edge {m.source}->{m.target}")
        if m.in_dim != stalk_map[m.source].dim or m.out_dim != stalk_map[m.target].dim:
            raise SheafError(
                f"map {m.source}->{m.target} is {m.in_dim}->{m.out_dim}, stalks are "
                f"{stalk_map[m.source].dim}->{stalk_map[m.target].dim}"
            )
        map_dict[key] = m
    unmapped = [e for e in base.edges if e not in map_dict]
    if unmapped:
        raise SheafError(f"edges without a restriction map: {unmapped}")
    return Sheaf(base, stalk_map, map_dict)


def spread_batch(values: np.ndarray, convention: str = "reference", ddof: int = 1) -> np.ndarray:
    """Spread over axis 0 of ``values`` shaped ``(k, n, dim)``; returns shape ``(n,)``.

    ``reference``: square root of the covariance trace.  ``paper-eq6``: the
    trace is divided by the number of values first.
    """
    if convention not in SPREAD_CONVENTIONS:
        raise ValueError(f"unknown spread convention {convention!r}; expected one of {SPREAD_CONVENTIONS}")
    k = values.shape[0]
    if k < 2 or k - ddof < 1:
        raise ValueError(f"spread needs at least two values, got {k}")
    trace = values.var(axis=0, ddof=ddof).sum(axis=-1)
    if convention == "paper-eq6":
        trace = trace / k
    return np.sqrt(np.maximum(trace, 0.0))


def spread(values: Sequence, convention: str = "reference", ddof: int = 1) -> float:
    """Disagreement of a multiset of stalk values (scalars or equal-length vectors)."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("values must be scalars or vectors of one dimension")
    return float(spread_batch(arr[:, None, :], convention, ddof)[0])


@dataclass
class PropagationResult:
    lifted: dict[str, np.ndarray]
    thresholds: dict[str, float]
    timestamp: float | None = None

    def face_mean(self, face: str) -> float:
        return float(np.mean(self.lifted[face]))


@dataclass
class ConsistencyFiltration:
    """Faces ordered by threshold (ties by name)."""

    entries: list[tuple[str, float]]

    @property
    def radius(self) -> float:
        return self.entries[-1][1] if self.entries else 0.0

    @property
    def faces(self) -> list[str]:
        return [f for f, _ in self.entries]

    @property
    def values(self) -> np.ndarray:
        return np.array([e for _, e in self.entries])

    def as_dict(self) -> dict[str, float]:
        return dict(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def propagate(sheaf: Sheaf, vertex_assignment: Mapping[str, object], convention: str = "reference",
              ddof: int = 1, timestamp: float | None = None) -> PropagationResult:
    """Lift a vertex assignment through the sheaf and measure each face's spread."""
    x = sheaf.flatten(vertex_assignment)[None]
    lifted = {f: v[:, 0, :] for f, v in sheaf.lift_batch(x).items() if f in set(sheaf.faces)}
    thresholds = {f: float(spread_batch(v[:, None, :], convention, ddof)[0]) for f, v in lifted.items()}
    return PropagationResult(lifted, thresholds, timestamp)


def consistency_filtration(result: PropagationResult) -> ConsistencyFiltration:
    entries = sorted(result.thresholds.items(), key=lambda kv: (kv[1], kv[0]))
    return ConsistencyFiltration(entries)


def consistency_radius(result: PropagationResult) -> float:
    return max(result.thresholds.values(), default=0.0)


def extend_with_means(sheaf: Sheaf, vertex_assignment: Mapping[str, object], result: PropagationResult | None = None) -> Assignment:
    """Full assignment whose face values are the means of their lifted values."""
    full = sheaf.check_vertex_assignment(vertex_assignment)
    result = result or propagate(sheaf, full)
    for f, vals in result.lifted.items():
        full[f] = vals.mean(axis=0)
    return full


def _full_assignment(sheaf: Sheaf, assignment: Mapping[str, object]) -> Assignment:
    missing = [n for n in sheaf.base.nodes if n not in assignment]
    if missing:
        raise SheafError(f"assignment is partial; missing values for {missing}")
    out = sheaf.check_vertex_assignment(assignment)
    for f in sheaf.faces:
        val = np.atleast_1d(np.asarray(assignment[f], dtype=float))
        if val.shape != (sheaf.stalk_dim(f),):
            raise SheafError(f"value at {f!r} has shape {val.shape}, stalk dimension is {sheaf.stalk_dim(f)}")
        out[f] = val
    return out


def is_pseudosection(sheaf: Sheaf, assignment: Mapping[str, object], epsilon: float,
                     convention: str = "reference", ddof: int = 1, atol: float = GLOBAL_SECTION_ATOL) -> bool:
    """Both approximate-consistency clauses hold on every non-vertex face.

    Clause one bounds the spread of the lifted values; clause two bounds it
    again with each lifted value in turn swapped for the face's own value.
    Spreads within ``atol`` of ``epsilon`` count as equal, so ``epsilon=0``
    accepts round-off-level disagreement.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    epsilon = epsilon + atol
    full = _full_assignment(sheaf, assignment)
    result = propagate(sheaf, {v: full[v] for v in sheaf.vertices}, convention, ddof)
    for f, vals in result.lifted.items():
        if result.thresholds[f] > epsilon:
            return False
        for j in range(len(vals)):
            swapped = vals.copy()
            swapped[j] = full[f]
            if spread(swapped, convention, ddof) > epsilon:
                return False
    return True


def is_global_section(sheaf: Sheaf, assignment: Mapping[str, object], atol: float = GLOBAL_SECTION_ATOL) -> bool:
    """Every restriction carries the face value onto the coface value."""
    full = _full_assignment(sheaf, assignment)
    for (src, tgt), m in sheaf.maps.items():
        if not np.allclose(m(full[src]), full[tgt], rtol=0.0, atol=atol):
            return False
    return True


@dataclass
class FunctorialityReport:
    checked_pairs: int
    violations: list[tuple[tuple[str, ...], tuple[str, ...], float]]

    @property
    def ok(self) -> bool:
        return not self.violations


def _compose(sheaf: Sheaf, path: Sequence[str], x: np.ndarray) -> np.ndarray:
    for a, b in zip(path, path[1:]):
        x = sheaf.maps[(a, b)](x)
    return x


def _paths_between(base: AttachmentDag, start: str) -> dict[str, list[tuple[str, ...]]]:
    out: dict[str, list[tuple[str, ...]]] = {}
    stack = [(start,)]
    while stack:
        p = stack.pop()
        for parent in base.parents(p[-1]):
            q = p + (parent,)
            out.setdefault(parent, []).append(q)
            stack.append(q)
    return out


def validate_functoriality(sheaf: Sheaf, sample_count: int = 32, tolerance: float = 1e-9,
                           seed: int | None = 0, low: float = 0.0, high: float = 1000.0) -> FunctorialityReport:
    """Compare compositions along all distinct paths between each pair of nodes on random inputs."""
    rng = np.random.default_rng(seed)
    checked = 0
    violations = []
    for start in sheaf.base.nodes:
        x = rng.uniform(low, high, size=(sample_count, sheaf.stalk_dim(start)))
        for end, paths in sorted(_paths_between(sheaf.base, start).items()):
            if len(paths) < 2:
                continue
            checked += 1
            ref = _compose(sheaf, paths[0], x)
            for other in paths[1:]:
                err = float(np.max(np.abs(_compose(sheaf, other, x) - ref)))
                if err > tolerance:
                    violations.append((paths[0], other, err))
    return FunctorialityReport(checked, violations)

