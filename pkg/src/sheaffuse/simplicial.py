"""Abstract simplicial complexes and the attachment DAGs that sheaves live on.

A :class:`SimplicialComplex` is a downward-closed family of faces.  Sheaves are
built over an :class:`AttachmentDag`, which is either derived from a complex
(one edge per codimension-1 incidence) or declared layer by layer, so that
composite comparison nodes that are not simplices can still be modelled.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import combinations

NAME_SEP = ","


def canonical_name(vertices: Iterable[str]) -> str:
    return NAME_SEP.join(sorted(vertices))


@dataclass(frozen=True, order=True)
class Face:
    """A face given by its vertex identifiers (stored sorted)."""

    vertices: tuple[str, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a face needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError(f"duplicate vertices in face {self.vertices}")
        object.__setattr__(self, "vertices", tuple(sorted(self.vertices)))

    @classmethod
    def of(cls, *vertices: str) -> Face:
        return cls(tuple(vertices))

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1

    @property
    def name(self) -> str:
        return canonical_name(self.vertices)

    def __contains__(self, vertex) -> bool:
        return vertex in self.vertices

    def issubface(self, other: Face) -> bool:
        return set(self.vertices) <= set(other.vertices)

    def __str__(self) -> str:
        return "{" + self.name + "}"


class SimplicialComplex:
    """Immutable downward-closed set of faces.

    Construct with :func:`complex_from_generators`; the constructor checks
    closure rather than computing it.
    """

    def __init__(self, faces: Iterable[Face]):
        self._faces = frozenset(faces)
        vertex_set = set()
        for f in self._faces:
            vertex_set.update(f.vertices)
        self._vertex_set = frozenset(vertex_set)
        for f in self._faces:
            for k in range(1, len(f.vertices)):
                for sub in combinations(f.vertices, k):
                    if Face(sub) not in self._faces:
                        raise ValueError(f"not downward closed: {Face(sub)} missing below {f}")

    @property
    def faces(self) -> frozenset[Face]:
        return self._faces

    @property
    def vertex_set(self) -> frozenset[str]:
        return self._vertex_set

    @property
    def dimension(self) -> int:
        return max((f.dimension for f in self._faces), default=-1)

    def is_empty(self) -> bool:
        return not self._faces

    def sorted_faces(self) -> list[Face]:
        return sorted(self._faces, key=lambda f: (f.dimension, f.vertices))

    def faces_of_dimension(self, d: int) -> list[Face]:
        return [f for f in self.sorted_faces() if f.dimension == d]

    def maximal_faces(self) -> list[Face]:
        return [
            f for f in self.sorted_faces()
            if not any(f != g and f.issubface(g) for g in self._faces)
        ]

    def __contains__(self, face) -> bool:
        if not isinstance(face, Face):
            face = Face(tuple(face))
        return face in self._faces

    def __iter__(self):
        return iter(self.sorted_faces())

    def __len__(self) -> int:
        return len(self._faces)

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self._faces == other._faces

    def __hash__(self) -> int:
        return hash(self._faces)

    def __repr__(self) -> str:
        return f"SimplicialComplex({[f.name for f in self.sorted_faces()]})"


def complex_from_generators(generators: Iterable[Iterable[str]]) -> SimplicialComplex:
    """Smallest simplicial complex containing every generator."""
    gens = [tuple(g) for g in generators]
    if not gens:
        raise ValueError("cannot build a complex from an empty generator set")
    faces = set()
    for g in gens:
        if not g:
            raise ValueError("generators must be non-empty vertex sets")
        g = tuple(sorted(set(g)))
        for k in range(1, len(g) + 1):
            faces.update(Face(sub) for sub in combinations(g, k))
    return SimplicialComplex(faces)


def star(complex_: SimplicialComplex, face: Face) -> set[Face]:
    """All faces of the complex containing ``face`` (itself included)."""
    if face not in complex_:
        raise KeyError(f"{face} is not a face of the complex")
    return {g for g in complex_.faces if face.issubface(g)}


def induced_subcomplex(complex_: SimplicialComplex, vertices: Iterable[str]) -> SimplicialComplex:
    """Faces whose vertices all lie in ``vertices``.

    An empty vertex set yields the empty complex; check ``is_empty()``.
    """
    w = set(vertices)
    unknown = w - complex_.vertex_set
    if unknown:
        raise KeyError(f"vertices not in complex: {sorted(unknown)}")
    return SimplicialComplex(f for f in complex_.faces if set(f.vertices) <= w)


@dataclass(frozen=True)
class DagNode:
    name: str
    level: int
    support: frozenset[str]
    children: tuple[str, ...] = ()

    @property
    def is_vertex(self) -> bool:
        return self.level == 0


@dataclass
class AttachmentDag:
    """Layered DAG of faces with edges pointing from a face to its cofaces.

    ``support`` of a node is the set of vertices below it.  Every edge joins
    a node at level ``d`` to one at level ``d + 1``.
    """

    nodes: dict[str, DagNode]
    edges: list[tuple[str, str]] = field(default_factory=list)

    def __post_init__(self):
        for child, parent in self.edges:
            if child not in self.nodes or parent not in self.nodes:
                raise ValueError(f"edge ({child}, {parent}) references an unknown node")
            if self.nodes[parent].level != self.nodes[child].level + 1:
                raise ValueError(f"edge ({child}, {parent}) does not go up exactly one level")
        self._parents: dict[str, list[str]] = {n: [] for n in self.nodes}
        for child, parent in self.edges:
            self._parents[child].append(parent)

    @classmethod
    def from_complex(cls, complex_: SimplicialComplex, aliases: Mapping[str, str] | None = None) -> AttachmentDag:
        aliases = dict(aliases or {})
        names = {f: aliases.get(f.name, f.name) for f in complex_.faces}
        if len(set(names.values())) != len(names):
            raise ValueError("face aliases must be unique")
        nodes = {}
        edges = []
        for f in complex_.sorted_faces():
            children = ()
            if f.dimension > 0:
                children = tuple(names[Face(sub)] for sub in combinations(f.vertices, f.dimension))
                edges.extend((c, names[f]) for c in children)
            nodes[names[f]] = DagNode(names[f], f.dimension, frozenset(f.vertices), children)
        return cls(nodes, edges)

    @classmethod
    def from_layers(cls, vertices: Sequence[str], faces: Sequence[tuple[str, Sequence[str]]]) -> AttachmentDag:
        """Declare a DAG from vertex names and ``(name, children)`` pairs.

        Faces must be listed after their children; a face sits one level
        above its children, which must all share a level.
        """
        nodes: dict[str, DagNode] = {}
        for v in vertices:
            if v in nodes:
                raise ValueError(f"duplicate node name {v!r}")
            nodes[v] = DagNode(v, 0, frozenset([v]))
        edges = []
        for name, children in faces:
            if name in nodes:
                raise ValueError(f"duplicate node name {name!r}")
            if not children:
                raise ValueError(f"face {name!r} has no children")
            missing = [c for c in children if c not in nodes]
            if missing:
                raise ValueError(f"face {name!r} references undeclared children {missing}")
            levels = {nodes[c].level for c in children}
            if len(levels) != 1:
                raise ValueError(f"children of {name!r} sit on different levels")
            support = frozenset().union(*(nodes[c].support for c in children))
            nodes[name] = DagNode(name, levels.pop() + 1, support, tuple(children))
            edges.extend((c, name) for c in children)
        return cls(nodes, edges)

    @property
    def vertices(self) -> list[str]:
        return [n.name for n in self.nodes.values() if n.is_vertex]

    @property
    def faces(self) -> list[str]:
        """Non-vertex nodes in level order."""
        return [n.name for n in sorted(self.nodes.values(), key=lambda n: n.level) if not n.is_vertex]

    @property
    def levels(self) -> list[list[str]]:
        top = max((n.level for n in self.nodes.values()), default=-1)
        return [[n.name for n in self.nodes.values() if n.level == d] for d in range(top + 1)]

    def parents(self, name: str) -> list[str]:
        return list(self._parents[name])

    def children(self, name: str) -> tuple[str, ...]:
        return self.nodes[name].children

    def is_acyclic(self) -> bool:
        # edges strictly raise the level, but verify independently of that rule
        indeg = {n: 0 for n in self.nodes}
        for _, p in self.edges:
            indeg[p] += 1
        queue = [n for n, d in indeg.items() if d == 0]
        seen = 0
        while queue:
            n = queue.pop()
            seen += 1
            for p in self._parents[n]:
                indeg[p] -= 1
                if indeg[p] == 0:
                    queue.append(p)
        return seen == len(self.nodes)

    def induced(self, vertices: Iterable[str]) -> list[str]:
        """Nodes whose support lies inside ``vertices``."""
        w = frozenset(vertices)
        return [n.name for n in self.nodes.values() if n.support <= w]

    def star(self, name: str) -> set[str]:
        """Nodes reachable upward from ``name``, including itself."""
        if name not in self.nodes:
            raise KeyError(name)
        out = {name}
        stack = [name]
        while stack:
            for p in self._parents[stack.pop()]:
                if p not in out:
                    out.add(p)
                    stack.append(p)
        return out

    def __len__(self) -> int:
        return len(self.nodes)


def attachment_dag(complex_: SimplicialComplex, aliases: Mapping[str, str] | None = None) -> AttachmentDag:
    return AttachmentDag.from_complex(complex_, aliases)
