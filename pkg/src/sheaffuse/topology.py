"""Topology config files (JSON) -> :class:`~sheaffuse.sheaf.Sheaf`.

Schema::

    {
      "vertices": [{"name": "C1", "dim": 2, "unit": "...", "kind": "camera"}, ...],
      "faces": [{"name": "CS1", "children": ["C1", "S1"], "dim": 1}, ...],
      "generators": [["C1", "S1"], ...],     # alternative to "faces"
      "aliases": {"C1,S1": "CS1"},           # only with "generators"
      "default_face_stalk": {"dim": 1, "unit": "ug/m3"},
      "maps": [{"source": "C1", "target": "CS1", "kind": "guidebook"}, ...],
      "default_map": {"kind": "identity"},   # for edges not listed; omit to require all
      "guidebook": {"mode": "mass", "vkt_km": 1.0},
      "emission_factors": {"two_wheeled": 0.047, "four_wheeled": 0.117}
    }

Map kinds: ``identity``, ``linear`` (with ``matrix``), ``guidebook`` (with
optional ``mode`` / ``vkt_km``), ``composite`` (with a list ``maps`` of
nested specs).  Faces must appear after their children.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .emissions import EmissionFactorTable
from .sheaf import (
    CompositeMap,
    GuidebookMap,
    IdentityMap,
    LinearMap,
    RestrictionMap,
    Sheaf,
    SheafError,
    StalkSpec,
    build_sheaf,
)
from .simplicial import AttachmentDag, complex_from_generators

DEFAULT_TOPOLOGY = "air_network.json"


class TopologyError(ValueError):
    pass


@dataclass
class Topology:
    sheaf: Sheaf
    kinds: dict[str, str] = field(default_factory=dict)
    ef: EmissionFactorTable = field(default_factory=EmissionFactorTable)
    description: str = ""

    @property
    def vertices(self) -> list[str]:
        return self.sheaf.vertices


def _make_map(spec: dict, source: str, target: str, stalks: dict[str, StalkSpec],
              ef: EmissionFactorTable, gb_defaults: dict) -> RestrictionMap:
    kind = spec.get("kind", "identity")
    if kind == "identity":
        return IdentityMap(source, target, stalks[source].dim)
    if kind == "linear":
        if "matrix" not in spec:
            raise TopologyError(f"linear map {source}->{target} needs a 'matrix'")
        return LinearMap(source, target, tuple(map(tuple, spec["matrix"])))
    if kind == "guidebook":
        return GuidebookMap(source, target, ef,
                            spec.get("mode", gb_defaults.get("mode", "mass")),
                            float(spec.get("vkt_km", gb_defaults.get("vkt_km", 1.0))))
    if kind == "composite":
        parts = []
        dims = dict(stalks)
        for i, sub in enumerate(spec.get("maps", [])):
            # intermediate stalks are anonymous; only the dimensions matter
            m = _make_map(sub, f"{source}#{i}" if i else source, f"{source}#{i + 1}", dims, ef, gb_defaults)
            dims[f"{source}#{i + 1}"] = StalkSpec(f"{source}#{i + 1}", m.out_dim)
            parts.append(m)
        return CompositeMap(source, target, tuple(parts))
    raise TopologyError(f"unknown map kind {kind!r} on {source}->{target}")


def topology_from_dict(data: dict) -> Topology:
    try:
        vertices = data["vertices"]
    except KeyError:
        raise TopologyError("topology needs a 'vertices' list") from None
    if not vertices:
        raise TopologyError("topology declares no vertices")
    if "emission_factors" in data:
        ef = EmissionFactorTable({k: float(v) for k, v in data["emission_factors"].items()})
    else:
        ef = EmissionFactorTable()

    vnames = [v["name"] for v in vertices]
    if "faces" in data:
        base = AttachmentDag.from_layers(vnames, [(f["name"], f["children"]) for f in data["faces"]])
        face_specs = {f["name"]: f for f in data["faces"]}
    elif "generators" in data:
        # declared vertices absent from every generator become isolated vertices
        cx = complex_from_generators(list(data["generators"]) + [[v] for v in vnames])
        extra = set(cx.vertex_set) - set(vnames)
        if extra:
            raise TopologyError(f"generators use undeclared vertices {sorted(extra)}")
        base = AttachmentDag.from_complex(cx, data.get("aliases"))
        face_specs = {}
    else:
        base = AttachmentDag.from_layers(vnames, [])
        face_specs = {}

    default_stalk = data.get("default_face_stalk", {})
    stalks = {v["name"]: StalkSpec(v["name"], int(v.get("dim", 1)), v.get("unit", "")) for v in vertices}
    for f in base.faces:
        spec = face_specs.get(f, {})
        stalks[f] = StalkSpec(f, int(spec.get("dim", default_stalk.get("dim", 1))),
                              spec.get("unit", default_stalk.get("unit", "")))

    gb_defaults = data.get("guidebook", {})
    listed = {}
    for spec in data.get("maps", []):
        key = (spec["source"], spec["target"])
        if key in listed:
            raise TopologyError(f"edge {key[0]}->{key[1]} has two map declarations")
        listed[key] = spec
    default_map = data.get("default_map")
    maps = []
    for edge in base.edges:
        spec = listed.pop(edge, None)
        if spec is None:
            if default_map is None:
                raise TopologyError(f"no restriction map declared for edge {edge[0]}->{edge[1]}")
            spec = default_map
        maps.append(_make_map(spec, edge[0], edge[1], stalks, ef, gb_defaults))
    if listed:
        raise TopologyError(f"maps declared on edges not in the DAG: {sorted(listed)}")

    try:
        sheaf = build_sheaf(base, stalks.values(), maps)
    except SheafError as exc:
        raise TopologyError(str(exc)) from exc
    kinds = {v["name"]: v.get("kind", "dust" if int(v.get("dim", 1)) == 1 else "camera") for v in vertices}
    return Topology(sheaf, kinds, ef, data.get("description", ""))


def load_topology(path=None) -> Topology:
    """Load a topology file; ``None`` loads the bundled two-camera/two-sensor network."""
    if path is None:
        text = resources.files("sheaffuse").joinpath("data").joinpath(DEFAULT_TOPOLOGY).read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"topology file is not valid JSON: {exc}") from exc
    return topology_from_dict(data)


def default_topology() -> Topology:
    return load_topology(None)


def default_sheaf() -> Sheaf:
    return default_topology().sheaf
