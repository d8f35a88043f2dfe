import json

import pytest

from sheaffuse.sheaf import GuidebookMap, IdentityMap, LinearMap
from sheaffuse.topology import TopologyError, default_topology, load_topology, topology_from_dict


def test_default_topology():
    topo = default_topology()
    assert topo.vertices == ["C1", "C2", "S1", "S2"]
    assert topo.kinds == {"C1": "camera", "C2": "camera", "S1": "dust", "S2": "dust"}
    gb = [e for e, m in topo.sheaf.maps.items() if isinstance(m, GuidebookMap)]
    assert sorted(gb) == sorted([("C1", "CS1"), ("C1", "CS3"), ("C1", "C"),
                                 ("C2", "CS2"), ("C2", "CS4"), ("C2", "C")])
    assert len(topo.sheaf.maps) == 20


def test_generators_with_aliases():
    topo = topology_from_dict({
        "vertices": [{"name": "a"}, {"name": "b"}, {"name": "c"}],
        "generators": [["a", "b"], ["b", "c"]],
        "aliases": {"a,b": "AB"},
        "default_map": {"kind": "identity"},
    })
    assert set(topo.sheaf.faces) == {"AB", "b,c"}


def test_linear_and_composite_maps():
    topo = topology_from_dict({
        "vertices": [{"name": "v", "dim": 2}, {"name": "w"}],
        "faces": [{"name": "vw", "children": ["v", "w"]}],
        "maps": [{"source": "v", "target": "vw", "kind": "composite",
                  "maps": [{"kind": "linear", "matrix": [[2, 0], [0, 2]]}, {"kind": "guidebook"}]}],
        "default_map": {"kind": "identity"},
    })
    m = topo.sheaf.restriction("v", "vw")
    assert m([100, 10])[0] == pytest.approx(2 * (100 * 0.047 + 10 * 0.117))
    assert isinstance(topo.sheaf.restriction("w", "vw"), IdentityMap)
    assert isinstance(m.maps[0], LinearMap)


@pytest.mark.parametrize("data,match", [
    ({}, "vertices"),
    ({"vertices": []}, "no vertices"),
    ({"vertices": [{"name": "a"}, {"name": "b"}], "faces": [{"name": "ab", "children": ["a", "b"]}]},
     "no restriction map"),
    ({"vertices": [{"name": "a"}, {"name": "b"}], "faces": [{"name": "ab", "children": ["a", "b"]}],
      "default_map": {"kind": "warp"}}, "unknown map kind"),
    ({"vertices": [{"name": "a", "dim": 2}, {"name": "b"}], "faces": [{"name": "ab", "children": ["a", "b"]}],
      "default_map": {"kind": "identity"}}, "stalks are"),
    ({"vertices": [{"name": "a"}], "generators": [["a", "z"]], "default_map": {"kind": "identity"}},
     "undeclared"),
    ({"vertices": [{"name": "a"}, {"name": "b"}], "faces": [{"name": "ab", "children": ["a", "b"]}],
      "maps": [{"source": "b", "target": "a"}], "default_map": {"kind": "identity"}}, "not in the DAG"),
])
def test_topology_errors(data, match):
    with pytest.raises((TopologyError, ValueError), match=match):
        topology_from_dict(data)


def test_load_from_file(tmp_path):
    p = tmp_path / "t.json"
    p.write_text(json.dumps({"vertices": [{"name": "x"}]}))
    assert load_topology(p).vertices == ["x"]
    p.write_text("{not json")
    with pytest.raises(TopologyError, match="JSON"):
        load_topology(p)
