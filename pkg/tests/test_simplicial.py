import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sheaffuse.simplicial import (
    AttachmentDag,
    Face,
    SimplicialComplex,
    attachment_dag,
    complex_from_generators,
    induced_subcomplex,
    star,
)

EQ3 = [{"C1", "C2"}, {"S1", "S2"}, {"C1", "S1"}, {"C2", "S2"}, {"C1", "S2"}, {"C2", "S1"}]


@pytest.fixture
def eq3():
    return complex_from_generators(EQ3)


def names(faces):
    return {f.name for f in faces}


def test_face_name_is_order_independent():
    assert Face.of("b", "a").name == Face.of("a", "b").name == "a,b"
    assert Face.of("a", "b", "c").dimension == 2


def test_face_rejects_empty_and_duplicates():
    with pytest.raises(ValueError):
        Face(())
    with pytest.raises(ValueError):
        Face(("a", "a"))


def test_eq3_complex_has_ten_faces(eq3):
    assert len(eq3) == 10
    assert len(eq3.faces_of_dimension(0)) == 4
    assert len(eq3.faces_of_dimension(1)) == 6


def test_singleton_generator():
    cx = complex_from_generators([{"v"}])
    assert names(cx.faces) == {"v"}


def test_triangle_closure():
    cx = complex_from_generators([{"a", "b", "c"}])
    assert len(cx) == 7
    assert [len(cx.faces_of_dimension(d)) for d in range(3)] == [3, 3, 1]


def test_empty_generators_rejected():
    with pytest.raises(ValueError, match="empty"):
        complex_from_generators([])
    with pytest.raises(ValueError):
        complex_from_generators([set()])


def test_non_closed_family_rejected():
    with pytest.raises(ValueError):
        SimplicialComplex([Face.of("a", "b")])


def test_attachment_dag_edge_counts(eq3):
    assert len(attachment_dag(eq3).edges) == 12
    assert len(attachment_dag(eq3)) == 10
    assert attachment_dag(complex_from_generators([{"v"}])).edges == []
    assert len(attachment_dag(complex_from_generators([{"a", "b", "c"}])).edges) == 9


def test_star_examples(eq3):
    assert names(star(eq3, Face.of("C1"))) == {"C1", "C1,C2", "C1,S1", "C1,S2"}
    assert names(star(eq3, Face.of("S1", "S2"))) == {"S1,S2"}
    with pytest.raises(KeyError):
        star(eq3, Face.of("C1", "C2", "S1"))


def test_induced_subcomplex_examples(eq3):
    assert names(induced_subcomplex(eq3, {"C1", "S1"}).faces) == {"C1", "S1", "C1,S1"}
    assert induced_subcomplex(eq3, eq3.vertex_set) == eq3
    assert names(induced_subcomplex(eq3, {"C1"}).faces) == {"C1"}
    assert induced_subcomplex(eq3, set()).is_empty()


def test_induced_rejects_unknown_vertices(eq3):
    with pytest.raises(KeyError):
        induced_subcomplex(eq3, {"Z"})


def test_layered_dag_supports_and_levels():
    dag = AttachmentDag.from_layers(["a", "b", "c"], [("ab", ["a", "b"]), ("bc", ["b", "c"]), ("top", ["ab", "bc"])])
    assert dag.levels == [["a", "b", "c"], ["ab", "bc"], ["top"]]
    assert dag.nodes["top"].support == {"a", "b", "c"}
    assert dag.star("b") == {"b", "ab", "bc", "top"}
    assert set(dag.induced({"a", "b"})) == {"a", "b", "ab"}
    assert dag.is_acyclic()


def test_layered_dag_errors():
    with pytest.raises(ValueError, match="undeclared"):
        AttachmentDag.from_layers(["a"], [("x", ["a", "b"])])
    with pytest.raises(ValueError, match="different levels"):
        AttachmentDag.from_layers(["a", "b"], [("ab", ["a", "b"]), ("bad", ["ab", "a"])])
    with pytest.raises(ValueError, match="duplicate"):
        AttachmentDag.from_layers(["a", "a"], [])


def test_aliases_rename_faces(eq3):
    dag = attachment_dag(eq3, {"C1,S1": "CS1"})
    assert "CS1" in dag.nodes and "C1,S1" not in dag.nodes
    assert dag.children("CS1") == ("C1", "S1")


generator_sets = st.lists(
    st.sets(st.sampled_from("abcdef"), min_size=1, max_size=4), min_size=1, max_size=5
)


@settings(max_examples=200, deadline=None)
@given(gens=generator_sets)
def test_downward_closure_and_minimality(gens):
    cx = complex_from_generators(gens)
    for f in cx.faces:
        for k in range(1, len(f.vertices)):
            for sub in itertools.combinations(f.vertices, k):
                assert Face(sub) in cx
        assert any(set(f.vertices) <= g for g in gens)
    assert complex_from_generators([f.vertices for f in cx.faces]) == cx


@settings(max_examples=200, deadline=None)
@given(gens=generator_sets, data=st.data())
def test_dag_and_induced_properties(gens, data):
    cx = complex_from_generators(gens)
    dag = attachment_dag(cx)
    assert dag.is_acyclic()
    maximal = names(cx.maximal_faces())
    for n in dag.nodes:
        if n not in maximal:
            assert dag.parents(n)
    w = data.draw(st.sets(st.sampled_from(sorted(cx.vertex_set))))
    sub = induced_subcomplex(cx, w)
    for f in sub.faces:
        for k in range(1, len(f.vertices)):
            assert all(Face(s) in sub for s in itertools.combinations(f.vertices, k))
