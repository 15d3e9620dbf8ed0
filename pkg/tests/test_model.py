import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from msa.assembly import assemble
from msa.fixtures import FIGURE_EDGES, figure_dof_index, portal_frame, spring_pair
from msa.model import (RESTRAINED, Element, Model, ModelError, Node, Restraint, build_dof_map,
                       dof_graph_edges, model_to_dict, parse_model, serialize_model)

from conftest import random_model

SPRING_DOC = """{
  "nodes": [{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 1, "y": 0}],
  "elements": [{"id": 1, "kind": "spring", "nodes": [1, 2], "props": {"k": 1000}}],
  "restraints": [{"node": 1, "fixed": ["ux", "uy", "rz"]}]
}"""


def _doc(**changes):
    d = json.loads(SPRING_DOC)
    d.update(changes)
    return json.dumps(d)


class TestParse:
    def test_spring_document(self):
        m = parse_model(SPRING_DOC)
        assert len(m.elements) == 1
        assert m.elements[0].props == {"k": 1000}
        assert build_dof_map(m).n == 3

    def test_bytes_input(self):
        assert parse_model(SPRING_DOC.encode()) == parse_model(SPRING_DOC)

    def test_dangling_reference(self):
        bad = _doc(elements=[{"id": 1, "kind": "spring", "nodes": [1, 99], "props": {"k": 1}}])
        with pytest.raises(ModelError, match="dangling"):
            parse_model(bad)

    def test_unknown_kind(self):
        bad = _doc(elements=[{"id": 1, "kind": "shell", "nodes": [1, 2], "props": {"k": 1}}])
        with pytest.raises(ModelError, match="unknown element kind"):
            parse_model(bad)

    def test_negative_stiffness(self):
        bad = _doc(elements=[{"id": 1, "kind": "spring", "nodes": [1, 2], "props": {"k": -1}}])
        with pytest.raises(ModelError, match="negative stiffness"):
            parse_model(bad)

    def test_zero_length(self):
        bad = _doc(nodes=[{"id": 1, "x": 0, "y": 0}, {"id": 2, "x": 0, "y": 0}])
        with pytest.raises(ModelError, match="non-positive length"):
            parse_model(bad)

    def test_syntax_error_reports_position(self):
        with pytest.raises(ModelError) as err:
            parse_model('{\n  "nodes": [,]\n}')
        assert err.value.line == 2
        assert err.value.column is not None
        assert "line 2" in str(err.value)

    @pytest.mark.parametrize("doc", [
        _doc(extra=1),
        _doc(nodes=[{"id": 1, "x": 0, "y": 0, "z": 0}, {"id": 2, "x": 1, "y": 0}]),
        _doc(elements=[{"id": 1, "kind": "spring", "nodes": [1, 2], "props": {"k": 1, "ea": 1}}]),
        _doc(elements=[{"id": 1, "kind": "beam2d", "nodes": [1, 2], "props": {"ea": 1}}]),
        _doc(restraints=[{"node": 1, "fixed": ["ux"], "why": "x"}]),
    ])
    def test_unknown_or_missing_keys_rejected(self, doc):
        with pytest.raises(ModelError):
            parse_model(doc)

    @pytest.mark.parametrize("doc", [
        SPRING_DOC.replace('"x": 1', '"x": NaN'),
        SPRING_DOC.replace('"x": 1', '"x": Infinity'),
        SPRING_DOC.replace('"x": 1', '"x": "1"'),
        SPRING_DOC.replace('"id": 2', '"id": 2.5'),
        SPRING_DOC.replace('"id": 2', '"id": 0'),
        SPRING_DOC.replace('"fixed": ["ux", "uy", "rz"]', '"fixed": []'),
        SPRING_DOC.replace('"fixed": ["ux", "uy", "rz"]', '"fixed": ["uz"]'),
        SPRING_DOC.replace('"nodes": [1, 2]', '"nodes": [2, 2]'),
        SPRING_DOC.replace('"nodes": [1, 2]', '"nodes": [1, 2, 3]'),
        '[]',
    ])
    def test_invalid_values_rejected(self, doc):
        with pytest.raises(ModelError):
            parse_model(doc)

    def test_no_elements(self):
        with pytest.raises(ModelError, match="no elements"):
            parse_model(_doc(elements=[]))

    def test_duplicate_ids(self):
        with pytest.raises(ModelError, match="duplicate node"):
            parse_model(_doc(nodes=[{"id": 1, "x": 0, "y": 0}, {"id": 1, "x": 1, "y": 0}]))


class TestRoundTrip:
    def test_fixture_round_trip(self):
        m = portal_frame(eps=1e-8)
        text = serialize_model(m)
        assert parse_model(text) == m
        assert serialize_model(parse_model(text)) == text

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_random_round_trip(self, seed):
        m = random_model(np.random.default_rng(seed), n_elements=int(seed % 12) + 1)
        text = serialize_model(m)
        assert parse_model(text) == m
        assert serialize_model(parse_model(text)) == text

    def test_canonical_restraint_order(self):
        m = Model((Node(1, 0, 0), Node(2, 1, 0)),
                  (Element(1, "spring", (1, 2), {"k": 1.0}),),
                  (Restraint(1, ("rz", "ux")),))
        assert model_to_dict(m)["restraints"][0]["fixed"] == ["ux", "rz"]


class TestDofMap:
    def test_free_node_on_beam_contributes_three(self):
        m = Model((Node(1, 0, 0), Node(2, 2, 0)),
                  (Element(1, "beam2d", (1, 2), {"ea": 1.0, "ei": 1.0}),),
                  (Restraint(1, ("ux", "uy", "rz")),))
        dm = build_dof_map(m)
        assert dm.n == 3
        assert dm.node_dofs[2] == (0, 1, 2)
        assert dm.element_dofs[0].tolist() == [RESTRAINED] * 3 + [0, 1, 2]

    def test_fully_restrained(self):
        m = Model((Node(1, 0, 0), Node(2, 1, 0)),
                  (Element(1, "spring", (1, 2), {"k": 1.0}),),
                  (Restraint(1, ("ux", "uy", "rz")), Restraint(2, ("ux", "uy", "rz"))))
        dm = build_dof_map(m)
        assert dm.n == 0
        with pytest.raises(ModelError, match="fully restrained"):
            assemble(m, dm)

    def test_spring_one_restrained_dof(self):
        m = Model((Node(1, 0, 0), Node(2, 1, 0)),
                  (Element(1, "spring", (1, 2), {"k": 1.0}),),
                  (Restraint(1, ("ux",)),))
        dm = build_dof_map(m)
        assert dm.n == 6 - 1
        # spring m_e carries the four translational entries
        assert dm.element_dofs[0].tolist() == [RESTRAINED, 0, 2, 3]

    def test_canonical_numbering_sorted_by_node_id(self):
        m = Model((Node(5, 0, 0), Node(2, 1, 0)),
                  (Element(1, "spring", (5, 2), {"k": 1.0}),), ())
        dm = build_dof_map(m)
        assert dm.node_dofs[2] == (0, 1, 2)
        assert dm.node_dofs[5] == (3, 4, 5)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_bijection(self, seed):
        m = random_model(np.random.default_rng(seed))
        dm = build_dof_map(m)
        used = sorted(g for idx in dm.node_dofs.values() for g in idx if g != RESTRAINED)
        assert used == list(range(dm.n))
        fixed = {r.node: set(r.fixed) for r in m.restraints}
        free = sum(3 - len(fixed.get(nd.id, ())) for nd in m.nodes)
        assert free == dm.n
        for me in dm.element_dofs:
            assert np.all((me == RESTRAINED) | ((me >= 0) & (me < dm.n)))

    def test_incidence_counts(self):
        dm = build_dof_map(spring_pair())
        assert dm.incidence_counts().tolist() == [1, 1, 0]


class TestFigureGraph:
    def test_portal_graph_isomorphic_to_figure(self):
        dm = build_dof_map(portal_frame())
        assert dm.n == 7
        G = nx.Graph(list(dof_graph_edges(dm)))
        H = nx.Graph(list(FIGURE_EDGES))
        assert G.number_of_nodes() == 7 and G.number_of_edges() == 11
        assert nx.is_isomorphic(G, H)

    def test_figure_labels_map_edges_exactly(self):
        dm = build_dof_map(portal_frame())
        relabel = {figure_dof_index(dm, lab): lab for lab in range(1, 8)}
        edges = {tuple(sorted((relabel[a], relabel[b]))) for a, b in dof_graph_edges(dm)}
        assert edges == set(FIGURE_EDGES)

    def test_dof7_only_in_weak_members(self):
        m = portal_frame()
        dm = build_dof_map(m)
        j7 = figure_dof_index(dm, 7)
        touching = [eid for eid, me in zip(dm.element_ids, dm.element_dofs) if j7 in me]
        assert touching == [7, 8]
