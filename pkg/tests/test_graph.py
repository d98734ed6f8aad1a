import random

import pytest

from mixbn.errors import CycleError, GraphError
from mixbn.graph import Dag, EdgeConstraints


def dag(nodes, edges=()):
    return Dag(tuple(nodes), frozenset(edges))


class TestAddEdge:
    def test_add(self):
        g = dag("ABC", {("A", "B")}).add_edge("B", "C")
        assert g.edges == {("A", "B"), ("B", "C")}

    def test_cycle_refused(self):
        g = dag("ABC", {("A", "B"), ("B", "C")})
        with pytest.raises(CycleError):
            g.add_edge("C", "A")

    def test_self_loop_refused(self):
        with pytest.raises(GraphError):
            dag("A").add_edge("A", "A")

    def test_unknown_node(self):
        with pytest.raises(GraphError):
            dag("AB").add_edge("A", "Z")

    def test_duplicate_edge(self):
        with pytest.raises(GraphError):
            dag("AB", {("A", "B")}).add_edge("A", "B")


class TestReverseEdge:
    def test_simple_flip(self):
        g = dag("AB", {("A", "B")}).reverse_edge("A", "B")
        assert g.edges == {("B", "A")}

    def test_cyclic_reversal_refused(self):
        g = dag("ABC", {("A", "B"), ("B", "C"), ("A", "C")})
        with pytest.raises(CycleError):
            g.reverse_edge("A", "C")

    def test_missing_edge(self):
        with pytest.raises(GraphError):
            dag("AB").reverse_edge("A", "B")

    def test_self_inverse_when_both_directions_acyclic(self):
        g = dag("ABC", {("A", "B"), ("A", "C")})
        assert g.reverse_edge("A", "B").reverse_edge("B", "A") == g


class TestTopologicalOrder:
    def test_chain(self):
        assert dag("ABC", {("A", "B"), ("B", "C")}).topological_order() == ["A", "B", "C"]

    def test_declaration_order_without_edges(self):
        assert dag(["X", "Y"]).topological_order() == ["X", "Y"]

    def test_ties_by_declaration_order(self):
        assert dag("ABC", {("A", "C"), ("B", "C")}).topological_order() == ["A", "B", "C"]

    def test_parent_precedes_child_property(self):
        rng = random.Random(11)
        for _ in range(30):
            nodes = [f"n{i}" for i in range(6)]
            g = dag(nodes)
            for _ in range(10):
                p, c = rng.sample(nodes, 2)
                try:
                    g = g.add_edge(p, c)
                except (CycleError, GraphError):
                    pass
            order = g.topological_order()
            for p, c in g.edges:
                assert order.index(p) < order.index(c)


class TestParents:
    def test_parent_set(self):
        g = dag("ABC", {("A", "C"), ("B", "C")})
        assert g.parents("C") == {"A", "B"}
        assert g.parents("A") == frozenset()

    def test_unknown_node(self):
        with pytest.raises(GraphError):
            dag("AB").parents("Z")


class TestEdgeConstraints:
    def test_unknown_node_rejected(self):
        with pytest.raises(GraphError):
            EdgeConstraints(frozenset({("A", "Z")})).validate(["A", "B"])

    def test_cyclic_required_set_rejected(self):
        ec = EdgeConstraints(frozenset({("A", "B"), ("B", "A")}))
        with pytest.raises(CycleError):
            ec.validate(["A", "B"])
