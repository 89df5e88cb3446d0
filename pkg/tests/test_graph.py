import pytest
from hypothesis import given, settings, strategies as st

from kdomset.graph import (GraphError, bfs_distances, format_edgelist,
                           generate, parse_edgelist)


class TestParse:
    def test_path_document(self):
        g = parse_edgelist("4 3\n0 1\n1 2\n2 3")
        assert g.n == 4 and g.m == 3
        assert g.neighbors(1) == (0, 2)

    def test_self_loop_reports_line(self):
        with pytest.raises(GraphError, match="line 2.*self-loop"):
            parse_edgelist("2 1\n0 0")

    def test_duplicate_edge_reports_line(self):
        with pytest.raises(GraphError, match="line 3.*duplicate edge"):
            parse_edgelist("3 2\n0 1\n0 1")

    def test_comments_and_blank_lines_ignored(self):
        g = parse_edgelist("# a path\n\n3 2\n0 1\n# middle\n1 2\n")
        assert g.n == 3

    def test_count_mismatches(self):
        with pytest.raises(GraphError, match="declared m"):
            parse_edgelist("3 3\n0 1\n1 2")
        with pytest.raises(GraphError, match="declared n"):
            parse_edgelist("4 2\n0 1\n1 2")

    def test_malformed_line(self):
        with pytest.raises(GraphError, match="line 2"):
            parse_edgelist("2 1\n0 1 2")

    def test_negative_id(self):
        with pytest.raises(GraphError, match="line 2"):
            parse_edgelist("2 1\n-1 0")

    def test_arbitrary_large_ids(self):
        g = parse_edgelist("2 1\n7 9000000000")
        assert g.nodes == (7, 9000000000)

    def test_roundtrip(self):
        g = generate("gnm-connected", n=12, m=20, seed=3)
        assert parse_edgelist(format_edgelist(g)) == g


class TestGenerate:
    def test_path(self):
        g = generate("path", n=5)
        assert g.edges == frozenset({(0, 1), (1, 2), (2, 3), (3, 4)})

    def test_star(self):
        g = generate("star", n=5)
        assert g.neighbors(0) == (1, 2, 3, 4)
        assert all(g.neighbors(i) == (0,) for i in range(1, 5))

    def test_gnm_deterministic(self):
        a = generate("gnm-connected", n=10, m=15, seed=7)
        b = generate("gnm-connected", n=10, m=15, seed=7)
        assert a.edges == b.edges
        c = generate("gnm-connected", n=10, m=15, seed=8)
        assert a.edges != c.edges

    def test_gnm_infeasible(self):
        with pytest.raises(GraphError):
            generate("gnm-connected", n=10, m=8, seed=0)
        with pytest.raises(GraphError):
            generate("gnm-connected", n=4, m=7, seed=0)

    def test_balanced_tree(self):
        g = generate("balanced-tree", branching=2, height=3)
        assert g.n == 15 and g.m == 14

    def test_grid(self):
        g = generate("grid", rows=3, cols=4)
        assert g.n == 12 and g.m == 3 * 3 + 2 * 4

    def test_unknown_kind(self):
        with pytest.raises(GraphError):
            generate("torus", n=5)

    @pytest.mark.parametrize("kind,params", [
        ("path", {"n": 17}),
        ("cycle", {"n": 9}),
        ("star", {"n": 12}),
        ("balanced-tree", {"branching": 3, "height": 3}),
        ("grid", {"rows": 4, "cols": 7}),
        ("gnm-connected", {"n": 25, "m": 40}),
    ])
    def test_generated_graphs_are_connected_and_consistent(self, kind, params):
        g = generate(kind, seed=11, **params)
        assert g.is_connected()
        assert g.m == len(g.edges)
        for v in g.nodes:
            for w in g.neighbors(v):
                assert v in g.neighbors(w)


class TestBfs:
    def test_path_single_source(self):
        g = generate("path", n=5)
        assert bfs_distances(g, {0}) == {0: 0, 1: 1, 2: 2, 3: 3, 4: 4}

    def test_path_two_sources(self):
        g = generate("path", n=5)
        assert bfs_distances(g, {1, 3}) == {0: 1, 1: 0, 2: 1, 3: 0, 4: 1}

    def test_cycle_max_distance(self):
        g = generate("cycle", n=6)
        assert max(bfs_distances(g, {0}).values()) == 3

    def test_empty_sources(self):
        g = generate("path", n=3)
        with pytest.raises(GraphError):
            bfs_distances(g, set())

    @settings(max_examples=40, deadline=None)
    @given(n=st.integers(3, 24), extra=st.integers(0, 12), seed=st.integers(0, 999))
    def test_triangle_property(self, n, extra, seed):
        m = min(n - 1 + extra, n * (n - 1) // 2)
        g = generate("gnm-connected", n=n, m=m, seed=seed)
        dist = bfs_distances(g, {0})
        for u, v in g.edges:
            assert abs(dist[u] - dist[v]) <= 1
