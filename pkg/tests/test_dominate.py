import pytest
from hypothesis import given, settings, strategies as st

from kdomset.dominate import (DominateError, build_dominating_set, layer_tree,
                              select_guarded, select_literal, tree_dominates)
from kdomset.forest import RootedForest
from kdomset.graph import generate
from kdomset.partition import run_partition


def path_tree(n):
    parent = {0: None}
    parent.update({i: i - 1 for i in range(1, n)})
    return RootedForest(parent, {i: 0 for i in range(n)}, {0: set(range(n))})


def star_tree(n):
    parent = {0: None}
    parent.update({i: 0 for i in range(1, n)})
    return RootedForest(parent, {i: 0 for i in range(n)}, {0: set(range(n))})


def shallow_branch_tree():
    # root 0 with leaf 1 and a chain 0-2-3-4
    parent = {0: None, 1: 0, 2: 0, 3: 2, 4: 3}
    return RootedForest(parent, {i: 0 for i in range(5)}, {0: set(range(5))})


class TestLayerTree:
    def test_path5_k1(self):
        classes = layer_tree(path_tree(5), 0, 1)
        assert classes.classes[0] == frozenset({0, 2, 4})
        assert classes.classes[1] == frozenset({1, 3})

    def test_star_k3(self):
        classes = layer_tree(star_tree(5), 0, 3)
        assert classes.classes[0] == frozenset({0})
        assert classes.classes[1] == frozenset({1, 2, 3, 4})
        assert classes.classes[2] == frozenset()
        assert classes.classes[3] == frozenset()

    def test_classes_partition_tree(self):
        f = shallow_branch_tree()
        classes = layer_tree(f, 0, 2)
        union = set().union(*classes.classes)
        assert union == f.members[0]
        assert sum(len(c) for c in classes.classes) == len(union)


class TestSelectLiteral:
    def test_path5_k1_picks_smaller_class(self):
        ell, chosen = select_literal(layer_tree(path_tree(5), 0, 1))
        assert (ell, chosen) == (1, frozenset({1, 3}))

    def test_star_k3_picks_empty_class(self):
        ell, chosen = select_literal(layer_tree(star_tree(5), 0, 3))
        assert ell == 2 and chosen == frozenset()

    def test_all_singleton_classes_tie_on_smallest_index(self):
        ell, chosen = select_literal(layer_tree(path_tree(2), 0, 1))
        assert ell == 0 and chosen == frozenset({0})


class TestSelectGuarded:
    def test_star_k3_returns_root(self):
        f = star_tree(5)
        ell, augmented, chosen = select_guarded(layer_tree(f, 0, 3), f, 0, 3)
        assert chosen == frozenset({0})
        assert len(chosen) == 5 // 4

    def test_path5_k1_keeps_literal_choice(self):
        f = path_tree(5)
        ell, augmented, chosen = select_guarded(layer_tree(f, 0, 1), f, 0, 1)
        assert chosen == frozenset({1, 3}) and not augmented

    def test_shallow_branch_counterexample(self):
        f = shallow_branch_tree()
        classes = layer_tree(f, 0, 2)
        lit_ell, lit = select_literal(classes)
        assert lit == frozenset({3})
        assert not tree_dominates(f, 0, lit, 2)  # node 1 sits 3 tree edges away
        ell, augmented, chosen = select_guarded(classes, f, 0, 2)
        assert tree_dominates(f, 0, chosen, 2)
        # exhaustive check: no dominating candidate in the guard's menu is smaller
        menu = [classes.classes[i] for i in range(3)]
        menu += [classes.classes[i] | {0} for i in range(1, 3)]
        best = min((len(c) for c in menu if c and tree_dominates(f, 0, frozenset(c), 2)))
        assert len(chosen) == best

    def test_guarded_never_exceeds_literal_plus_one(self):
        for n, k in [(5, 1), (5, 3), (7, 2), (9, 4)]:
            for f in (path_tree(n), star_tree(n)):
                classes = layer_tree(f, 0, k)
                _, lit = select_literal(classes)
                _, _, chosen = select_guarded(classes, f, 0, k)
                assert len(chosen) <= len(lit) + 1


class TestBuildDominatingSet:
    def test_path4_k1_end_to_end(self):
        g = generate("path", n=4)
        forest, _ = run_partition(g, 1)
        dom = build_dominating_set(forest, 1, "guarded")
        assert dom.members == frozenset({0, 2})

    def test_single_tree_guarded_bound(self):
        g = generate("star", n=5)
        forest, _ = run_partition(g, 3)
        dom = build_dominating_set(forest, 3, "guarded")
        assert len(dom.members) <= 5 // 4 + 1

    def test_n_equals_k_plus_one_single_node(self):
        g = generate("path", n=4)
        forest, _ = run_partition(g, 3)
        dom = build_dominating_set(forest, 3, "guarded")
        assert len(dom.members) == 1

    def test_literal_star_k3_is_empty(self):
        g = generate("star", n=5)
        forest, _ = run_partition(g, 3)
        dom = build_dominating_set(forest, 3, "literal")
        assert dom.members == frozenset()

    def test_undersized_tree_rejected(self):
        f = path_tree(3)
        with pytest.raises(DominateError):
            build_dominating_set(f, 3, "guarded")

    def test_unknown_policy(self):
        f = path_tree(3)
        with pytest.raises(DominateError):
            build_dominating_set(f, 1, "smallest")

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 9999), k=st.sampled_from([1, 2, 3, 7]))
    def test_literal_size_bound_and_guarded_slack(self, seed, k):
        import random as _r
        rng = _r.Random(seed)
        n = rng.randint(k + 1, 48)
        m = min(n * (n - 1) // 2, n - 1 + rng.randint(0, n))
        g = generate("gnm-connected", n=n, m=m, seed=seed)
        forest, _ = run_partition(g, k)
        lit = build_dominating_set(forest, k, "literal")
        assert len(lit.members) <= n // (k + 1)
        guard = build_dominating_set(forest, k, "guarded")
        f_count = len(forest.members)
        assert len(guard.members) <= n // (k + 1) + f_count
        for root in forest.members:
            assert len(guard.per_tree[root].members) <= \
                   len(lit.per_tree[root].members) + 1
