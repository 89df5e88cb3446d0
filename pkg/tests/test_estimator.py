import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from kdomset.estimator import KDominatingSet, as_graph
from kdomset.graph import Graph, GraphError, generate


class TestAsGraph:
    def test_graph_passthrough(self):
        g = generate("path", n=4)
        assert as_graph(g) is g

    def test_edge_pairs(self):
        g = as_graph([(0, 1), (1, 2)])
        assert g.n == 3 and g.m == 2

    def test_numpy_edge_array(self):
        g = as_graph(np.array([[0, 1], [1, 2], [2, 3]]))
        assert g.n == 4

    def test_adjacency_mapping(self):
        g = as_graph({0: [1, 2], 1: [0], 2: [0]})
        assert g.neighbors(0) == (1, 2)

    def test_bad_shape(self):
        with pytest.raises(GraphError):
            as_graph(np.array([1, 2, 3]))


class TestEstimator:
    def test_fit_sets_attributes(self):
        est = KDominatingSet(k=1).fit(generate("path", n=4))
        assert list(est.dominating_set_) == [0, 2]
        assert est.n_nodes_ == 4
        assert est.report_.ok
        assert est.metrics_ is None
        assert list(est.nodes_) == [0, 1, 2, 3]
        assert list(est.labels_) == [0, 0, 2, 2]

    def test_sim_mode_fills_metrics(self):
        est = KDominatingSet(k=1, mode="sim").fit(generate("path", n=4))
        assert list(est.dominating_set_) == [0, 2]
        assert est.metrics_["messages"] > 0

    def test_predict_membership(self):
        est = KDominatingSet(k=1).fit(generate("path", n=4))
        assert list(est.predict()) == [True, False, True, False]
        assert list(est.predict([2, 3])) == [True, False]

    def test_fit_predict(self):
        got = KDominatingSet(k=1).fit_predict(generate("path", n=4))
        assert list(got) == [True, False, True, False]

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            KDominatingSet().predict()

    def test_get_set_params_and_clone(self):
        est = KDominatingSet(k=3, mode="sim", policy="literal")
        params = est.get_params()
        assert params["k"] == 3 and params["policy"] == "literal"
        est.set_params(k=2)
        assert est.k == 2
        dup = clone(est)
        assert dup.get_params() == est.get_params()

    def test_invalid_parameters_raise_at_fit(self):
        g = generate("path", n=4)
        with pytest.raises(ValueError):
            KDominatingSet(k=0).fit(g)
        with pytest.raises(ValueError):
            KDominatingSet(k=4).fit(g)
        with pytest.raises(ValueError):
            KDominatingSet(mode="async").fit(g)
        with pytest.raises(ValueError):
            KDominatingSet(policy="best").fit(g)

    def test_disconnected_rejected(self):
        with pytest.raises(ValueError):
            KDominatingSet(k=1).fit(Graph([(0, 1), (2, 3)]))

    def test_modes_agree(self):
        g = generate("gnm-connected", n=40, m=70, seed=8)
        a = KDominatingSet(k=3, mode="central").fit(g)
        b = KDominatingSet(k=3, mode="sim").fit(g)
        assert list(a.dominating_set_) == list(b.dominating_set_)
        assert list(a.labels_) == list(b.labels_)

    def test_score_within_unit_interval(self):
        est = KDominatingSet(k=2).fit(generate("cycle", n=12))
        assert 0.0 <= est.score() <= 1.0

    def test_determinism(self):
        g = generate("gnm-connected", n=25, m=40, seed=3)
        a = KDominatingSet(k=2, mode="sim").fit(g)
        b = KDominatingSet(k=2, mode="sim").fit(g)
        assert list(a.dominating_set_) == list(b.dominating_set_)
        assert a.metrics_ == b.metrics_
