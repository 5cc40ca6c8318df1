import numpy as np
import pytest

from tempmod import (EdgeRecord, PathStep, PenaltyConfig, PhiSpec,
                     TemporalGraph, TemporalPath, enumerate_trp,
                     min_length_trp, search_length)
from tempmod.fixtures import (decreasing_times_graph, glued_paths_graph,
                              multiedge_graph, path_graph, random_instance)


class TestTemporalPath:
    def test_rejects_bad_sequences(self):
        with pytest.raises(ValueError):
            TemporalPath("a", "b", ())
        with pytest.raises(ValueError):
            TemporalPath("a", "b", (PathStep("e1", 2.0, True),
                                    PathStep("e2", 1.0, True)))
        with pytest.raises(ValueError):
            TemporalPath("a", "b", (PathStep("e1", 1.0, True),
                                    PathStep("e1", 2.0, True)))

    def test_projection_and_accessors(self):
        p = TemporalPath("a", "b", (PathStep("e1", 1.0, True),
                                    PathStep("e2", 3.0, False)))
        assert p.edge_set == frozenset({"e1", "e2"})
        assert p.arrival_time == 3.0
        assert p.hops == 2
        assert p.time_of("e1") == 1.0
        assert p.time_of("zz") is None

    def test_validate_in_graph(self):
        g = path_graph([1.0, 2.0])
        good = TemporalPath("a", "b", (PathStep("e0", 1.0, True),
                                       PathStep("e1", 2.0, True)))
        good.validate_in(g)
        bad_chain = TemporalPath("a", "b", (PathStep("e1", 2.0, True),))
        with pytest.raises(ValueError):
            bad_chain.validate_in(g)
        bad_time = TemporalPath("a", "b", (PathStep("e0", 1.5, True),
                                           PathStep("e1", 2.0, True)))
        with pytest.raises(ValueError):
            bad_time.validate_in(g)

    def test_directed_graph_rejects_backward_steps(self):
        g = TemporalGraph(["a", "b"], [EdgeRecord("e", "a", "b", 1.0, (1.0,))],
                          directed=True)
        p = TemporalPath("b", "a", (PathStep("e", 1.0, False),))
        with pytest.raises(ValueError):
            p.validate_in(g)


class TestEnumerate:
    def test_parallel_edges_one_path_each(self):
        g = multiedge_graph([1.0, 2.0, 3.0])
        fam = enumerate_trp(g, "a", "b", max_hops=5)
        assert [p.edge_ids() for p in fam.paths] == [("e0",), ("e1",), ("e2",)]
        assert not fam.truncated

    def test_increasing_path_graph_single_path(self):
        g = path_graph([1.0, 2.0, 5.0])
        fam = enumerate_trp(g, "a", "b", max_hops=10)
        assert len(fam.paths) == 1
        assert fam.paths[0].edge_ids() == ("e0", "e1", "e2")

    def test_decreasing_times_empty(self):
        fam = enumerate_trp(decreasing_times_graph(), "a", "c", max_hops=10)
        assert fam.paths == []

    def test_lexicographic_order(self):
        g = glued_paths_graph(2, [1.0, 2.0])
        fam = enumerate_trp(g, "a", "b", max_hops=4)
        seqs = [[(s.edge, s.time) for s in p.steps] for p in fam.paths]
        assert seqs == sorted(seqs)

    def test_max_hops_limits_depth(self):
        g = glued_paths_graph(1, [1.0, 2.0, 3.0])
        assert enumerate_trp(g, "a", "b", max_hops=2).paths == []
        assert len(enumerate_trp(g, "a", "b", max_hops=3).paths) == 1

    def test_truncation_flag(self):
        g = multiedge_graph([1.0, 2.0, 3.0])
        fam = enumerate_trp(g, "a", "b", max_hops=3, max_count=2)
        assert fam.truncated and len(fam.paths) == 2

    def test_every_path_is_valid(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            g, spec = random_instance(rng)
            fam = enumerate_trp(g, spec.source, spec.target, max_hops=len(g.edges))
            for p in fam.paths:
                p.validate_in(g)

    def test_vertex_revisit_flag(self):
        # s -e1- a -e2/e3- b, with a second visit to a enabling a late edge
        g = TemporalGraph(["s", "a", "b", "t"], [
            EdgeRecord("e1", "s", "a", 1.0, (1.0,)),
            EdgeRecord("e2", "a", "b", 1.0, (2.0,)),
            EdgeRecord("e3", "b", "a", 1.0, (3.0,)),
            EdgeRecord("e4", "a", "t", 1.0, (4.0,)),
        ], directed=True)
        strict = enumerate_trp(g, "s", "t", max_hops=5)
        free = enumerate_trp(g, "s", "t", max_hops=5, allow_vertex_revisit=True)
        assert [p.edge_ids() for p in strict.paths] == [("e1", "e4")]
        assert [p.edge_ids() for p in free.paths] == [("e1", "e2", "e3", "e4"),
                                                      ("e1", "e4")]


def all_mode_configs():
    return [
        PenaltyConfig("mul-edge", PhiSpec("affine", 0.5)),
        PenaltyConfig("add-edge", PhiSpec("exp0", 0.01)),
        PenaltyConfig("mul-object", PhiSpec("affine", 0.5)),
        PenaltyConfig("add-object", PhiSpec("exp0", 0.01)),
    ]


class TestMinLength:
    def test_reciprocal_density_gives_unit_length(self):
        g = multiedge_graph([1.0, 2.0])
        cfg = PenaltyConfig("mul-edge", PhiSpec("affine", 1.0))
        rho = {"e0": 1.0 / 2.0, "e1": 1.0 / 3.0}
        path, length = min_length_trp(g, "a", "b", rho, cfg)
        assert length == pytest.approx(1.0, abs=1e-12)

    def test_zero_density_zero_length(self):
        g = glued_paths_graph(2, [1.0, 2.0])
        cfg = PenaltyConfig("mul-edge", PhiSpec("affine", 1.0))
        path, length = min_length_trp(g, "a", "b", {}, cfg)
        assert length == 0.0
        path.validate_in(g)

    def test_no_path_returns_none(self):
        cfg = PenaltyConfig("mul-edge", PhiSpec("const", 1.0))
        assert min_length_trp(decreasing_times_graph(), "a", "c", {}, cfg) is None

    def test_negative_density_rejected(self):
        g = multiedge_graph([1.0])
        cfg = PenaltyConfig("mul-edge", PhiSpec("const", 1.0))
        with pytest.raises(ValueError):
            min_length_trp(g, "a", "b", {"e0": -0.1}, cfg)

    def test_deterministic_tiebreak_prefers_low_edge_ids(self):
        g = glued_paths_graph(2, [1.0, 2.0])
        cfg = PenaltyConfig("mul-edge", PhiSpec("affine", 1.0))
        rho = {e.id: 0.1 for e in g.edges}
        path, _ = min_length_trp(g, "a", "b", rho, cfg)
        assert path.edge_ids() == ("p0e0", "p0e1")

    def test_matches_enumeration_on_random_instances(self):
        rng = np.random.default_rng(42)
        checked = 0
        for _ in range(200):
            g, spec = random_instance(rng)
            cfg = spec.penalty
            rho = {e.id: float(r) for e, r in
                   zip(g.edges, rng.uniform(0.0, 1.0, len(g.edges)))}
            fam = enumerate_trp(g, spec.source, spec.target, max_hops=len(g.edges))
            lengths = [search_length(p, rho, cfg) for p in fam.paths]
            got = min_length_trp(g, spec.source, spec.target, rho, cfg)
            if not fam.paths:
                assert got is None
                continue
            checked += 1
            path, length = got
            path.validate_in(g)
            assert length == pytest.approx(min(lengths), rel=1e-12, abs=1e-12)
            assert length <= search_length(path, rho, cfg) + 1e-12
        assert checked > 100

    def test_dominance_disabled_same_minimum(self):
        rng = np.random.default_rng(7)
        done = 0
        while done < 60:
            g, spec = random_instance(rng, max_vertices=6, max_edge_time_pairs=10)
            rho = {e.id: float(r) for e, r in
                   zip(g.edges, rng.uniform(0.0, 1.0, len(g.edges)))}
            fast = min_length_trp(g, spec.source, spec.target, rho, spec.penalty)
            slow = min_length_trp(g, spec.source, spec.target, rho, spec.penalty,
                                  dominance=False)
            if fast is None:
                assert slow is None
                continue
            assert slow is not None
            assert fast[1] == pytest.approx(slow[1], rel=1e-12, abs=1e-12)
            done += 1

    def test_strictly_increasing_times_on_results(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            g, spec = random_instance(rng)
            got = min_length_trp(g, spec.source, spec.target, {}, spec.penalty)
            if got is None:
                continue
            times = [s.time for s in got[0].steps]
            assert all(a < b for a, b in zip(times, times[1:]))
