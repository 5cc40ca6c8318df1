"""Backend equivalence: the compiled kernel must match the pure one exactly."""

import numpy as np
import pytest

from tempmod import PenaltyConfig, PhiSpec, modulus
from tempmod._search import run_search_compiled, run_search_pure
from tempmod.fixtures import glued_paths_graph, random_instance
from tempmod.paths import SearchContext

needs_compiled = pytest.mark.skipif(run_search_compiled is None,
                                    reason="compiled kernel not built")

FIELDS = ("vert", "tau", "cost", "hops", "parent", "arc", "tidx", "target_ids")


def run_both(g, cfg, s, t, rho):
    ctx = SearchContext(g, cfg)
    n_edges = len(g.edges)
    if cfg.mode == "mul-edge":
        a, b = np.zeros(n_edges), np.asarray(rho, dtype=float)
    elif cfg.mode == "add-edge":
        a, b = np.asarray(rho, dtype=float), np.ones(n_edges)
    else:
        a, b = np.asarray(rho, dtype=float), np.zeros(n_edges)
    args = (len(g.vertices), ctx.vptr, ctx.arc_head, ctx.arc_edge, ctx.tptr,
            ctx.times, ctx.phis, g.vertex_index[s], g.vertex_index[t], a, b)
    return run_search_pure(*args), run_search_compiled(*args)


@needs_compiled
class TestKernelEquivalence:
    def test_identical_label_streams_on_random_instances(self):
        rng = np.random.default_rng(31337)
        for _ in range(120):
            g, spec = random_instance(rng)
            rho = rng.uniform(0.0, 1.0, len(g.edges))
            pure, compiled = run_both(g, spec.penalty, spec.source,
                                      spec.target, rho)
            for name, x, y in zip(FIELDS, pure, compiled):
                assert np.array_equal(np.asarray(x), np.asarray(y)), name

    def test_identical_on_zero_density(self):
        g = glued_paths_graph(3, [1.0, 2.0, 3.0])
        cfg = PenaltyConfig("mul-edge", PhiSpec("affine", 1.0))
        pure, compiled = run_both(g, cfg, "a", "b", np.zeros(len(g.edges)))
        for name, x, y in zip(FIELDS, pure, compiled):
            assert np.array_equal(np.asarray(x), np.asarray(y)), name

    def test_backend_choice_does_not_change_results(self, monkeypatch):
        from tempmod import FamilySpec
        g = glued_paths_graph(2, [1.0, 2.0])
        spec = FamilySpec("a", "b", 2.0, PenaltyConfig("mul-edge", PhiSpec("affine", 1.0)))

        monkeypatch.setenv("TEMPMOD_SEARCH_BACKEND", "pure")
        res_pure = modulus(g, spec, 1e-10)
        monkeypatch.setenv("TEMPMOD_SEARCH_BACKEND", "compiled")
        res_comp = modulus(g, spec, 1e-10)
        assert res_pure.value == res_comp.value
        assert res_pure.rho_star == res_comp.rho_star
        assert list(res_pure.plan) == list(res_comp.plan)


class TestBackendSelection:
    def test_active_backend_reports_a_known_name(self):
        from tempmod import active_backend
        assert active_backend() in ("pure", "compiled")

    def test_forced_pure(self, monkeypatch):
        from tempmod import _search
        monkeypatch.setenv("TEMPMOD_SEARCH_BACKEND", "pure")
        assert _search.active_backend() == "pure"
        assert _search.get_kernel() is run_search_pure
