import math

import pytest
from hypothesis import given, settings, strategies as st

from tempmod import (InfeasibleObjectError, PathStep, PenaltyConfig, PhiSpec,
                     TemporalPath, phi_eval, psi, rho_length, search_length,
                     usage_row)


def make_path(pairs, source="s", target="t"):
    steps = tuple(PathStep(e, float(t), True) for e, t in pairs)
    return TemporalPath(source, target, steps)


class TestPhi:
    def test_exp_is_one_at_reference_time(self):
        phi = PhiSpec("exp", 1e-7, t0=123456.0)
        assert phi_eval(phi, 123456.0) == 1.0

    def test_affine(self):
        assert phi_eval(PhiSpec("affine", 1.0), 3.0) == 4.0

    def test_const_is_static_limit(self):
        phi = PhiSpec("const", 1.0)
        for t in (0.0, 1.0, 1e9):
            assert phi_eval(phi, t) == 1.0

    def test_lambda_rescales_argument(self):
        phi = PhiSpec("affine", 2.0, lam=0.5)
        assert phi_eval(phi, 4.0) == 1.0 + 2.0 * 2.0
        assert phi.with_lambda(2.0)(4.0) == 1.0 + 2.0 * 8.0

    def test_monotone_in_t_and_lambda(self):
        for kind, v in [("affine", 0.7), ("exp", 0.3), ("exp0", 0.3)]:
            phi = PhiSpec(kind, v)
            vals = [phi_eval(phi, t) for t in (0.0, 1.0, 2.0, 5.0)]
            assert vals == sorted(vals)
            lams = [phi_eval(phi.with_lambda(l), 3.0) for l in (0.1, 0.5, 1.0, 2.0)]
            assert lams == sorted(lams)

    def test_exp0_negative_region_raises(self):
        phi = PhiSpec("exp0", 1.0, t0=5.0)
        with pytest.raises(ValueError):
            phi(1.0)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            phi_eval(PhiSpec("affine", 1.0), -1.0)

    def test_parse_and_spec_string(self):
        for text in ("const:1", "affine:0.5", "exp:1e-07", "exp:0.2:10", "exp0:0.1"):
            phi = PhiSpec.parse(text)
            assert PhiSpec.parse(phi.spec_string()) == phi
        assert PhiSpec.parse("exp:2:3", lam=0.5).lam == 0.5
        with pytest.raises(ValueError):
            PhiSpec.parse("gauss:1")
        with pytest.raises(ValueError):
            PhiSpec.parse("const:1:2")

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            PhiSpec("const", 0.0)
        with pytest.raises(ValueError):
            PhiSpec("affine", -1.0)
        with pytest.raises(ValueError):
            PhiSpec("affine", 1.0, lam=0.0)


class TestModeCompatibility:
    def test_multiplicative_accepts_unit_reference(self):
        PenaltyConfig("mul-edge", PhiSpec("affine", 1.0))
        PenaltyConfig("mul-object", PhiSpec("exp", 1e-7, t0=100.0))
        PenaltyConfig("mul-edge", PhiSpec("const", 1.0))

    def test_multiplicative_rejects_zero_reference(self):
        with pytest.raises(ValueError):
            PenaltyConfig("mul-edge", PhiSpec("exp0", 1.0))
        with pytest.raises(ValueError):
            PenaltyConfig("mul-object", PhiSpec("const", 2.0))

    def test_additive_requires_zero_reference(self):
        PenaltyConfig("add-edge", PhiSpec("exp0", 0.1))
        for bad in (PhiSpec("const", 1.0), PhiSpec("affine", 1.0), PhiSpec("exp", 1.0)):
            with pytest.raises(ValueError):
                PenaltyConfig("add-object", bad)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            PenaltyConfig("mul-vertex", PhiSpec("const", 1.0))


class TestPsi:
    def test_unused_edge_is_one_in_every_mode(self):
        gamma = make_path([("e1", 1), ("e2", 5)])
        for mode, phi in [("mul-edge", PhiSpec("affine", 1.0)),
                          ("mul-object", PhiSpec("affine", 1.0)),
                          ("add-edge", PhiSpec("exp0", 0.01)),
                          ("add-object", PhiSpec("exp0", 0.01))]:
            assert psi(gamma, "other", PenaltyConfig(mode, phi)) == 1.0

    def test_mul_edge_uses_the_step_time(self):
        gamma = make_path([("e", 3)])
        cfg = PenaltyConfig("mul-edge", PhiSpec("affine", 1.0))
        assert psi(gamma, "e", cfg) == 4.0

    def test_mul_object_takes_max_over_times(self):
        # Oracle: brute-force row construction, max(phi(1), phi(5)) = 6.
        gamma = make_path([("e1", 1), ("e2", 5)])
        cfg = PenaltyConfig("mul-object", PhiSpec("affine", 1.0))
        phis = [1.0 + t for _, t, _ in gamma.steps]
        assert max(phis) == 6.0
        assert psi(gamma, "e1", cfg) == 6.0
        assert psi(gamma, "e2", cfg) == 6.0

    def test_additive_forms(self):
        gamma = make_path([("e1", 1), ("e2", 2)])
        phi = PhiSpec("exp0", 0.1)
        total = sum(math.exp(0.1 * t) - 1.0 for t in (1.0, 2.0))
        cfg = PenaltyConfig("add-edge", phi)
        assert psi(gamma, "e1", cfg) == pytest.approx(1.0 / (1.0 - total), rel=1e-15)
        mx = math.exp(0.1 * 2.0) - 1.0
        cfg2 = PenaltyConfig("add-object", phi)
        assert psi(gamma, "e2", cfg2) == pytest.approx(1.0 / (1.0 - mx), rel=1e-15)

    def test_additive_infeasible_raises(self):
        gamma = make_path([("e1", 10), ("e2", 20)])
        cfg = PenaltyConfig("add-edge", PhiSpec("exp0", 1.0))
        with pytest.raises(InfeasibleObjectError):
            psi(gamma, "e1", cfg)
        with pytest.raises(InfeasibleObjectError):
            usage_row(gamma, cfg)


class TestUsageRow:
    def test_paw_graph_rows(self):
        # alpha = phi(4) = 2, beta = phi(3) = 1 with phi(t) = 2^(t-3)
        phi = PhiSpec("exp", math.log(2.0), t0=3.0)
        cfg = PenaltyConfig("mul-object", phi)
        short = make_path([("sa", 1), ("at", 4)])
        long = make_path([("sa", 1), ("ab", 2), ("bt", 3)])
        assert usage_row(short, cfg).entries == {"sa": 2.0, "at": 2.0}
        assert usage_row(long, cfg).entries == {"sa": 1.0, "ab": 1.0, "bt": 1.0}

    def test_static_phi_gives_indicator_row(self):
        gamma = make_path([("e1", 1), ("e2", 2), ("e3", 7)])
        cfg = PenaltyConfig("mul-edge", PhiSpec("const", 1.0))
        assert usage_row(gamma, cfg).entries == {"e1": 1.0, "e2": 1.0, "e3": 1.0}

    def test_support_equals_projection(self):
        gamma = make_path([("e1", 1), ("e2", 2)])
        cfg = PenaltyConfig("mul-edge", PhiSpec("affine", 0.3))
        assert set(usage_row(gamma, cfg).entries) == set(gamma.edge_set)

    def test_multiplicative_entries_at_least_one_for_normalized_phi(self):
        gamma = make_path([("e1", 1), ("e2", 2)])
        for mode in ("mul-edge", "mul-object"):
            cfg = PenaltyConfig(mode, PhiSpec("affine", 0.5))
            assert all(v >= 1.0 for v in usage_row(gamma, cfg).entries.values())

    def test_additive_row_matches_critical_length_form(self):
        gamma = make_path([("e1", 1), ("e2", 3)])
        phi = PhiSpec("exp0", 0.05)
        cfg = PenaltyConfig("add-edge", phi)
        total = sum(phi(t) for _, t, _ in gamma.steps)
        row = usage_row(gamma, cfg)
        for v in row.entries.values():
            assert v == pytest.approx(1.0 / (1.0 - total), rel=1e-15)


class TestRhoLength:
    def test_mul_edge_is_weighted_sum(self):
        gamma = make_path([("e1", 1), ("e2", 2)])
        cfg = PenaltyConfig("mul-edge", PhiSpec("affine", 1.0))
        rho = {"e1": 0.5, "e2": 0.25}
        assert rho_length(gamma, rho, cfg) == 2 * 0.5 + 3 * 0.25

    def test_zero_density(self):
        gamma = make_path([("e1", 1), ("e2", 2)])
        cfg = PenaltyConfig("mul-object", PhiSpec("affine", 1.0))
        assert rho_length(gamma, {}, cfg) == 0.0

    def test_mul_object_unit_density(self):
        # r edges at unit density with last time t_r: length r * (1 + t_r).
        r, t_r = 4, 9.0
        gamma = make_path([(f"e{i}", i + 1) for i in range(r - 1)] + [("last", t_r)])
        cfg = PenaltyConfig("mul-object", PhiSpec("affine", 1.0))
        rho = {e: 1.0 for e, _, _ in gamma.steps}
        assert rho_length(gamma, rho, cfg) == r * (1.0 + t_r)

    def test_search_length_matches_rho_length_except_add_edge(self):
        gamma = make_path([("e1", 1), ("e2", 2)])
        rho = {"e1": 0.3, "e2": 0.4}
        for mode, phi in [("mul-edge", PhiSpec("affine", 1.0)),
                          ("mul-object", PhiSpec("affine", 1.0)),
                          ("add-object", PhiSpec("exp0", 0.01))]:
            cfg = PenaltyConfig(mode, phi)
            assert search_length(gamma, rho, cfg) == rho_length(gamma, rho, cfg)
        cfg = PenaltyConfig("add-edge", PhiSpec("exp0", 0.01))
        raw = sum(rho.values()) + sum(cfg.phi(t) for _, t, _ in gamma.steps)
        assert search_length(gamma, rho, cfg) == pytest.approx(raw, rel=1e-15)
        # both forms agree on which side of 1 the path falls
        assert (search_length(gamma, rho, cfg) >= 1.0) == \
               (rho_length(gamma, rho, cfg) >= 1.0)


@st.composite
def synthetic_paths(draw):
    k = draw(st.integers(1, 5))
    times = draw(st.lists(st.integers(1, 30), min_size=k, max_size=k, unique=True))
    times.sort()
    return make_path([(f"e{i}", t) for i, t in enumerate(times)])


ALL_CONFIGS = [
    PenaltyConfig("mul-edge", PhiSpec("affine", 0.6)),
    PenaltyConfig("mul-edge", PhiSpec("exp", 0.05)),
    PenaltyConfig("mul-object", PhiSpec("affine", 0.6)),
    PenaltyConfig("add-edge", PhiSpec("exp0", 0.004)),
    PenaltyConfig("add-object", PhiSpec("exp0", 0.02)),
]


class TestPsiAssumptions:
    @given(synthetic_paths(), st.data())
    @settings(max_examples=60, deadline=None)
    def test_monotone_under_inclusion(self, gamma, data):
        # dropping steps never increases psi on the remaining edges
        if gamma.hops < 2:
            return
        keep = sorted(data.draw(st.sets(
            st.integers(0, gamma.hops - 1), min_size=1, max_size=gamma.hops)))
        sub = TemporalPath(gamma.source, gamma.target,
                           tuple(gamma.steps[i] for i in keep))
        for cfg in ALL_CONFIGS:
            for e, _, _ in sub.steps:
                assert psi(sub, e, cfg) <= psi(gamma, e, cfg) + 1e-12

    @given(synthetic_paths(), st.floats(0.1, 1.0))
    @settings(max_examples=60, deadline=None)
    def test_monotone_under_time_decrease(self, gamma, scale):
        earlier = TemporalPath(gamma.source, gamma.target,
                               tuple(PathStep(s.edge, s.time * scale, s.forward)
                                     for s in gamma.steps))
        for cfg in ALL_CONFIGS:
            for e, _, _ in gamma.steps:
                assert psi(earlier, e, cfg) <= psi(gamma, e, cfg) + 1e-12

    def test_static_limit_in_lambda(self):
        gamma = make_path([("e1", 2), ("e2", 7), ("e3", 10)])
        lams = [10.0 ** (-k) for k in range(1, 7)]
        for cfg in ALL_CONFIGS:
            devs = []
            for lam in lams:
                scaled = PenaltyConfig(cfg.mode, cfg.phi.with_lambda(lam))
                devs.append(max(abs(psi(gamma, e, scaled) - 1.0)
                                for e, _, _ in gamma.steps))
            assert devs == sorted(devs, reverse=True)  # continuous decay
            assert devs[-1] < 1e-4  # psi -> 1 as lambda -> 0
