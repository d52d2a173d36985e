import numpy as np
import pytest

from shotgamma.arrivals import ShotNoiseParams
from shotgamma.degradation import GammaModel
from shotgamma.errors import NumericalError, ValidationError
from shotgamma.lifetime import SystemSpec
from shotgamma.maintenance import (
    CENSORED,
    CORRECTIVE,
    PREVENTIVE,
    CostRates,
    PolicyParams,
    SimControl,
    cycle_rng,
    estimate_cost_rate,
    grid_search,
    sensitivity_sweep,
    simulate_cycle,
)

PARAMS = ShotNoiseParams(1.0, 2.0, 0.5)
SPEC = SystemSpec(PARAMS, GammaModel.deterministic(1.1, 1.4), 10.0)
COSTS = CostRates(preventive=100.0, corrective=200.0, inspection=50.0, downtime_rate=60.0)
POLICY = PolicyParams(19.0 / 3.0, 43.0 / 7.0)
SIM = SimControl()


class TestTypes:
    def test_policy_validation(self):
        with pytest.raises(ValidationError):
            PolicyParams(0.0, 5.0)
        with pytest.raises(ValidationError):
            PolicyParams(1.0, -1.0)
        PolicyParams(1.0, 10.0).validate_against(SPEC)  # M == L is a valid policy
        with pytest.raises(ValidationError):
            PolicyParams(1.0, 10.5).validate_against(SPEC)

    def test_cost_validation_and_warning(self):
        with pytest.raises(ValidationError):
            CostRates(-1.0, 200.0, 50.0, 60.0)
        with pytest.warns(UserWarning):
            CostRates(300.0, 200.0, 50.0, 60.0)

    def test_sim_control_validation(self):
        with pytest.raises(ValidationError):
            SimControl(substeps=0)


class TestSimulateCycle:
    def test_outcome_invariants(self):
        for i in range(300):
            out = simulate_cycle(SPEC, POLICY, COSTS, SIM, cycle_rng(1, 0, i))
            assert out.length == pytest.approx(out.inspections * POLICY.inspection_period)
            assert 0.0 <= out.downtime < POLICY.inspection_period
            if out.action == PREVENTIVE:
                assert out.downtime == 0.0
                want = COSTS.inspection * out.inspections + COSTS.preventive
            elif out.action == CORRECTIVE:
                want = (
                    COSTS.inspection * out.inspections
                    + COSTS.corrective
                    + COSTS.downtime_rate * out.downtime
                )
            else:
                want = COSTS.inspection * out.inspections
            assert out.cycle_cost == pytest.approx(want, rel=1e-12)

    def test_censored_when_nothing_arrives(self):
        dead = SystemSpec(ShotNoiseParams(0.0, 0.0, 0.5), SPEC.growth, 10.0)
        out = simulate_cycle(dead, POLICY, COSTS, SimControl(max_inspections=5), cycle_rng(2, 0, 0))
        assert out.action == CENSORED
        assert out.inspections == 5

    def test_high_threshold_reduces_corrective_share(self):
        # preventive threshold close to a huge failure level: long cycles,
        # essentially no corrective replacements
        roomy = SystemSpec(PARAMS, SPEC.growth, 200.0)
        policy = PolicyParams(8.0, 180.0)
        n_corr = 0
        lengths = []
        for i in range(150):
            out = simulate_cycle(roomy, policy, COSTS, SIM, cycle_rng(3, 0, i))
            lengths.append(out.length)
            n_corr += out.action == CORRECTIVE
        assert np.mean(lengths) > 100.0
        assert n_corr / 150 < 0.05

    def test_determinism(self):
        a = simulate_cycle(SPEC, POLICY, COSTS, SIM, cycle_rng(9, 3, 7))
        b = simulate_cycle(SPEC, POLICY, COSTS, SIM, cycle_rng(9, 3, 7))
        assert a == b


class TestEstimate:
    def test_inspection_only_cost_identity(self):
        only_insp = CostRates(0.0, 0.0, 50.0, 0.0)
        est = estimate_cost_rate(SPEC, POLICY, only_insp, 400, SIM, 11, 0)
        assert est.point == pytest.approx(50.0 / POLICY.inspection_period, rel=1e-12)

    def test_event_partition(self):
        est = estimate_cost_rate(SPEC, POLICY, COSTS, 500, SIM, 12, 0)
        total = est.preventive_fraction + est.corrective_fraction + est.censored_fraction
        assert total == pytest.approx(1.0, abs=1e-15)

    def test_se_scales_like_clt(self):
        a = estimate_cost_rate(SPEC, POLICY, COSTS, 1500, SIM, 13, 0)
        b = estimate_cost_rate(SPEC, POLICY, COSTS, 6000, SIM, 13, 1)
        ratio = b.std_error / a.std_error
        assert 0.32 <= ratio <= 0.75  # ~1/2 with sampling noise

    def test_all_censored_reported(self):
        dead = SystemSpec(ShotNoiseParams(0.0, 0.0, 0.5), SPEC.growth, 10.0)
        with pytest.raises(NumericalError):
            estimate_cost_rate(dead, POLICY, COSTS, 10, SimControl(max_inspections=3), 14, 0)

    def test_deterministic_in_seed(self):
        a = estimate_cost_rate(SPEC, POLICY, COSTS, 200, SIM, 15, 4)
        b = estimate_cost_rate(SPEC, POLICY, COSTS, 200, SIM, 15, 4)
        assert a == b


class TestGridSearch:
    def test_single_cell_passthrough(self):
        res = grid_search(SPEC, COSTS, [6.0], [5.0], 150, SIM, 16)
        assert res.t_opt == 6.0 and res.m_opt == 5.0
        assert len(res.surface) == 1

    def test_thread_count_invariance(self):
        kwargs = dict(t_grid=[4.0, 8.0], m_grid=[3.0, 6.0], n_cycles=120, sim=SIM, master_seed=17)
        res1 = grid_search(SPEC, COSTS, threads=1, **kwargs)
        res2 = grid_search(SPEC, COSTS, threads=2, **kwargs)
        assert res1.surface_rows() == res2.surface_rows()
        assert (res1.t_opt, res1.m_opt) == (res2.t_opt, res2.m_opt)

    def test_tie_breaks_to_smaller_policy(self):
        # zero costs make every cell identically zero
        free = CostRates(0.0, 0.0, 0.0, 0.0)
        res = grid_search(SPEC, free, [4.0, 8.0], [3.0, 6.0], 40, SIM, 18)
        assert (res.t_opt, res.m_opt) == (4.0, 3.0)

    def test_empty_grid_rejected(self):
        with pytest.raises(ValidationError):
            grid_search(SPEC, COSTS, [], [5.0], 10, SIM, 0)


class TestSweep:
    def test_single_cell_matches_grid_search(self):
        rows = sensitivity_sweep(
            SPEC, COSTS, "parameters", [1.1], [1.4], [4.0, 8.0], [3.0, 6.0], 120, SIM, 19
        )
        res = grid_search(SPEC, COSTS, [4.0, 8.0], [3.0, 6.0], 120, SIM, 19)
        assert len(rows) == 1
        assert rows[0].cost_opt == pytest.approx(res.cost)
        assert rows[0].t_opt == res.t_opt and rows[0].m_opt == res.m_opt

    def test_cost_sweep_holds_policy_fixed(self):
        rows = sensitivity_sweep(
            SPEC, COSTS, "costs", [190.0, 210.0], [95.0, 105.0], None, None, 150, SIM, 20,
            fixed_policy=POLICY,
        )
        assert len(rows) == 4
        assert all(r.t_opt == POLICY.inspection_period for r in rows)
        # same seed, same cycles: corrective-cost increase cannot lower cost
        assert rows[2].cost_opt >= rows[0].cost_opt

    def test_cost_sweep_requires_policy(self):
        with pytest.raises(ValidationError):
            sensitivity_sweep(SPEC, COSTS, "costs", [190.0], [95.0], None, None, 10, SIM, 0)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValidationError):
            sensitivity_sweep(SPEC, COSTS, "nope", [1.0], [1.0], [4.0], [3.0], 10, SIM, 0)


class TestAgainstExactLength:
    def test_mean_cycle_length_matches_renewal_series(self):
        # the exact series from the first-exceedance survival at M
        from shotgamma.lifetime import first_passage_law

        law = first_passage_law(SPEC, POLICY.preventive_threshold, 40 * POLICY.inspection_period)
        T = POLICY.inspection_period
        series = T * sum(float(law.survival(i * T)) for i in range(40))
        est = estimate_cost_rate(SPEC, POLICY, COSTS, 8000, SIM, 21, 0)
        se = 3 * est.mean_cycle_length / np.sqrt(8000)  # generous bound on 3*SE
        assert abs(est.mean_cycle_length - series) <= se

    def test_random_effects_cycle_length_matches_series(self):
        spec_re = SystemSpec(
            PARAMS, GammaModel.uniform_inverse_scale(1.1, 1 / 1.4 - 0.1, 1 / 1.4 + 0.1), 10.0
        )
        from shotgamma.lifetime import first_passage_law

        law = first_passage_law(spec_re, POLICY.preventive_threshold, 40 * POLICY.inspection_period)
        T = POLICY.inspection_period
        series = T * sum(float(law.survival(i * T)) for i in range(40))
        est = estimate_cost_rate(spec_re, POLICY, COSTS, 8000, SIM, 22, 0)
        se = 3 * est.mean_cycle_length / np.sqrt(8000)
        assert abs(est.mean_cycle_length - series) <= se
