import math

import numpy as np
import pytest

from oracles import all_partitions, random_bloch_theta
from qdoe.criteria import Criterion, criterion_value, sensitivity, sensitivity_threshold
from qdoe.errors import InfeasibleApportionment, SingularSeed, WrongDimension
from qdoe.fisher import DesignMeasure, fisher_matrix_design, fisher_matrix_povm
from qdoe.quantum import pauli_pvm
from qdoe.qubit import a_optimal, d_optimal, e_optimal, standard_tomography
from qdoe.solver import (
    CandidateSet,
    SolveOptions,
    apportion,
    compare_designs,
    fedorov_wynn,
    materialize_candidates,
    optimal_criterion_value,
    prune_design,
    simplex_grid_minimum,
    sphere_directions,
)


class TestCandidateSets:
    def test_sphere_grid_is_deterministic_and_unit(self):
        grid = sphere_directions(500)
        again = sphere_directions(500)
        assert np.array_equal(grid, again)
        assert np.allclose(np.linalg.norm(grid, axis=1), 1.0, atol=1e-12)

    def test_materialize_pauli(self, bloch3):
        povms = materialize_candidates(CandidateSet.pauli_pvms(), bloch3, [0, 0, 0])
        assert len(povms) == 3

    def test_materialize_random_is_seeded(self, bloch3):
        cs = CandidateSet.random_projective(7, seed=3)
        first = materialize_candidates(cs, bloch3, [0, 0, 0])
        second = materialize_candidates(cs, bloch3, [0, 0, 0])
        for a, b in zip(first, second):
            for ea, eb in zip(a.elements, b.elements):
                assert np.array_equal(ea, eb)

    def test_sld_grid_respects_param_count(self, phase_amplitude):
        povms = materialize_candidates(
            CandidateSet.sld_sphere_grid(11), phase_amplitude, [0.3, 0.5]
        )
        assert len(povms) == 11


class TestFedorovWynn:
    def test_logd_reaches_analytic_optimum(self, bloch3):
        theta = [0.3, 0.2, 0.1]
        report = fedorov_wynn(
            bloch3, theta, Criterion.log_d(), CandidateSet.sld_sphere_grid(2000)
        )
        want = 27.0 * (1.0 - 0.14)
        assert report.converged
        assert report.gap <= 1e-6
        assert math.exp(report.result.value) == pytest.approx(want, rel=1e-4)

    def test_d_criterion_reports_determinant_value(self, bloch3):
        theta = [0.3, 0.2, 0.1]
        report = fedorov_wynn(
            bloch3, theta, Criterion.d(), CandidateSet.sld_sphere_grid(2000)
        )
        assert report.result.value == pytest.approx(27.0 * 0.86, rel=1e-4)
        assert report.exact_gap is not None and report.exact_gap <= 1e-6

    def test_trace_criterion_reaches_analytic_optimum(self, bloch3):
        theta = [0, 0, 0.8]
        report = fedorov_wynn(
            bloch3, theta, Criterion.a(), CandidateSet.sld_sphere_grid(2000)
        )
        assert report.converged
        assert report.result.value == pytest.approx(6.76, rel=1e-4)

    def test_restricted_pauli_candidates(self, bloch3):
        theta = [0, 0, 0.8]
        report = fedorov_wynn(bloch3, theta, Criterion.d(), CandidateSet.pauli_pvms())
        oracle_w, oracle_val = simplex_grid_minimum(
            bloch3, theta, Criterion.d(), [pauli_pvm(k) for k in (1, 2, 3)], 1e-3
        )
        assert report.result.value <= oracle_val + 1e-6
        assert report.result.value >= d_optimal(bloch3, theta).value - 1e-9
        assert np.allclose(np.sort(report.result.design.weights), np.full(3, 1 / 3), atol=1e-4)

    def test_monotone_descent_under_line_search(self, bloch3):
        theta = [0.25, -0.4, 0.3]
        report = fedorov_wynn(
            bloch3, theta, Criterion.a(), CandidateSet.sld_sphere_grid(600)
        )
        history = np.array(report.value_history)
        assert np.all(np.diff(history) <= 1e-12)

    def test_certificate_soundness(self, rng, bloch3):
        theta = random_bloch_theta(rng)
        candidates = CandidateSet.sld_sphere_grid(400)
        report = fedorov_wynn(bloch3, theta, Criterion.log_d(), candidates)
        info = fisher_matrix_design(bloch3, theta, report.result.design)
        threshold = sensitivity_threshold(Criterion.log_d(), info)
        for povm in materialize_candidates(candidates, bloch3, theta):
            point = fisher_matrix_povm(bloch3, theta, povm)
            s = sensitivity(Criterion.log_d(), point, info)
            assert s <= threshold * (1.0 + report.gap + 1e-12)

    def test_restricted_dominance(self, rng, bloch3):
        theta = random_bloch_theta(rng)
        report = fedorov_wynn(bloch3, theta, Criterion.d(), CandidateSet.pauli_pvms())
        unrestricted = d_optimal(bloch3, theta).value
        assert report.result.value >= unrestricted - 1e-9
        singles = [
            criterion_value(Criterion.d(), fisher_matrix_povm(bloch3, theta, pauli_pvm(k)))
            for k in (1, 2, 3)
        ]
        assert report.result.value <= min(singles) + 1e-9

    def test_agreement_with_analytic_optima_on_random_points(self, rng, bloch3):
        for _ in range(20):
            theta = random_bloch_theta(rng, r_max=0.9)
            grid = CandidateSet.sld_sphere_grid(600)
            rep_a = fedorov_wynn(bloch3, theta, Criterion.a(), grid)
            assert rep_a.result.value == pytest.approx(
                a_optimal(bloch3, theta).value, rel=1e-4
            )
            rep_d = fedorov_wynn(bloch3, theta, Criterion.log_d(), grid)
            want = criterion_value(Criterion.log_d(), d_optimal(bloch3, theta).fisher)
            assert rep_d.result.value == pytest.approx(want, rel=1e-4, abs=1e-4)

    def test_singular_seed(self, bloch3):
        candidates = CandidateSet.explicit([pauli_pvm(3)])
        with pytest.raises(SingularSeed):
            fedorov_wynn(bloch3, [0, 0, 0], Criterion.log_d(), candidates)

    def test_no_convergence_reported(self, bloch3):
        options = SolveOptions(max_iters=1, tol=1e-12)
        report = fedorov_wynn(
            bloch3, [0.3, 0.2, 0.1], Criterion.log_d(),
            CandidateSet.sld_sphere_grid(200), options,
        )
        assert not report.converged

    def test_harmonic_step_rule_still_converges(self, bloch3):
        # the harmonic schedule closes the gap like 1/k, so ask only for
        # a modest certificate
        options = SolveOptions(max_iters=10_000, tol=1e-3, step_rule="harmonic")
        report = fedorov_wynn(
            bloch3, [0, 0, 0.5], Criterion.log_d(),
            CandidateSet.sld_sphere_grid(300), options,
        )
        assert report.converged
        want = criterion_value(Criterion.log_d(), d_optimal(bloch3, [0, 0, 0.5]).fisher)
        assert report.result.value == pytest.approx(want, abs=1e-3)

    def test_rejects_unsupported_criterion(self, bloch3):
        with pytest.raises(WrongDimension):
            fedorov_wynn(
                bloch3, [0, 0, 0.5], Criterion.e(), CandidateSet.sld_sphere_grid(100)
            )


class TestPruneDesign:
    def test_drops_dust_weights(self, bloch3):
        design = DesignMeasure([1.0 - 1e-9, 1e-9], [pauli_pvm(3), pauli_pvm(1)])
        pruned = prune_design(bloch3, [0, 0, 0], design)
        assert len(pruned) == 1

    def test_merges_duplicate_support_points(self, bloch3):
        design = DesignMeasure(
            [0.3, 0.2, 0.5], [pauli_pvm(3), pauli_pvm(3), pauli_pvm(1)]
        )
        pruned = prune_design(bloch3, [0, 0, 0], design)
        assert len(pruned) == 2
        assert sorted(pruned.weights) == pytest.approx([0.5, 0.5])

    def test_caps_support_of_solver_output(self, rng, bloch3):
        theta = [0.2, 0.3, -0.1]
        surrogate = Criterion.log_d()
        povms = materialize_candidates(CandidateSet.sld_sphere_grid(50), bloch3, theta)
        design = DesignMeasure(np.full(50, 1 / 50), povms)
        before = criterion_value(
            surrogate, fisher_matrix_design(bloch3, theta, design)
        )
        pruned = prune_design(bloch3, theta, design, cap=7, criterion=surrogate)
        after = criterion_value(surrogate, fisher_matrix_design(bloch3, theta, pruned))
        assert len(pruned) <= 7
        assert after == pytest.approx(before, rel=1e-5)


class TestApportion:
    def test_exact_thirds(self):
        assert np.array_equal(apportion([1 / 3, 1 / 3, 1 / 3], 9), [3, 3, 3])

    def test_exact_multiples(self):
        assert np.array_equal(apportion([0.5, 0.3, 0.2], 10), [5, 3, 2])

    def test_axis_aligned_trace_design(self, bloch3):
        weights = a_optimal(bloch3, [0, 0, 0.8]).design.weights
        counts = apportion(weights, 13)
        assert sorted(counts.tolist()) == [3, 5, 5]

    def test_small_sample_partition_is_near_optimal(self, bloch3):
        # exhaustive search over all 3-partitions of 13 for the trace
        # criterion at the same design's support
        theta = [0, 0, 0.8]
        result = a_optimal(bloch3, theta)
        infos = [fisher_matrix_povm(bloch3, theta, p) for p in result.design.povms]
        counts = apportion(result.design.weights, 13)
        best = None
        for partition in all_partitions(13, 3):
            info = sum(k * j for k, j in zip(partition, infos)) / 13.0
            value = criterion_value(Criterion.a(), info)
            if best is None or value < best[0]:
                best = (value, partition)
        mine = sum(k * j for k, j in zip(counts, infos)) / 13.0
        assert criterion_value(Criterion.a(), mine) == pytest.approx(best[0], rel=1e-12)

    def test_mandatory_weights_get_a_count(self):
        counts = apportion([0.45, 0.45, 0.04, 0.03, 0.03], 4)
        assert counts.sum() == 4
        assert counts[0] >= 1 and counts[1] >= 1

    def test_infeasible_when_too_many_mandatory(self):
        with pytest.raises(InfeasibleApportionment):
            apportion([0.5, 0.5], 1)

    def test_converges_to_weights(self, rng):
        weights = rng.dirichlet(np.ones(4))
        for total in (10, 100, 1000, 10_000):
            counts = apportion(weights, total)
            assert counts.sum() == total
            assert np.max(np.abs(counts / total - weights)) <= 1.0 / total


class TestCompareDesigns:
    @pytest.fixture
    def report(self, bloch3):
        theta = [0, 0, 0.8]
        designs = {
            "A": a_optimal(bloch3, theta).design,
            "D": d_optimal(bloch3, theta).design,
            "E": e_optimal(bloch3, theta).design,
            "ST": standard_tomography(),
        }
        criteria = [Criterion.a(), Criterion.d(), Criterion.e()]
        return compare_designs(bloch3, theta, designs, criteria)

    def test_row_count(self, report):
        assert len(report.rows) == 12

    def test_trace_criterion_efficiencies(self, report):
        rows = {r.design: r for r in report.rows if r.criterion == "A"}
        assert rows["A"].efficiency == pytest.approx(1.0, abs=1e-12)
        x = 6.76 / (3.0 * 2.36)
        for name in ("D", "E", "ST"):
            assert rows[name].efficiency == pytest.approx(x, abs=1e-9)

    def test_min_eigenvalue_efficiency_of_d_design(self, report):
        rows = {r.design: r for r in report.rows if r.criterion == "E"}
        assert rows["D"].efficiency == pytest.approx((3.0 - 0.64) / 3.0, abs=1e-9)

    def test_pure_limit_determinant_efficiencies_vanish(self, bloch3):
        # generic direction: axis-aligned Bloch vectors keep standard
        # tomography D-optimal all the way to the boundary
        r2 = 1.0 - 1e-6
        unit = np.array([0.5, 0.5, math.sqrt(0.5)])
        theta = math.sqrt(r2) * unit
        designs = {
            "A": a_optimal(bloch3, theta).design,
            "E": e_optimal(bloch3, theta).design,
            "ST": standard_tomography(),
        }
        report = compare_designs(bloch3, theta, designs, [Criterion.d()])
        for row in report.rows:
            assert row.efficiency < 0.01

    def test_singular_design_scores_zero(self, bloch3):
        designs = {"z-only": DesignMeasure([1.0], [pauli_pvm(3)])}
        report = compare_designs(bloch3, [0, 0, 0.5], designs, [Criterion.a()])
        assert math.isinf(report.rows[0].value)
        assert report.rows[0].efficiency == 0.0


class TestOptimalCriterionValue:
    def test_uses_closed_forms_for_qubits(self, bloch3):
        theta = [0, 0, 0.8]
        assert optimal_criterion_value(bloch3, theta, Criterion.a()) == pytest.approx(6.76)
        assert optimal_criterion_value(bloch3, theta, Criterion.e()) == pytest.approx(2.36)

    def test_direction_criterion(self, phase_amplitude):
        got = optimal_criterion_value(phase_amplitude, [0.2, 0.5], Criterion.c([1, 0]))
        assert got == pytest.approx(4.0, rel=1e-9)

    def test_weighted_trace_falls_back_to_solver(self, bloch3):
        from qdoe.fisher import sld_fisher

        theta = [0.1, 0.2, 0.3]
        sld = sld_fisher(bloch3, theta)
        got = optimal_criterion_value(
            bloch3, theta, Criterion.a(sld), CandidateSet.sld_sphere_grid(500)
        )
        # weighted-A optimum with the SLD weight equals tr(S (S/n)^-1) = n^2
        assert got == pytest.approx(9.0, rel=1e-6)
