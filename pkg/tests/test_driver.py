from functools import partial

import numpy as np
import pytest
import scipy.sparse.linalg as spla

import heatopt as h
from heatopt import driver
from heatopt.config import preset_config
from heatopt.driver import (
    FULL_ACCURACY,
    ONE_SHOT,
    SolverStrategy,
    run_optimization,
    solve_equation,
)
from heatopt.errors import OptimizationAborted, SolverBreakdownError
from heatopt.krylov import FOM_FULL, FOM_ONESHOT, MOR, Criterion
from heatopt.multigrid import build_hierarchy, build_topology, v_cycle
from heatopt.rom import ReducedBasis, basis_append

from conftest import dirichlet_top


def tiny_config(**overrides):
    cfg = preset_config("paper-2d").with_updates(dims=(16, 16), max_iterations=8)
    return cfg.with_updates(**overrides) if overrides else cfg


def full_strategy(**kw):
    defaults = dict(
        kind=FULL_ACCURACY, mor_enabled=True, r_max_forward=4, r_max_adjoint=4,
        tau_fom=1e-13, tau_mor=1e-6, criterion=Criterion.BACKWARD_ERROR,
    )
    defaults.update(kw)
    return SolverStrategy(**defaults)


def _system(rng, dims=(10, 10)):
    g = dirichlet_top(dims, (1.0, 1.0), value=1.0)
    kappa = rng.uniform(1.0, 50.0, g.num_cells)
    op, rhs_bc = h.assemble_diffusion(g, kappa)
    b = h.source_rhs(g, 10.0) + rhs_bc
    hier = build_hierarchy(build_topology(g), op)
    return g, op, b, h.operator_inf_norm(op), partial(v_cycle, hier)


class TestSolveEquation:
    def test_cold_start_takes_fom_and_appends(self, rng):
        _, op, b, norm_a, precond = _system(rng)
        basis = ReducedBasis.empty(op.shape[0], 3)
        x, rep, basis = solve_equation(full_strategy(), op, b, basis, None, norm_a, precond)
        assert rep.solver_kind == FOM_FULL
        assert basis.size == 1
        assert rep.mor_measure is None

    def test_accepted_mor_leaves_basis_untouched(self, rng):
        _, op, b, norm_a, precond = _system(rng)
        exact = spla.spsolve(op.tocsc(), b)
        basis, _ = basis_append(ReducedBasis.empty(op.shape[0], 3), exact)
        x, rep, basis_after = solve_equation(
            full_strategy(), op, b, basis, None, norm_a, precond
        )
        assert rep.solver_kind == MOR
        assert rep.iterations == 0
        assert rep.converged
        assert basis_after is basis
        assert rep.mor_measure is not None and rep.mor_measure <= 1e-6

    def test_rejected_forward_and_accepted_adjoint_are_independent(self, rng):
        _, op, b_fwd, norm_a, precond = _system(rng)
        b_adj = rng.normal(size=op.shape[0]) * 1e-3
        y_exact = spla.spsolve(op.tocsc(), b_adj)

        bad_basis, _ = basis_append(
            ReducedBasis.empty(op.shape[0], 3), rng.normal(size=op.shape[0])
        )
        good_basis, _ = basis_append(ReducedBasis.empty(op.shape[0], 3), y_exact)

        _, rep_fwd, after_fwd = solve_equation(
            full_strategy(), op, b_fwd, bad_basis, None, norm_a, precond
        )
        _, rep_adj, after_adj = solve_equation(
            full_strategy(), op, b_adj, good_basis, None, norm_a, precond
        )
        assert rep_fwd.solver_kind == FOM_FULL  # rejected surrogate, full solve
        assert rep_fwd.mor_measure is not None and rep_fwd.mor_measure > 1e-6
        assert after_fwd.size == 2  # the full solve was appended
        assert rep_adj.solver_kind == MOR
        assert after_adj.size == 1

    def test_zero_rhs_short_circuits(self, rng):
        _, op, _, norm_a, precond = _system(rng)
        basis = ReducedBasis.empty(op.shape[0], 3)
        x, rep, basis_after = solve_equation(
            full_strategy(), op, np.zeros(op.shape[0]), basis, None, norm_a, precond
        )
        np.testing.assert_array_equal(x, 0.0)
        assert rep.converged and rep.iterations == 0
        assert basis_after.size == 0

    def test_one_shot_runs_single_iteration(self, rng):
        _, op, b, norm_a, precond = _system(rng)
        basis = ReducedBasis.empty(op.shape[0], 3)
        _, rep, _ = solve_equation(
            full_strategy(kind=ONE_SHOT, mor_enabled=False), op, b, basis, None,
            norm_a, precond,
        )
        assert rep.solver_kind == FOM_ONESHOT
        assert rep.iterations == 1

    def test_strategy_validation(self):
        with pytest.raises(ValueError):
            full_strategy(tau_mor=0.0)
        with pytest.raises(ValueError):
            full_strategy(r_max_forward=0)
        with pytest.raises(ValueError):
            SolverStrategy(
                kind="bogus", mor_enabled=False, r_max_forward=1, r_max_adjoint=1,
                tau_fom=1e-13, tau_mor=1e-6, criterion=Criterion.BACKWARD_ERROR,
            )


class TestRunOptimization:
    def test_zero_iterations_returns_initial_design(self):
        cfg = tiny_config(max_iterations=0)
        res = run_optimization(cfg)
        assert res.history == []
        assert res.completed
        np.testing.assert_array_equal(res.rho, cfg.v_frac)

    def test_mgcg_strategy_all_full_solves_within_tolerance(self):
        cfg = tiny_config(strategy_name="mgcg", max_iterations=6)
        res = run_optimization(cfg)
        for record in res.history:
            for eq in (record.forward, record.adjoint):
                assert eq.solver_kind == FOM_FULL
                assert eq.measure <= cfg.tau_fom
                assert eq.mor_measure is None
        assert res.forward_reductions == 0 and res.adjoint_reductions == 0

    def test_one_shot_strategy_every_solve_one_iteration(self):
        cfg = tiny_config(strategy_name="mgcg1", max_iterations=10)
        res = run_optimization(cfg)
        assert res.completed
        for record in res.history:
            assert record.forward.cg_iterations == 1
            assert record.adjoint.cg_iterations == 1
            assert record.forward.solver_kind == FOM_ONESHOT
        assert np.isfinite(res.final_objective)

    def test_objective_decreases_and_volume_feasible(self):
        cfg = tiny_config(strategy_name="mgcg", max_iterations=25)
        res = run_optimization(cfg)
        assert res.history[-1].objective < res.history[0].objective
        assert res.feasible
        assert np.mean(res.rho_tilde) <= cfg.v_frac + 1e-3

    def test_basis_append_iff_fom_solve(self):
        cfg = tiny_config(strategy_name="mor_mgcg", max_iterations=40, tau_mor=1e-4)
        res = run_optimization(cfg)
        kinds = [r.forward.solver_kind for r in res.history]
        assert MOR in kinds and FOM_FULL in kinds  # both paths exercised
        for prev, cur in zip(res.history, res.history[1:]):
            for eq in ("forward", "adjoint"):
                before = getattr(prev, eq).basis_size
                after = getattr(cur, eq).basis_size
                if getattr(cur, eq).solver_kind == MOR:
                    assert after == before
                elif before < cfg.r_max_forward:
                    assert after == before + 1

    def test_reduction_counters_match_history(self):
        cfg = tiny_config(strategy_name="mor_mgcg", max_iterations=30, tau_mor=1e-4)
        res = run_optimization(cfg)
        assert res.forward_reductions == sum(
            1 for r in res.history if r.forward.solver_kind == MOR
        )
        assert res.adjoint_reductions == sum(
            1 for r in res.history if r.adjoint.solver_kind == MOR
        )

    def test_identical_runs_are_bit_identical(self):
        cfg = tiny_config(strategy_name="mor_mgcg", max_iterations=12)
        res_a = run_optimization(cfg)
        res_b = run_optimization(cfg)
        np.testing.assert_array_equal(res_a.rho, res_b.rho)
        for ra, rb in zip(res_a.history, res_b.history):
            # wall times are excluded: everything numeric must match bitwise
            assert ra.objective == rb.objective
            assert ra.constraint == rb.constraint
            for eq in ("forward", "adjoint"):
                ea, eb = getattr(ra, eq), getattr(rb, eq)
                assert ea.solver_kind == eb.solver_kind
                assert ea.cg_iterations == eb.cg_iterations
                assert ea.measure == eb.measure
                assert ea.basis_size == eb.basis_size

    def test_history_indices_and_walltime_monotone(self):
        res = run_optimization(tiny_config(max_iterations=7))
        assert [r.index for r in res.history] == list(range(1, 8))
        times = [r.walltime_s for r in res.history]
        assert all(b >= a for a, b in zip(times, times[1:]))

    def test_log_sink_receives_every_record(self):
        seen = []
        cfg = tiny_config(max_iterations=5)
        res = run_optimization(cfg, log_sink=seen.append)
        assert [r.index for r in seen] == [1, 2, 3, 4, 5]
        assert seen == res.history

    def test_checkpoint_writer_called_at_interval(self):
        written = []
        cfg = tiny_config(max_iterations=6, checkpoint_interval=2)
        run_optimization(
            cfg, field_writer=lambda name, values, it: written.append((name, it))
        )
        assert [(n, i) for n, i in written if n == "rho"] == [("rho", 2), ("rho", 4), ("rho", 6)]

    def test_solver_error_aborts_with_partial_history(self, monkeypatch):
        cfg = tiny_config(strategy_name="mgcg", max_iterations=10)
        real = driver.pcg_solve
        calls = {"n": 0}

        def flaky(*args, **kwargs):
            calls["n"] += 1
            if calls["n"] == 7:  # some solve inside iteration 3+
                raise SolverBreakdownError("injected failure")
            return real(*args, **kwargs)

        monkeypatch.setattr(driver, "pcg_solve", flaky)
        with pytest.raises(OptimizationAborted) as err:
            run_optimization(cfg)
        assert err.value.iteration >= 2
        assert len(err.value.history) == err.value.iteration - 1

    def test_gradient_probe_rejects_broken_sensitivities(self, monkeypatch):
        # flipping the sensitivity sign must be caught by the startup probe
        cfg = tiny_config()
        original = driver.topopt.design_gradient
        monkeypatch.setattr(
            driver.topopt, "design_gradient", lambda *a, **k: -original(*a, **k)
        )
        with pytest.raises(AssertionError, match="orientation"):
            run_optimization(cfg)
