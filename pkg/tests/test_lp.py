import numpy as np
import pytest
from scipy.optimize import linprog

from hirelp import lp
from hirelp.errors import SolverError
from hirelp.harness import (random_identical_par_instance, random_par_instance,
                            random_ptk_instance, random_seq_instance,
                            random_sim_instance)
from hirelp.instances import (FiniteDistribution, ParInstance, ProbeTopKInstance,
                              SeqInstance, SimInstance, counterexample_value_ordered,
                              seq_to_ptk, tightness_parallel, tightness_probetopk)


def scipy_lp_seq(inst):
    p = np.asarray(inst.p)
    v = np.asarray(inst.v)
    res = linprog(-(v * p), A_ub=np.vstack([np.ones(inst.n), p]),
                  b_ub=[inst.T, inst.k], bounds=[(0, 1)] * inst.n, method="highs")
    return -res.fun


def scipy_lp_ptk(inst):
    support, q = inst.global_support()
    n, J = q.shape
    nv = n + n * J
    c = np.zeros(nv)
    rows, rhs = [], []
    for i in range(n):
        for j in range(J):
            c[n + i * J + j] = support[j]
            row = np.zeros(nv)
            row[n + i * J + j] = 1.0
            row[i] = -q[i, j]
            rows.append(row)
            rhs.append(0.0)
    row = np.zeros(nv)
    row[:n] = 1.0
    rows.append(row)
    rhs.append(inst.T)
    row = np.zeros(nv)
    row[n:] = 1.0
    rows.append(row)
    rhs.append(inst.k)
    bounds = [(0, 1)] * n + [(0, None)] * (n * J)
    res = linprog(-c, A_ub=np.vstack(rows), b_ub=rhs, bounds=bounds, method="highs")
    return -res.fun


def scipy_lp_par(inst):
    p, v = inst.arrays()
    n, k = inst.n, inst.k
    nv = n * k
    rows, rhs = [], []
    for j in range(k):
        row = np.zeros(nv)
        row[j::k] = 1.0
        rows.append(row)
        rhs.append(inst.T)
        row = np.zeros(nv)
        row[j::k] = p[:, j]
        rows.append(row)
        rhs.append(1.0)
    for i in range(n):
        row = np.zeros(nv)
        row[i * k:(i + 1) * k] = 1.0
        rows.append(row)
        rhs.append(1.0)
    res = linprog(-(v * p).reshape(-1), A_ub=np.vstack(rows), b_ub=rhs,
                  bounds=[(0, 1)] * nv, method="highs")
    return -res.fun


class TestLpSeq:
    def test_uniform_instance_reaches_capacity(self):
        # v=1, p=k/n, T=n: y=1 everywhere is optimal with objective k
        n, k = 20, 4
        inst = SeqInstance(k=k, T=n, n=n, p=(k / n,) * n, v=(1.0,) * n)
        sol = lp.solve_lp_seq(inst)
        assert sol.objective == pytest.approx(k, abs=1e-9)

    def test_all_accept_budget_bound(self):
        inst = SeqInstance(k=2, T=2, n=4, p=(1.0,) * 4, v=(0.5, 0.9, 0.1, 0.7))
        assert lp.solve_lp_seq(inst).objective == pytest.approx(1.6)

    def test_matches_reference_solver(self, rng):
        for _ in range(40):
            inst = random_seq_instance(rng, n_max=8)
            sol = lp.solve_lp_seq(inst)
            assert sol.objective == pytest.approx(scipy_lp_seq(inst), rel=1e-7, abs=1e-9)

    def test_matches_ptk_on_embedding(self, rng):
        for _ in range(20):
            inst = random_seq_instance(rng, n_max=6)
            seq_obj = lp.solve_lp_seq(inst).objective
            ptk_obj = lp.solve_lp_ptk(seq_to_ptk(inst), method="simplex").objective
            assert seq_obj == pytest.approx(ptk_obj, rel=1e-9, abs=1e-9)

    def test_vertex_structure(self, rng):
        for _ in range(40):
            inst = random_seq_instance(rng, n_max=10)
            report = lp.verify_bfs_structure(lp.solve_lp_seq(inst))
            assert report.ok

    def test_large_random_instance_matches_reference(self):
        rng = np.random.default_rng(123)
        n = 500
        inst = SeqInstance(k=12, T=60, n=n,
                           p=tuple(rng.uniform(0.01, 1.0, n)),
                           v=tuple(rng.uniform(0.0, 1.0, n)))
        sol = lp.solve_lp_seq(inst)
        assert sol.objective == pytest.approx(scipy_lp_seq(inst), rel=1e-7)
        assert lp.verify_bfs_structure(sol).ok


class TestLpPtk:
    def test_single_deterministic_candidate(self):
        inst = ProbeTopKInstance(k=1, T=1, n=1,
                                 distributions=(FiniteDistribution.point(5.0),))
        sol = lp.solve_lp_ptk(inst)
        assert sol.objective == pytest.approx(5.0)
        assert sol.y[0] == pytest.approx(1.0)
        assert sol.x[0, list(sol.support).index(5.0)] == pytest.approx(1.0)

    def test_tightness_objective_is_k(self):
        assert lp.solve_lp_ptk(tightness_probetopk(100, 1)).objective == pytest.approx(1.0)

    def test_matches_reference_solver(self, rng):
        for _ in range(25):
            inst = random_ptk_instance(rng)
            sol = lp.solve_lp_ptk(inst)
            assert sol.objective == pytest.approx(scipy_lp_ptk(inst), rel=1e-7, abs=1e-9)

    def test_solution_feasible(self, rng):
        for _ in range(25):
            inst = random_ptk_instance(rng)
            sol = lp.solve_lp_ptk(inst)
            _, q = inst.global_support()
            assert np.all(sol.x <= sol.y[:, None] * q + 1e-9)
            assert sol.y.sum() <= inst.T + 1e-9
            assert sol.x.sum() <= inst.k + 1e-9
            assert lp.verify_bfs_structure(sol).ok

    def test_reduction_equals_generic_on_bernoulli(self, rng):
        for _ in range(20):
            inst = seq_to_ptk(random_seq_instance(rng, n_max=7))
            generic = lp.solve_lp_ptk(inst, method="simplex")
            reduced = lp.solve_lp_ptk(inst, method="reduction")
            assert reduced.objective == pytest.approx(generic.objective, rel=1e-9, abs=1e-9)
            assert lp.verify_bfs_structure(reduced).ok

    def test_reduction_requires_bernoulli(self):
        inst = ProbeTopKInstance(
            k=1, T=1, n=1,
            distributions=(FiniteDistribution.make([0.0, 1.0, 2.0], [0.2, 0.3, 0.5]),))
        with pytest.raises(SolverError):
            lp.solve_lp_ptk(inst, method="reduction")

    def test_large_bernoulli_uses_reduction_automatically(self):
        sol = lp.solve_lp_ptk(tightness_probetopk(1000, 1))
        assert sol.objective == pytest.approx(1.0, abs=1e-9)


class TestLpPar:
    def test_tightness_objective_is_k(self):
        sol = lp.solve_lp_par(tightness_parallel(3, 10))
        assert sol.objective == pytest.approx(3.0, abs=1e-7)

    def test_single_position_equals_seq(self, rng):
        for _ in range(15):
            inst = random_par_instance(rng, n_max=7, k_max=1)
            p, v = inst.arrays()
            seq = SeqInstance(k=1, T=inst.T, n=inst.n,
                              p=tuple(p[:, 0]), v=tuple(v[:, 0]))
            assert lp.solve_lp_par(inst).objective == pytest.approx(
                lp.solve_lp_seq(seq).objective, rel=1e-9, abs=1e-9)

    def test_matches_reference_solver(self, rng):
        for _ in range(20):
            inst = random_par_instance(rng, n_max=7)
            sol = lp.solve_lp_par(inst)
            assert sol.objective == pytest.approx(scipy_lp_par(inst), rel=1e-7, abs=1e-9)

    def test_feasibility_invariants(self, rng):
        for _ in range(20):
            inst = random_par_instance(rng, n_max=7)
            sol = lp.solve_lp_par(inst)
            p, _ = inst.arrays()
            assert np.all(sol.y.sum(axis=0) <= inst.T + 1e-9)
            assert np.all((sol.y * p).sum(axis=0) <= 1.0 + 1e-9)
            assert np.all(sol.y.sum(axis=1) <= 1.0 + 1e-9)

    def test_batching_identity(self, rng):
        # identical positions: LP_par(I) equals LP_seq of the kT-budget twin
        for _ in range(20):
            inst = random_identical_par_instance(rng, n_max=8, k_max=3)
            par_obj = lp.solve_lp_par(inst, method="simplex").objective
            seq_obj = lp.solve_lp_seq(lp.seq_twin(inst)).objective
            assert par_obj == pytest.approx(seq_obj, rel=1e-7, abs=1e-9)

    def test_reduction_equals_generic(self, rng):
        for _ in range(10):
            inst = random_identical_par_instance(rng, n_max=8)
            generic = lp.solve_lp_par(inst, method="simplex").objective
            reduced = lp.solve_lp_par(inst, method="reduction").objective
            assert reduced == pytest.approx(generic, rel=1e-9, abs=1e-9)


class TestLpSim:
    def test_high_value_overload_takes_exactly_v_high(self):
        inst = SimInstance(k=1, n=3, p=(0.8, 0.7, 0.9), v=(2.0, 1.5, 0.5))
        sol = lp.solve_lp_sim(inst, check_generic=True)
        assert tuple(sol.y) == (1.0, 1.0, 0.0)
        assert sol.z == pytest.approx(1 - 1.5)

    def test_counterexample_fill(self):
        sol = lp.solve_lp_sim(counterexample_value_ordered(0.1), check_generic=True)
        assert sol.y[0] == pytest.approx(1.0)
        assert sol.y[1] == pytest.approx(0.9)
        assert sol.z == 0.0

    def test_single_candidate(self):
        sol = lp.solve_lp_sim(SimInstance(k=1, n=1, p=(0.5,), v=(0.8,)))
        assert tuple(sol.y) == (1.0,)
        assert sol.z == 0.0
        assert sol.objective == pytest.approx(0.4)

    def test_matches_generic_on_randoms(self, rng):
        for _ in range(50):
            inst = random_sim_instance(rng, tau=0.1)
            lp.solve_lp_sim(inst, check_generic=True)

    def test_prefix_structure_exact(self, rng):
        for _ in range(50):
            inst = random_sim_instance(rng, tau=0.2)
            sol = lp.solve_lp_sim(inst)
            y_sorted = sol.y[lp.sim_order(inst)]
            support = np.flatnonzero(y_sorted > 0.0)
            if support.size:
                assert support[-1] == support.size - 1  # contiguous prefix
                assert np.all(y_sorted[: support.size - 1] == 1.0)


class TestBfsReport:
    def test_counts(self):
        assert lp.verify_bfs_structure(lp.SeqLpSolution(np.array([0.0, 1.0]), 0.0)).fractional_count == 0
        rep = lp.verify_bfs_structure(lp.SeqLpSolution(np.array([0.4, 0.6, 1.0]), 0.0))
        assert rep.fractional_count == 2 and rep.pair_sum_ok and rep.ok
        bad = lp.verify_bfs_structure(lp.SeqLpSolution(np.array([0.4, 0.3, 1.0]), 0.0))
        assert not bad.pair_sum_ok and not bad.ok


class TestScaling:
    def test_seq_objective_scales_and_support_fixed(self, rng):
        for _ in range(10):
            inst = random_seq_instance(rng, n_max=8)
            lam = float(rng.uniform(0.5, 4.0))
            scaled = SeqInstance(k=inst.k, T=inst.T, n=inst.n, p=inst.p,
                                 v=tuple(lam * x for x in inst.v))
            a = lp.solve_lp_seq(inst)
            b = lp.solve_lp_seq(scaled)
            assert b.objective == pytest.approx(lam * a.objective, rel=1e-9)
            assert np.array_equal(a.y > 1e-9, b.y > 1e-9)

    def test_ptk_par_sim_objectives_scale(self, rng):
        lam = 3.0
        ptk = random_ptk_instance(rng)
        scaled_dists = tuple(
            FiniteDistribution.make([lam * r for r in d.support], d.probs)
            for d in ptk.distributions)
        ptk_scaled = ProbeTopKInstance(k=ptk.k, T=ptk.T, n=ptk.n,
                                       distributions=scaled_dists)
        assert lp.solve_lp_ptk(ptk_scaled).objective == pytest.approx(
            lam * lp.solve_lp_ptk(ptk).objective, rel=1e-9, abs=1e-12)

        par = random_par_instance(rng, n_max=6)
        par_scaled = ParInstance(k=par.k, T=par.T, n=par.n, p=par.p,
                                 v=tuple(tuple(lam * x for x in row) for row in par.v))
        assert lp.solve_lp_par(par_scaled).objective == pytest.approx(
            lam * lp.solve_lp_par(par).objective, rel=1e-9, abs=1e-12)

        # for the simultaneous LP the unit penalty breaks homogeneity, so the
        # property holds only while every scaled value stays below 1
        n = 8
        v = tuple(rng.uniform(0.05, 0.3, n))
        sim = SimInstance(k=2, n=n, p=tuple(rng.uniform(0.1, 1.0, n)), v=v)
        sim_scaled = SimInstance(k=2, n=n, p=sim.p, v=tuple(lam * x for x in v))
        a = lp.solve_lp_sim(sim)
        b = lp.solve_lp_sim(sim_scaled)
        assert a.z == 0.0 and b.z == 0.0
        assert b.objective == pytest.approx(lam * a.objective, rel=1e-9)
