"""Experiment harness: the offering-model sweeps behind the paper-style
figures, random-instance guarantee audits, and CSV emission.

Everything here is exact (no Monte Carlo), so runs are pure functions of the
configuration, including its seed.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import constants, evaluate, lp, policies
from .instances import (FiniteDistribution, ParInstance, ProbeTopKInstance,
                        SeqInstance, SimInstance, sample_candidate_pool)

SEQ_PAR_POLICIES = ("lp_seq", "alg_seq_prime", "adaptive_seq", "vo_seq", "eo_seq",
                    "lp_par", "alg_par_prime")
SIM_POLICIES = ("lp_sim", "vo_sim", "eo_sim", "greedy_sim")


@dataclass(frozen=True)
class ExperimentConfig:
    pools: int = 50
    n: int = 100
    k_list: tuple[int, ...] = (5, 10)
    mode: str = "negative_correlation"
    t_grid: tuple[int, ...] | None = None        # default: k..n
    inv_c_grid: tuple[float, ...] | None = None  # default: 40 points in (0, 2]
    seed: int = 0
    threads: int = 1

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        kwargs = dict(data)
        for key in ("k_list", "t_grid", "inv_c_grid"):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)

    def ts_for(self, k: int) -> tuple[int, ...]:
        return self.t_grid if self.t_grid is not None else tuple(range(k, self.n + 1))

    def inv_cs(self) -> tuple[float, ...]:
        # 40 evenly spaced points covering (0, 2]; the deep-penalty end is
        # anchored at 0.005 so the largest-c column is effectively hard-capacity
        if self.inv_c_grid is not None:
            return self.inv_c_grid
        return tuple(np.linspace(0.005, 2.0, 40))


def _pool_seed(seed: int, pool: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(pool,)).generate_state(1)[0])


def _prefix_values(order, p, v, k: int) -> np.ndarray:
    """vals[t] = exact value of offering to order[:t]; one pass for all t."""
    dist = np.zeros(k + 1)
    dist[0] = 1.0
    vals = np.zeros(len(order) + 1)
    total = 0.0
    for t, i in enumerate(order, start=1):
        open_mass = dist[:k].sum()
        total += v[i] * p[i] * open_mass
        moved = dist[:k] * p[i]
        dist[1: k + 1] += moved
        dist[:k] -= moved
        vals[t] = total
    return vals


def _seq_par_pool(cfg: ExperimentConfig, k: int, pool_idx: int) -> dict[tuple[int, str], float]:
    pairs = sample_candidate_pool(cfg.n, cfg.mode, _pool_seed(cfg.seed, pool_idx))
    v = np.array([vp[0] for vp in pairs])
    p = np.array([vp[1] for vp in pairs])
    n = cfg.n
    out: dict[tuple[int, str], float] = {}

    full = SeqInstance(k=k, T=n, n=n, p=tuple(p), v=tuple(v))
    adaptive = policies.adaptive_seq_dp(full)
    vo_vals = _prefix_values(policies._desc_order(v), p, v, k)
    eo_vals = _prefix_values(policies._desc_order(v * p), p, v, k)

    twin_cache: dict[int, lp.SeqLpSolution] = {}
    for T in cfg.ts_for(k):
        inst = SeqInstance(k=k, T=T, n=n, p=tuple(p), v=tuple(v))
        sol = lp.solve_lp_seq(inst)
        out[(T, "lp_seq")] = sol.objective
        prime = policies.alg_seq_prime(inst, lp_solution=sol)
        out[(T, "alg_seq_prime")] = evaluate.eval_committed_order_exact(inst, prime).mean
        out[(T, "adaptive_seq")] = float(adaptive.value_by_budget[T])
        out[(T, "vo_seq")] = float(vo_vals[T])
        out[(T, "eo_seq")] = float(eo_vals[T])

        par_inst = ParInstance(k=k, T=T, n=n,
                               p=tuple((float(pi),) * k for pi in p),
                               v=tuple((float(vi),) * k for vi in v))
        budget = lp.batching_budget(par_inst)
        if budget not in twin_cache:
            twin_cache[budget] = lp.solve_lp_seq(lp.seq_twin(par_inst))
        twin_sol = twin_cache[budget]
        out[(T, "lp_par")] = twin_sol.objective  # equals LP_par for identical positions
        lists = policies.alg_par_prime(par_inst, lp_solution=twin_sol)
        out[(T, "alg_par_prime")] = evaluate.eval_par_exact(par_inst, lists).mean
    return out


def _sim_pool(cfg: ExperimentConfig, k: int, pool_idx: int) -> dict[tuple[float, str], float]:
    pairs = sample_candidate_pool(cfg.n, cfg.mode, _pool_seed(cfg.seed, pool_idx))
    v = [vp[0] for vp in pairs]
    p = [vp[1] for vp in pairs]
    out: dict[tuple[float, str], float] = {}
    for inv_c in cfg.inv_cs():
        c = 1.0 / inv_c
        inst = SimInstance.from_raw(k=k, p=p, v=v, cost=c)
        # report in original (unscaled) units so sweeps are comparable
        out[(inv_c, "lp_sim")] = c * lp.solve_lp_sim(inst).objective
        out[(inv_c, "vo_sim")] = c * policies.value_ordered_sim(inst)[1]
        out[(inv_c, "eo_sim")] = c * policies.ev_ordered_sim(inst)[1]
        out[(inv_c, "greedy_sim")] = c * policies.greedy_sim(inst)[1]
    return out


def _average(pool_maps, keys, names) -> list[dict]:
    rows = []
    for key in keys:
        for name in names:
            mean = float(np.mean([m[(key, name)] for m in pool_maps]))
            rows.append({"grid": key, "policy": name, "mean": mean, "half_width": 0.0})
    return rows


def run_offering_experiment(cfg: ExperimentConfig) -> dict:
    """Average all policies over the candidate pools; exact values only.

    Returns {"seq_par": {k: rows}, "sim": {k: rows}} with one row per
    (grid point, policy).
    """
    result: dict = {"seq_par": {}, "sim": {}}
    for k in cfg.k_list:
        if k > cfg.n:
            raise ValueError("k exceeds the pool size")
        with ThreadPoolExecutor(max_workers=max(cfg.threads, 1)) as pool:
            sp_maps = list(pool.map(lambda i: _seq_par_pool(cfg, k, i), range(cfg.pools)))
            sim_maps = list(pool.map(lambda i: _sim_pool(cfg, k, i), range(cfg.pools)))
        result["seq_par"][k] = _average(sp_maps, cfg.ts_for(k), SEQ_PAR_POLICIES)
        result["sim"][k] = _average(sim_maps, cfg.inv_cs(), SIM_POLICIES)
    return result


def emit_figures(cfg: ExperimentConfig, out_dir, data: dict | None = None) -> list[Path]:
    """Write seq_par_k{K}.csv and sim_k{K}.csv figure data."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if data is None:
        data = run_offering_experiment(cfg)
    paths = []
    for k in cfg.k_list:
        path = out_dir / f"seq_par_k{k}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["T", "policy", "mean", "half_width"])
            for row in data["seq_par"][k]:
                writer.writerow([row["grid"], row["policy"],
                                 f"{row['mean']:.6g}", f"{row['half_width']:.6g}"])
        paths.append(path)
        path = out_dir / f"sim_k{k}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["inv_c", "policy", "mean", "half_width"])
            for row in data["sim"][k]:
                writer.writerow([f"{row['grid']:.6g}", row["policy"],
                                 f"{row['mean']:.6g}", f"{row['half_width']:.6g}"])
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# Random instance families (audit- and oracle-sized)


def random_ptk_instance(rng: np.random.Generator, n_max: int = 6, j_max: int = 3,
                        k_max: int = 2) -> ProbeTopKInstance:
    n = int(rng.integers(2, n_max + 1))
    support = np.sort(rng.uniform(0.0, 1.0, size=j_max))
    dists = []
    for _ in range(n):
        probs = rng.dirichlet(np.ones(j_max))
        dists.append(FiniteDistribution.make(support, probs))
    k = int(rng.integers(1, min(k_max, n) + 1))
    T = int(rng.integers(k, n + 1))
    return ProbeTopKInstance(k=k, T=T, n=n, distributions=tuple(dists))


def random_seq_instance(rng: np.random.Generator, n_max: int = 8,
                        k_max: int = 3) -> SeqInstance:
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(1, min(k_max, n) + 1))
    T = int(rng.integers(k, n + 1))
    return SeqInstance(k=k, T=T, n=n,
                       p=tuple(rng.uniform(0.05, 1.0, size=n)),
                       v=tuple(rng.uniform(0.0, 1.0, size=n)))


def random_par_instance(rng: np.random.Generator, n_max: int = 10,
                        k_max: int = 3) -> ParInstance:
    n = int(rng.integers(3, n_max + 1))
    k = int(rng.integers(1, min(k_max, n) + 1))
    T = int(rng.integers(k, n + 1))
    p = rng.uniform(0.05, 1.0, size=(n, k))
    v = rng.uniform(0.0, 1.0, size=(n, k))
    return ParInstance(k=k, T=T, n=n,
                       p=tuple(tuple(row) for row in p),
                       v=tuple(tuple(row) for row in v))


def random_identical_par_instance(rng: np.random.Generator, n_max: int = 10,
                                  k_max: int = 3) -> ParInstance:
    n = int(rng.integers(3, n_max + 1))
    k = int(rng.integers(1, min(k_max, n) + 1))
    T = int(rng.integers(k, n + 1))
    p = rng.uniform(0.05, 1.0, size=n)
    v = rng.uniform(0.0, 1.0, size=n)
    return ParInstance(k=k, T=T, n=n,
                       p=tuple((float(pi),) * k for pi in p),
                       v=tuple((float(vi),) * k for vi in v))


def random_sim_instance(rng: np.random.Generator, tau: float, n_max: int = 12,
                        k_max: int = 3) -> SimInstance:
    n = int(rng.integers(2, n_max + 1))
    k = int(rng.integers(1, min(k_max, n) + 1))
    return SimInstance(k=k, n=n,
                       p=tuple(rng.uniform(0.05, 1.0, size=n)),
                       v=tuple(rng.uniform(tau, 1.4, size=n)))


# ---------------------------------------------------------------------------
# Guarantee audits


@dataclass(frozen=True)
class AuditRow:
    family: str
    index: int
    lp: float
    alg: float
    ratio: float
    bound: float
    passed: bool


@dataclass(frozen=True)
class AuditReport:
    rows: list[AuditRow] = field(default_factory=list)
    tolerance: float = 1e-9

    @property
    def failures(self) -> int:
        return sum(not r.passed for r in self.rows)

    def worst(self) -> dict[str, float]:
        """Smallest ratio-minus-bound slack per family."""
        slack: dict[str, float] = {}
        for r in self.rows:
            gap = r.ratio - r.bound
            slack[r.family] = min(slack.get(r.family, math.inf), gap)
        return slack


def _expected_committed(instance, outcome_policies) -> float:
    return sum(prob * evaluate.eval_committed_order_exact(instance, pol).mean
               for prob, pol in outcome_policies)


def run_guarantee_audit(count: int = 500, seed: int = 0, tau: float = 0.5,
                        tolerance: float = 1e-9) -> AuditReport:
    """Check every model's guarantee on ``count`` random instances per family.

    The policy side is always an exact expectation (over the at-most-two
    rounding outcomes, or the full rounding tree for parallel lists).
    """
    rows: list[AuditRow] = []

    def record(family, idx, lp_val, alg_val, bound):
        ratio = alg_val / lp_val if lp_val > 0 else 1.0
        passed = alg_val >= bound * lp_val - tolerance
        rows.append(AuditRow(family, idx, lp_val, alg_val, ratio, bound, passed))

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    for idx in range(count):
        inst = random_ptk_instance(rng)
        sol = lp.solve_lp_ptk(inst)
        alg = _expected_committed(inst, policies.alg_ptk_outcomes(inst, lp_solution=sol))
        record("ptk", idx, sol.objective, alg, constants.guarantee_ptk(inst.k))

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(2,)))
    for idx in range(count):
        inst = random_seq_instance(rng)
        sol = lp.solve_lp_seq(inst)
        alg = _expected_committed(inst, policies.alg_seq_outcomes(inst, lp_solution=sol))
        record("seq", idx, sol.objective, alg, constants.guarantee_ptk(inst.k))

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(3,)))
    for idx in range(count):
        inst = random_par_instance(rng)
        sol = lp.solve_lp_par(inst)
        alg = policies.alg_par_expectation(inst, lp_solution=sol)
        record("par", idx, sol.objective, alg, 1.0 - 1.0 / math.e)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(4,)))
    for idx in range(count):
        inst = random_sim_instance(rng, tau)
        sol = lp.solve_lp_sim(inst)
        offers, _ = policies.alg_sim_auto(inst, tau)
        alg = evaluate.eval_sim_exact(inst, offers).mean
        record("sim", idx, sol.objective, alg, constants.alpha(inst.k, tau)[0])

    return AuditReport(rows=rows, tolerance=tolerance)


def write_audit_csv(report: AuditReport, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["family", "index", "lp", "alg", "ratio", "bound", "pass"])
        for r in report.rows:
            writer.writerow([r.family, r.index, f"{r.lp:.6g}", f"{r.alg:.6g}",
                             f"{r.ratio:.6g}", f"{r.bound:.6g}", int(r.passed)])
