"""Command-line front-end.

Subcommands: solve-lp, policy, evaluate, oracle, round, constants,
bench figures, bench audit. Exit status is nonzero on audit failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import constants, evaluate, harness, lp, oracles, policies, rounding
from .instances import ParInstance, ProbeTopKInstance, SeqInstance, SimInstance, load_instance


_MODEL_TYPES = {"ptk": ProbeTopKInstance, "seq": SeqInstance,
                "par": ParInstance, "sim": SimInstance}


def _load_for_model(path: str, model: str):
    inst = load_instance(path)
    expected = _MODEL_TYPES[model]
    if not isinstance(inst, expected):
        raise SystemExit(f"{path} holds a {type(inst).__name__}, "
                         f"but --model {model} expects {expected.__name__}")
    return inst


def _emit(data, out: str | None) -> None:
    text = json.dumps(data, indent=1, default=float)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def policy_to_dict(policy) -> dict:
    if isinstance(policy, policies.CommittedOrderPolicy):
        return {"type": "committed_order", "order": list(policy.order),
                "accept_prob": {f"{i},{j}": a for (i, j), a in sorted(policy.accept_prob.items())},
                "k": policy.k, "T": policy.T}
    if isinstance(policy, policies.OfferLists):
        return {"type": "offer_lists", "lists": [list(l) for l in policy.lists],
                "k": policy.k, "T": policy.T}
    if isinstance(policy, policies.OfferProbabilities):
        return {"type": "offer_probabilities", "y_prime": list(policy.y_prime),
                "mass": policy.mass}
    if isinstance(policy, tuple):
        return {"type": "subset", "members": list(policy)}
    raise TypeError(f"cannot serialize policy {type(policy)!r}")


def policy_from_dict(data: dict):
    kind = data["type"]
    if kind == "committed_order":
        accept = {tuple(int(t) for t in key.split(",")): float(a)
                  for key, a in data["accept_prob"].items()}
        return policies.CommittedOrderPolicy(order=tuple(data["order"]),
                                             accept_prob=accept,
                                             k=data["k"], T=data["T"])
    if kind == "offer_lists":
        return policies.OfferLists(lists=tuple(tuple(l) for l in data["lists"]),
                                   k=data["k"], T=data["T"])
    if kind == "offer_probabilities":
        return policies.OfferProbabilities(y_prime=tuple(data["y_prime"]),
                                           mass=data["mass"])
    if kind == "subset":
        return tuple(data["members"])
    raise ValueError(f"unknown policy type {kind!r}")


def _solution_to_dict(sol) -> dict:
    out = {"objective": sol.objective, "y": np.asarray(sol.y).tolist()}
    if hasattr(sol, "x"):
        out["x"] = np.asarray(sol.x).tolist()
    if hasattr(sol, "z"):
        out["z"] = sol.z
    y = np.asarray(sol.y).reshape(-1)
    frac = np.flatnonzero((y > lp.FRAC_TOL) & (y < 1 - lp.FRAC_TOL))
    out["structure"] = {"fractional_indices": frac.tolist()}
    return out


def _cmd_solve_lp(args) -> int:
    inst = _load_for_model(args.instance, args.model)
    if args.model == "ptk":
        sol = lp.solve_lp_ptk(inst)
        if args.check_generic:
            ref = lp.solve_lp_ptk(inst, method="simplex")
            assert abs(ref.objective - sol.objective) <= 1e-7 * max(1, abs(ref.objective))
    elif args.model == "seq":
        sol = lp.solve_lp_seq(inst)
        if args.check_generic:
            from .instances import seq_to_ptk

            ref = lp.solve_lp_ptk(seq_to_ptk(inst), method="simplex")
            assert abs(ref.objective - sol.objective) <= 1e-7 * max(1, abs(ref.objective))
    elif args.model == "par":
        sol = lp.solve_lp_par(inst)
        if args.check_generic:
            ref = lp.solve_lp_par(inst, method="simplex")
            assert abs(ref.objective - sol.objective) <= 1e-7 * max(1, abs(ref.objective))
    else:
        sol = lp.solve_lp_sim(inst, check_generic=args.check_generic)
    _emit(_solution_to_dict(sol), args.out)
    return 0


def _build_policy(args, inst):
    rng = np.random.default_rng(args.seed)
    algo, model = args.algo, args.model
    if model == "ptk":
        if algo != "alg":
            raise SystemExit(f"model ptk supports only --algo alg, not {algo}")
        return policies.alg_ptk(inst, mode=args.mode, rng=rng)
    if model == "seq":
        builders = {
            "alg": lambda: policies.alg_seq(inst, mode=args.mode, rng=rng),
            "prime": lambda: policies.alg_seq_prime(inst),
            "adaptive": lambda: policies.adaptive_seq_dp(inst),
            "vo": lambda: policies.value_ordered_seq(inst),
            "eo": lambda: policies.ev_ordered_seq(inst),
        }
    elif model == "par":
        builders = {
            "alg": lambda: policies.alg_par(
                inst, mode="randomized" if args.mode == "randomized" else "derandomized_sampled",
                rng=rng),
            "prime": lambda: policies.alg_par_prime(inst),
        }
    else:
        def _sim_alg():
            if args.auto_s:
                return policies.alg_sim_auto(inst, args.tau)[0]
            if args.s is None:
                raise SystemExit("sim alg needs --s or --auto-s with --tau")
            return policies.alg_sim(inst, args.s)

        builders = {
            "alg": _sim_alg,
            "vo": lambda: policies.value_ordered_sim(inst),
            "eo": lambda: policies.ev_ordered_sim(inst),
            "greedy": lambda: policies.greedy_sim(inst),
        }
    if algo not in builders:
        raise SystemExit(f"model {model} does not support --algo {algo}")
    return builders[algo]()


def _policy_value(inst, model: str, policy) -> float:
    if model in ("ptk", "seq"):
        return evaluate.eval_committed_order_exact(inst, policy).mean
    if model == "par":
        return evaluate.eval_par_exact(inst, policy).mean
    return evaluate.eval_sim_exact(inst, policy).mean


def _cmd_policy(args) -> int:
    inst = _load_for_model(args.instance, args.model)
    built = _build_policy(args, inst)
    if args.model == "seq" and args.algo == "adaptive":
        _emit({"type": "adaptive_table", "value": built.value,
               "order": list(built.order)}, args.out)
        return 0
    if args.model == "sim" and args.algo in ("vo", "eo"):
        m, value = built
        order = lp.sim_order(inst) if args.algo == "vo" else \
            policies._desc_order(np.asarray(inst.v) * np.asarray(inst.p))
        subset = tuple(int(i) for i in order[:m])
        _emit({**policy_to_dict(subset), "value": value}, args.out)
        return 0
    if args.model == "sim" and args.algo == "greedy":
        subset, value = built
        _emit({**policy_to_dict(subset), "value": value}, args.out)
        return 0
    _emit({**policy_to_dict(built), "value": _policy_value(inst, args.model, built)},
          args.out)
    return 0


def _cmd_evaluate(args) -> int:
    inst = _load_for_model(args.instance, args.model)
    policy = policy_from_dict(json.loads(Path(args.policy).read_text()))
    if args.mc is not None:
        sims = {"ptk": evaluate.simulate_ptk, "seq": evaluate.simulate_ptk,
                "par": evaluate.simulate_par, "sim": evaluate.simulate_sim}
        res = sims[args.model](inst, policy, args.mc, args.seed)
    else:
        if args.model in ("ptk", "seq"):
            res = evaluate.eval_committed_order_exact(inst, policy)
        elif args.model == "par":
            res = evaluate.eval_par_exact(inst, policy)
        else:
            res = evaluate.eval_sim_exact(inst, policy)
    _emit({"mean": res.mean, "half_width": res.half_width,
           "replications": res.replications, "seed": res.seed}, args.out)
    return 0


def _cmd_oracle(args) -> int:
    inst = _load_for_model(args.instance, args.model)
    if args.model == "ptk":
        value = oracles.opt_ptk_bruteforce(inst)
    elif args.model == "seq":
        value = oracles.opt_seq_bruteforce(inst)
    elif args.model == "par":
        value = oracles.opt_par_nonadaptive_bruteforce(inst)
    else:
        value, subset = oracles.opt_sim_bruteforce(inst)
        _emit({"value": value, "subset": list(subset)}, args.out)
        return 0
    _emit({"value": value}, args.out)
    return 0


def _cmd_round(args) -> int:
    weights = np.asarray(json.loads(Path(args.weights).read_text()), dtype=float)
    rng = np.random.default_rng(args.seed)
    if args.scheme == "dr":
        total = np.zeros(weights.shape)
        for _ in range(args.samples):
            total += rounding.simple_dr(weights, rng)
        marginals = total / args.samples
    else:
        bits = rounding.gkps_sample_batch(weights, args.samples, rng)
        marginals = bits.mean(axis=0)
        if weights.ndim == 1:
            marginals = marginals[:, 0]
    _emit({"samples": args.samples, "marginals": marginals.tolist(),
           "weights": weights.tolist()}, args.out)
    return 0


def _cmd_constants(args) -> int:
    ks = [int(t) for t in args.k_list.split(",")]
    step = args.tau_grid
    taus = np.arange(step, 1.0, step)
    out_path = Path(args.out if args.out else "alpha_beta.csv")
    with open(out_path, "w") as fh:
        fh.write("k,tau,alpha,beta,s_alpha,s_beta,threshold\n")
        for k in ks:
            thr = constants.tightness_threshold(k)
            for tau in taus:
                gc = constants.compute_constants(k, float(tau))
                fh.write(f"{k},{tau:.6g},{gc.alpha:.6g},{gc.beta:.6g},"
                         f"{gc.s_alpha:.6g},{gc.s_beta:.6g},{thr:.6g}\n")
    print(f"wrote {out_path}")
    return 0


def _experiment_config(args) -> harness.ExperimentConfig:
    if args.config:
        cfg = harness.ExperimentConfig.from_dict(json.loads(Path(args.config).read_text()))
    else:
        cfg = harness.ExperimentConfig()
    if args.seed is not None:
        cfg = harness.ExperimentConfig.from_dict({**cfg.__dict__, "seed": args.seed})
    if args.threads is not None:
        cfg = harness.ExperimentConfig.from_dict({**cfg.__dict__, "threads": args.threads})
    return cfg


def _cmd_bench(args) -> int:
    if args.bench_cmd == "figures":
        cfg = _experiment_config(args)
        paths = harness.emit_figures(cfg, args.out or "figures")
        for p in paths:
            print(f"wrote {p}")
        return 0
    report = harness.run_guarantee_audit(count=args.count, seed=args.seed or 0,
                                         tau=args.tau)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        harness.write_audit_csv(report, out_dir / "audit.csv")
    for family, slack in sorted(report.worst().items()):
        print(f"{family}: worst ratio-minus-bound slack {slack:.3e}")
    print(f"{len(report.rows)} checks, {report.failures} failures")
    return 1 if report.failures else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--out", default=None, help="output file or directory")

    parser = argparse.ArgumentParser(prog="hirelp",
                                     description="LP-based hiring-pipeline policies")
    sub = parser.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("solve-lp", parents=[common])
    sp.add_argument("--model", choices=["ptk", "seq", "par", "sim"], required=True)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--check-generic", action="store_true")
    sp.set_defaults(func=_cmd_solve_lp)

    sp = sub.add_parser("policy", parents=[common])
    sp.add_argument("--model", choices=["ptk", "seq", "par", "sim"], required=True)
    sp.add_argument("--algo", choices=["alg", "prime", "adaptive", "vo", "eo", "greedy"],
                    required=True)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--mode", choices=["randomized", "derandomized"], default="derandomized")
    sp.add_argument("--s", type=float, default=None)
    sp.add_argument("--auto-s", action="store_true")
    sp.add_argument("--tau", type=float, default=0.5)
    sp.set_defaults(func=_cmd_policy)

    sp = sub.add_parser("evaluate", parents=[common])
    sp.add_argument("--model", choices=["ptk", "seq", "par", "sim"], required=True)
    sp.add_argument("--instance", required=True)
    sp.add_argument("--policy", required=True, help="policy JSON emitted by `policy`")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--exact", action="store_true", default=True)
    group.add_argument("--mc", type=int, default=None, metavar="REPS")
    sp.set_defaults(func=_cmd_evaluate)

    sp = sub.add_parser("oracle", parents=[common])
    sp.add_argument("--model", choices=["ptk", "seq", "par", "sim"], required=True)
    sp.add_argument("--instance", required=True)
    sp.set_defaults(func=_cmd_oracle)

    sp = sub.add_parser("round", parents=[common])
    sp.add_argument("--scheme", choices=["dr", "gkps"], required=True)
    sp.add_argument("--weights", required=True, help="JSON vector or matrix file")
    sp.add_argument("--samples", type=int, default=10000)
    sp.set_defaults(func=_cmd_round)

    sp = sub.add_parser("constants", parents=[common])
    sp.add_argument("--k-list", default="1,5,10,20")
    sp.add_argument("--tau-grid", type=float, default=0.01, help="tau step size")
    sp.set_defaults(func=_cmd_constants)

    sp = sub.add_parser("bench", parents=[common])
    bench_sub = sp.add_subparsers(dest="bench_cmd", required=True)
    fig = bench_sub.add_parser("figures", parents=[common])
    fig.add_argument("--config", default=None, help="JSON experiment config")
    fig.set_defaults(func=_cmd_bench, bench_cmd="figures")
    aud = bench_sub.add_parser("audit", parents=[common])
    aud.add_argument("--count", type=int, default=500)
    aud.add_argument("--tau", type=float, default=0.5)
    aud.set_defaults(func=_cmd_bench, bench_cmd="audit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None:
        args.seed = 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
