"""Command-line front end.

Exit codes: 0 ok, 2 parse or validation error, 3 infeasible or impossible,
4 cap exceeded, 5 non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from . import classifier as clf
from . import parametric as par
from .cir import CirResult
from .cohgraph import CollectionSpec, a1plus_partition_check, build_graph, classify, compatible_order
from .config import RunConfig
from .errors import InvalidEvidence, IpcirError
from .incompleteness import CarFeasible, MultiValuedMap, car_admissibility
from .networks import (
    DiscreteNet,
    EvidenceSpec,
    asia_walkthrough,
    evidence_to_observation,
    joint_enumerate,
    query_cir,
)
from .previsions import Gamble


class _Exit(Exception):
    def __init__(self, code):
        self.code = code


def _fmt_table(obj, prefix="") -> list:
    lines = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            lines += _fmt_table(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        for i, x in enumerate(obj):
            lines += _fmt_table(x, f"{prefix}{i}.")
    else:
        if isinstance(obj, float):
            val = f"{obj:.6f}"
        elif isinstance(obj, list):
            val = " ".join(f"{x:.6f}" if isinstance(x, float) else str(x) for x in obj)
        else:
            val = str(obj)
        lines.append(f"{prefix.rstrip('.')}\t{val}")
    return lines


def emit(report: dict, cfg: RunConfig, out=None) -> None:
    out = out or sys.stdout
    report = dict(report)
    report.setdefault("seed", cfg.seed)
    if cfg.output_format == "table":
        out.write("\n".join(_fmt_table(report)) + "\n")
    else:
        out.write(json.dumps(report, sort_keys=True) + "\n")


def _cir_dict(res: CirResult, space, unknown_vars) -> dict:
    cols = [space.variables[space.names.index(v)] for v in unknown_vars]
    rows = []
    for r in res.per_completion:
        rows.append({"completion": [v.states[i] for v, i in zip(cols, r.completion)],
                     "supported": r.supported, "lower": r.lower, "upper": r.upper})
    return {"lower": res.lower, "upper": res.upper, "per_completion": rows}


def cmd_update(args, cfg):
    net = DiscreteNet.load(args.model)
    ev = EvidenceSpec.load(args.evidence)
    obs = evidence_to_observation(net, ev, args.target)
    K = joint_enumerate(net, cfg)
    if args.gamble:
        try:
            data = json.loads(open(args.gamble).read())
            var = net.space.variables[net.space.names.index(args.target)]
            vals = [float(data["values"][s]) for s in var.states]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InvalidEvidence(f"cannot read gamble: {exc}") from exc
        g = Gamble(net.space, net.space.indices([args.target]), vals)
        res = query_cir(net, args.target, ev, g, cfg, joint=K)
        return {"target": args.target, "gamble": _cir_dict(res, net.space, obs.unknown_vars)}
    res = query_cir(net, args.target, ev, None, cfg, joint=K)
    return {"target": args.target,
            "states": {s: _cir_dict(r, net.space, obs.unknown_vars) for s, r in res.items()}}


def cmd_asia(args, cfg):
    return {"scenario": args.scenario, "steps": asia_walkthrough(args.scenario, cfg)}


def cmd_car_check(args, cfg):
    m = MultiValuedMap.load(args.map)
    m.require_valid()
    res = car_admissibility(m, cfg.eps_pos)
    if isinstance(res, CarFeasible):
        alpha = res.coefficients.alpha
        return {"feasible": True, "t_star": res.t_star, "alpha": alpha,
                "max_residual": float(abs(res.coefficients.residuals(m)).max())}
    emit({"feasible": False, "status": res.status, "explanation": res.explanation}, cfg)
    raise _Exit(3)


def cmd_beta(args, cfg):
    if args.t is not None:
        return {"mean": par.beta_posterior_mean(args.s, args.t, args.n1, args.n)}
    lo, hi = par.imprecise_beta_interval(args.s, args.n1, args.n)
    return {"interval": [lo, hi]}


def cmd_infer(args, cfg):
    sample = par.PairedSample.read_csv(args.sample)
    if args.mar:
        return {"mar_estimate": par.mar_baseline(sample, args.s, config=cfg)}
    prior = par.BetaPrior(args.s, None if args.imprecise else 0.5)
    return par.cir_parametric(sample, args.s, prior, cfg).to_dict()


def _cell(x):
    return str(x)


def cmd_classify(args, cfg):
    train = clf.LabeledSample.read_csv(args.train)
    tests = clf.read_instances(args.test, train)
    lines = []
    model = clf.nb_train(train, args.s) if args.method == "nb" else None
    for inst, truth in tests:
        row = {"instance": [_cell(x) for x in inst], "truth": truth, "seed": cfg.seed}
        if args.method == "nb":
            c, post = clf.nb_predict(model, inst)
            row.update(prediction=c, posterior=post)
        else:
            res = clf.ncc2_predict(train, inst, args.s, cfg)
            row.update(res.to_dict())
        lines.append(row)
    if cfg.output_format == "table":
        for r in lines:
            emit(r, cfg)
    else:
        sys.stdout.write(clf.report_lines(lines) + "\n")
    return None


def cmd_xor(args, cfg):
    sc = clf.IpDriftScenario(seed=cfg.seed, n_train=args.train, n_test=args.test)
    return clf.xor_demo(sc, cfg)


def cmd_cohgraph(args, cfg):
    spec = CollectionSpec.load(args.collection)
    kind = classify(build_graph(spec))
    out = {"class": kind.value, "partition": a1plus_partition_check(spec)}
    if kind.value != "other":
        out["order"] = compatible_order(spec)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ipcir", description="Conservative updating under incomplete observations")
    p.add_argument("--config", help="JSON file overriding run settings")
    p.add_argument("--format", choices=("json", "table"), help="output format")
    p.add_argument("--seed", type=int, help="random seed")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("update", help="query a network under tagged evidence")
    s.add_argument("--model", required=True)
    s.add_argument("--evidence", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--gamble")
    s.set_defaults(func=cmd_update)

    s = sub.add_parser("asia", help="scripted walkthrough on the bundled Asia network")
    s.add_argument("--scenario", type=int, choices=(1, 2, 3, 4), required=True)
    s.set_defaults(func=cmd_asia)

    s = sub.add_parser("car-check", help="decide CAR admissibility of a multi-valued map")
    s.add_argument("--map", required=True)
    s.set_defaults(func=cmd_car_check)

    s = sub.add_parser("beta", help="Beta posterior mean or imprecise-Beta interval")
    s.add_argument("--s", type=float, required=True)
    s.add_argument("--n1", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=float)
    s.set_defaults(func=cmd_beta)

    s = sub.add_parser("infer", help="interval estimate from an incomplete paired sample")
    s.add_argument("--sample", required=True)
    s.add_argument("--s", type=float, default=1.0)
    s.add_argument("--mar", action="store_true")
    s.add_argument("--imprecise", action="store_true", help="sweep the prior expectations too")
    s.set_defaults(func=cmd_infer)

    s = sub.add_parser("classify", help="naive Bayes or naive credal classification")
    s.add_argument("--train", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--method", choices=("nb", "ncc2"), default="nb")
    s.add_argument("--s", type=float, default=1.0)
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("xor-demo", help="accuracy drift when the missingness process changes")
    s.add_argument("--seed", type=int, dest="sub_seed")
    s.add_argument("--train", type=int, default=1000)
    s.add_argument("--test", type=int, default=1000)
    s.set_defaults(func=cmd_xor)

    s = sub.add_parser("cohgraph", help="classify a collection's coherence graph")
    s.add_argument("--collection", required=True)
    s.set_defaults(func=cmd_cohgraph)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.load(args.config)
        if args.format:
            cfg = replace(cfg, output_format=args.format)
        for name in ("seed", "sub_seed"):
            if getattr(args, name, None) is not None:
                cfg = replace(cfg, seed=getattr(args, name))
        report = args.func(args, cfg)
        if report is not None:
            emit(report, cfg)
        return 0
    except _Exit as exc:
        return exc.code
    except IpcirError as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
