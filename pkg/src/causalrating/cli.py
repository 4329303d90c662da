"""Batch command-line front end.

Loads graphs, discrete SCMs and road-risk scenarios from JSON files,
runs d-separation, identification, verdicts, simulation and the full
evaluation report, and emits JSON (CSV for bulk samples).

Exit codes: 0 success, 2 input or usage error, 3 identification
failure.  The default sampling seed is 42 and can be overridden with
the ``CAUSALRATING_SEED`` environment variable; 0 is a valid seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import CausalRatingError, IdentificationError, CriterionNotMet
from .graph import (
    TEMPLATE_IDS,
    Dag,
    _drop_out_edges,
    d_separated,
    dag_from_json,
    dag_to_json,
    mutilate,
    open_trail,
    satisfies_backdoor,
    satisfies_frontdoor,
    template,
)
from .identify import backdoor_adjust, frontdoor_adjust, noise_verdict, rating_comparison
from .road_risk import (
    RoadRiskScenario,
    build_scenario,
    chain_factorization_residual,
    ground_truth_effect,
    markov_consistency,
    naive_effect,
    observational_joint,
    phyd_effect,
    scenario_from_json,
    simulate_journeys,
)
from .identify import EffectQuery, confounding_gap
from .info import mutual_information
from .scm import (
    DiscreteScm,
    dataset_to_csv,
    do_distribution,
    empirical_joint,
    exact_joint,
    marginal,
    scm_from_json,
)

REPORT_SCHEMA_VERSION = 1
SEED_ENV_VAR = "CAUSALRATING_SEED"
DEFAULT_SEED = 42


class _UsageError(Exception):
    pass


def _emit(doc, out_path=None):
    text = json.dumps(doc, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise _UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise _UsageError(f"{path} is not valid JSON: {exc}")


def _load_graph(ref: str) -> Dag:
    """A graph argument is a JSON file path or a built-in template id."""
    if os.path.exists(ref):
        return dag_from_json(_load_json(ref))
    return template(ref)


def _load_model(path: str):
    """Sniff a model file: road-risk scenario or serialized SCM.

    Returns (scm, dag, scenario_or_none).  Scenario documents carry a
    ``schema_version`` field; SCM documents carry ``cpt``.
    """
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise _UsageError(f"{path}: expected a JSON object")
    if "schema_version" in doc:
        s = scenario_from_json(doc)
        return build_scenario(s), None, s
    if "cpt" in doc:
        scm = scm_from_json(doc)
        return scm, scm.dag, None
    raise _UsageError(f"{path}: neither a scenario nor an SCM document")


def _parse_do(items):
    """``--do NAME`` sweeps the variable; ``--do NAME=V`` pins it."""
    pinned, swept = {}, []
    for item in items or []:
        if "=" in item:
            name, _, val = item.partition("=")
            try:
                pinned[name] = int(val)
            except ValueError:
                raise _UsageError(f"--do {item}: value must be an integer")
        else:
            swept.append(item)
    return pinned, swept


# -- commands --------------------------------------------------------------


def cmd_templates(args) -> int:
    if args.name is None:
        _emit({"templates": sorted(TEMPLATE_IDS)}, args.out)
        return 0
    dag = template(args.name, args.depth)
    _emit(dag_to_json(dag), args.out)
    return 0


def cmd_dsep(args) -> int:
    dag = _load_graph(args.graph)
    x, y, z = set(args.x), set(args.y), set(args.z or [])
    separated = d_separated(dag, x, y, z)
    doc = {"separated": separated}
    if not separated:
        doc["witness"] = list(open_trail(dag, x, y, z))
    _emit(doc, args.out)
    return 0


def _rule2_movable(dag: Dag, x: str, y: str, w: str) -> bool:
    """May do(w) be replaced by observing w in P(y | do(x), do(w))?

    True iff y and w are d-separated by x after cutting x's incoming
    and w's outgoing edges.
    """
    g = _drop_out_edges(mutilate(dag, {x}), {w})
    return d_separated(g, {y}, {w}, {x})


def _identify_cells(scm, dag, scenario, args):
    """Resolve the identification request into (method, cells)."""
    outcome = args.outcome
    pinned, swept = _parse_do(args.do)
    do_vars = [v for v in dag.topological_order if v in pinned or v in swept]
    if not do_vars:
        raise _UsageError("--do is required")
    if outcome in do_vars:
        raise _UsageError("outcome may not be intervened on")
    given = list(args.given or [])
    mediators = set(args.mediators or [])
    adjust = set(args.adjust or [])
    latent = set(dag.latent)
    method = args.method

    def sweep_configs(vars_):
        pins = [(pinned[v],) if v in pinned else tuple(range(scm.card[v])) for v in vars_]
        return [
            tuple(pins[i][c] for i, c in enumerate(cfg))
            for cfg in np.ndindex(*(len(p) for p in pins))
        ]

    if method == "oracle":
        cells = []
        for cfg in sweep_configs(do_vars):
            cut_do = dict(zip(do_vars, cfg))
            if given:
                for g_cfg in np.ndindex(*(scm.card[v] for v in given)):
                    g = dict(zip(given, (int(c) for c in g_cfg)))
                    try:
                        dist = do_distribution(scm, outcome, cut_do, given=g)
                    except CausalRatingError:
                        continue
                    cells.append((cfg, tuple(g_cfg), dist))
            else:
                cells.append((cfg, (), do_distribution(scm, outcome, cut_do)))
        return "oracle", do_vars, given, cells

    joint = marginal(exact_joint(scm), set(dag.nodes) - latent)

    if method in ("auto", "frontdoor") and (mediators or scenario is not None):
        if scenario is not None and not mediators:
            mediators = set(scenario.states)
        # Pick the treatment among the do-variables: the one whose
        # front-door criterion holds; remaining do-variables must be
        # convertible to observations.
        for x in do_vars:
            extra = [w for w in do_vars if w != x]
            if not satisfies_frontdoor(dag, x, outcome, mediators):
                continue
            if all(_rule2_movable(dag, x, outcome, w) for w in extra):
                strat = extra + given
                raw = frontdoor_adjust(joint, dag, x, outcome, mediators, given=strat)
                cells = []
                for cfg in sweep_configs(do_vars):
                    want = dict(zip(do_vars, cfg))
                    for (xv, g_cfg), dist in raw.items():
                        g = dict(zip(strat, g_cfg))
                        if xv != want[x] or any(g[w] != want[w] for w in extra):
                            continue
                        cells.append((cfg, tuple(g_cfg[len(extra):]), dist))
                return "frontdoor", do_vars, given, cells
        if method == "frontdoor":
            raise CriterionNotMet(
                f"front-door criterion fails for do({', '.join(do_vars)}) "
                f"on {outcome} via {sorted(mediators)}"
            )

    if method in ("auto", "backdoor"):
        if len(do_vars) == 1 and not given:
            x = do_vars[0]
            for z in (adjust,) if adjust else (set(), {v for v in dag.nodes
                                                      if v not in latent and v not in (x, outcome)
                                                      and v not in dag.descendants(x)}):
                if satisfies_backdoor(dag, x, outcome, z):
                    raw = backdoor_adjust(joint, dag, x, outcome, z)
                    cells = [(cfg, (), raw[cfg[0]]) for cfg in sweep_configs(do_vars)]
                    return "backdoor", do_vars, given, cells
        if method == "backdoor":
            raise CriterionNotMet(
                f"no admissible back-door adjustment set for do({', '.join(do_vars)}) on {outcome}"
            )

    raise CriterionNotMet(
        f"effect of do({', '.join(do_vars)}) on {outcome} is not identifiable "
        "by the available criteria; an unblockable back-door trail remains"
    )


def cmd_identify(args) -> int:
    scm, dag, scenario = _load_model(args.model)
    if dag is None:
        from .road_risk import scenario_dag

        dag = scenario_dag(scenario)
    if scenario is not None and not args.do:
        args.do = ["J_o", "D"]
    if scenario is not None and args.outcome is None:
        args.outcome = "Y_f"
    if args.outcome is None:
        raise _UsageError("--outcome is required")
    method, do_vars, given, cells = _identify_cells(scm, dag, scenario, args)
    doc = {
        "method": method,
        "outcome": args.outcome,
        "outcome_card": int(scm.card[args.outcome]),
        "do_vars": list(do_vars),
        "given_vars": list(given),
        "cells": [
            {"do": [int(c) for c in cfg], "given": [int(c) for c in g],
             "distribution": [float(p) for p in dist]}
            for cfg, g, dist in sorted(cells, key=lambda t: (t[0], t[1]))
        ],
    }
    _emit(doc, args.out)
    return 0


def cmd_verdict(args) -> int:
    dag = _load_graph(args.graph)
    v = noise_verdict(dag, args.candidate, args.outcome, set(args.observed or []))
    _emit(v.to_json(), args.out)
    return 0


def cmd_simulate(args) -> int:
    doc = _load_json(args.scenario)
    s = scenario_from_json(doc)
    if args.n < 1:
        raise _UsageError("--n must be >= 1")
    seed = args.seed if args.seed is not None else _default_seed()
    ds = simulate_journeys(s, args.n, seed)
    dataset_to_csv(ds, args.out)
    emp = empirical_joint(ds, ("Y_f",))
    summary = {
        "n": int(len(ds)),
        "seed": int(seed),
        "columns": list(ds.vars),
        "empirical_accident_rate": float(emp.probs[1]),
        "out": args.out,
    }
    _emit(summary, args.summary)
    return 0


def _scenario_report(s: RoadRiskScenario) -> dict:
    scm = build_scenario(s)
    j = observational_joint(s)
    capacity = rating_comparison(j, "Y_h", "D", "Y_f")
    gap = confounding_gap(scm, "D", "Y_f", "U")
    pe = phyd_effect(s)
    ne = naive_effect(s)
    gt = ground_truth_effect(s, EffectQuery("Y_f", frozenset({"J_o", "D"})))
    phyd_dev = max(float(np.abs(pe.table[k] - gt.table[k]).max()) for k in pe.table)
    naive_tv = max(
        0.5 * float(np.abs(ne.table[k] - gt.table[k]).sum()) for k in ne.table
    )
    from .road_risk import scenario_dag

    verdict = noise_verdict(scenario_dag(s), "Y_h", "Y_f", {"J_o", "D"})
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "depth": int(s.depth),
        "capacity_bits": capacity.to_json(),
        "confounding_gap_bits": gap.to_json(),
        "chain_factorization_residual": max(
            chain_factorization_residual(s, d) for d in range(s.decision_card)
        ),
        "traffic_markov_residual_bits": max(
            markov_consistency(scm, d) for d in range(s.decision_card)
        ),
        "phyd_vs_oracle_max_dev": phyd_dev,
        "naive_vs_oracle_max_tv": naive_tv,
        "history_outcome_mi_bits": mutual_information(j, {"Y_h"}, {"Y_f"}),
        "history_verdict": verdict.to_json(),
        "effects": {
            "oracle": gt.to_json(),
            "frontdoor": pe.to_json(),
            "naive": ne.to_json(),
        },
    }


def cmd_evaluate(args) -> int:
    doc = _load_json(args.scenario)
    s = scenario_from_json(doc)
    _emit(_scenario_report(s), args.out)
    return 0


def cmd_report(args) -> int:
    scm, dag, scenario = _load_model(args.model)
    if scenario is not None:
        from .road_risk import scenario_dag

        dag = scenario_dag(scenario)
        history = args.history or "Y_h"
        behavior = args.behavior or "D"
        outcome = args.outcome or "Y_f"
        observed = set(args.observed) if args.observed else {"J_o", "D"}
        j = observational_joint(scenario)
    else:
        history = args.history or "Y_h"
        behavior = args.behavior or "X_c"
        outcome = args.outcome or "Y_f"
        observed = set(args.observed or [])
        j = marginal(exact_joint(scm), set(dag.nodes) - set(dag.latent))
    verdict = noise_verdict(dag, history, outcome, observed)
    capacity = rating_comparison(j, history, behavior, outcome)
    _emit(
        {
            "schema_version": REPORT_SCHEMA_VERSION,
            "verdict": verdict.to_json(),
            "capacity_bits": capacity.to_json(),
        },
        args.out,
    )
    return 0


# -- parser ----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="causalrating",
        description="Causal analysis of rating variables on discrete models.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("templates", help="list built-in graphs or print one")
    t.add_argument("name", nargs="?", help="template id, e.g. Fig1d or Fig6Canonical(2)")
    t.add_argument("--depth", type=int, default=None, help="chain depth for parametric templates")
    t.add_argument("--out", default=None)
    t.set_defaults(fn=cmd_templates)

    d = sub.add_parser("dsep", help="d-separation query against a graph")
    d.add_argument("graph", help="graph JSON file or template id")
    d.add_argument("--x", nargs="+", required=True)
    d.add_argument("--y", nargs="+", required=True)
    d.add_argument("--z", nargs="*", default=[])
    d.add_argument("--out", default=None)
    d.set_defaults(fn=cmd_dsep)

    i = sub.add_parser("identify", help="identify an interventional distribution")
    i.add_argument("model", help="SCM or scenario JSON file")
    i.add_argument("--outcome", default=None)
    i.add_argument("--do", nargs="+", default=None, metavar="NAME[=VAL]")
    i.add_argument("--given", nargs="*", default=[])
    i.add_argument("--mediators", nargs="*", default=[])
    i.add_argument("--adjust", nargs="*", default=[])
    i.add_argument("--method", choices=["auto", "backdoor", "frontdoor", "oracle"], default="auto")
    i.add_argument("--out", default=None)
    i.set_defaults(fn=cmd_identify)

    v = sub.add_parser("verdict", help="noise/signal verdict for a variable")
    v.add_argument("graph", help="graph JSON file or template id")
    v.add_argument("--candidate", required=True)
    v.add_argument("--outcome", required=True)
    v.add_argument("--observed", nargs="*", default=[])
    v.add_argument("--out", default=None)
    v.set_defaults(fn=cmd_verdict)

    s = sub.add_parser("simulate", help="sample journey records to CSV")
    s.add_argument("scenario", help="scenario JSON file")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=None,
                   help=f"sampling seed (default {DEFAULT_SEED}, or ${SEED_ENV_VAR})")
    s.add_argument("--out", required=True, help="CSV output path")
    s.add_argument("--summary", default=None, help="summary JSON path (default stdout)")
    s.set_defaults(fn=cmd_simulate)

    e = sub.add_parser("evaluate", help="full evaluation report for a scenario")
    e.add_argument("scenario", help="scenario JSON file")
    e.add_argument("--out", default=None)
    e.set_defaults(fn=cmd_evaluate)

    r = sub.add_parser("report", help="verdict plus capacity comparison")
    r.add_argument("model", help="SCM or scenario JSON file")
    r.add_argument("--history", default=None)
    r.add_argument("--behavior", default=None)
    r.add_argument("--outcome", default=None)
    r.add_argument("--observed", nargs="*", default=None)
    r.add_argument("--out", default=None)
    r.set_defaults(fn=cmd_report)

    return p


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IdentificationError as exc:
        doc = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        witness = getattr(exc, "witness", None)
        if witness is not None:
            doc["error"]["witness"] = list(witness)
        cell = getattr(exc, "cell", None)
        if cell is not None:
            doc["error"]["cell"] = {k: int(v) for k, v in cell.items()}
        print(json.dumps(doc, indent=2, sort_keys=True))
        return 3
    except CausalRatingError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
