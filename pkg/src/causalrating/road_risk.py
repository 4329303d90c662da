"""The real-time road-risk scenario: TTA-discretized driving-state chain.

The scenario is a concrete :class:`DiscreteScm` on the canonical graph
(claim history ``Y_h``, journey switch ``J_o``, latent confounder ``U``,
driving decision ``D``, per-stage traffic ``T_i``, binary peril states
``S_0..S_D`` with absorbing escalation, future claim ``Y_f``).  ``S_0``
is the absolutely-safe start event (point mass at 0), accidents require
``J_o = 1``, and each ``S_i`` is the indicator "peril level i reached".
"""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass
from importlib import resources
from typing import Mapping

import numpy as np

from .errors import NegativeTta, ParameterError
from .graph import Dag
from .identify import EffectQuery, frontdoor_adjust
from .info import conditional_mutual_information
from .scm import (
    Dataset,
    DiscreteScm,
    JointTable,
    condition,
    exact_joint,
    intervene,
    marginal,
    mass_of,
    sample,
)

__all__ = [
    "RoadRiskScenario",
    "EffectTable",
    "tta_discretize",
    "build_scenario",
    "scenario_dag",
    "markov_consistency",
    "simulate_journeys",
    "ground_truth_effect",
    "phyd_effect",
    "naive_effect",
    "observational_joint",
    "chain_factorization_residual",
    "default_scenario",
    "canonical_scenario",
    "scenario_to_json",
    "scenario_from_json",
]

SCENARIO_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RoadRiskScenario:
    """Parameterization of the canonical road-risk graph.

    ``escalation[i][d][t]`` is the probability of advancing from peril
    level i to i+1 under decision d and traffic t (stages feed
    ``S_1..S_D``).  ``accident_base[s]`` is the accident probability for
    a started journey ending at peril level s with no confounder;
    ``confounder_strength`` holds the latent prevalence (``u_prob``),
    the shift of the decision distribution toward the most aggressive
    value (``decision_shift``) and the additive accident hazard
    (``hazard``).  All constants are repository fixtures; none come from
    measured data.
    """

    depth: int
    tta_thresholds: tuple
    y_h_prior: tuple
    journey_rate: tuple  # P(J_o=1 | Y_h=h)
    decision_base: tuple  # per J_o value: distribution over decisions (U=0)
    traffic_dist: tuple
    escalation: tuple  # [stage][decision][traffic] -> advance probability
    accident_base: tuple  # by final peril level: (safe, perilous)
    confounder_strength: Mapping[str, float]
    decision_card: int = 3
    traffic_card: int = 2
    schema_version: int = SCENARIO_SCHEMA_VERSION

    def __post_init__(self):
        object.__setattr__(self, "tta_thresholds", tuple(float(t) for t in self.tta_thresholds))
        object.__setattr__(self, "y_h_prior", tuple(float(p) for p in self.y_h_prior))
        object.__setattr__(self, "journey_rate", tuple(float(p) for p in self.journey_rate))
        object.__setattr__(
            self, "decision_base", tuple(tuple(float(p) for p in row) for row in self.decision_base)
        )
        object.__setattr__(self, "traffic_dist", tuple(float(p) for p in self.traffic_dist))
        object.__setattr__(
            self,
            "escalation",
            tuple(tuple(tuple(float(p) for p in ts) for ts in ds) for ds in self.escalation),
        )
        object.__setattr__(self, "accident_base", tuple(float(p) for p in self.accident_base))
        object.__setattr__(self, "confounder_strength", dict(self.confounder_strength))
        self._validate()

    def _validate(self):
        if self.depth < 1:
            raise ParameterError("depth must be >= 1")
        if self.decision_card < 2 or self.traffic_card < 2:
            raise ParameterError("decision and traffic cardinalities must be >= 2")
        t = self.tta_thresholds
        if len(t) != self.depth + 1:
            raise ParameterError(f"need {self.depth + 1} TTA thresholds, got {len(t)}")
        if any(x <= 0 for x in t) or any(a >= b for a, b in zip(t[1:], t[:-1])):
            raise ParameterError("TTA thresholds must be strictly decreasing and positive")
        for name, dist in (("y_h_prior", self.y_h_prior), ("traffic_dist", self.traffic_dist)):
            if abs(sum(dist) - 1.0) > 1e-9 or min(dist) < 0:
                raise ParameterError(f"{name} is not a distribution")
        if len(self.traffic_dist) != self.traffic_card:
            raise ParameterError("traffic_dist length != traffic_card")
        if len(self.journey_rate) != len(self.y_h_prior):
            raise ParameterError("journey_rate must have one entry per claim-history value")
        if not all(0.0 <= r <= 1.0 for r in self.journey_rate):
            raise ParameterError("journey rates must be probabilities")
        if len(self.decision_base) != 2:
            raise ParameterError("decision_base needs one row per journey-switch value")
        for row in self.decision_base:
            if len(row) != self.decision_card or abs(sum(row) - 1.0) > 1e-9 or min(row) < 0:
                raise ParameterError("decision_base rows must be distributions over decisions")
        if len(self.escalation) != self.depth:
            raise ParameterError(f"need {self.depth} escalation stages")
        for stage in self.escalation:
            if len(stage) != self.decision_card:
                raise ParameterError("escalation stage must cover every decision value")
            for row in stage:
                if len(row) != self.traffic_card or not all(0.0 <= p <= 1.0 for p in row):
                    raise ParameterError("escalation entries must be probabilities per traffic value")
        if len(self.accident_base) != 2 or not all(0.0 <= p <= 1.0 for p in self.accident_base):
            raise ParameterError("accident_base must be two probabilities")
        cs = self.confounder_strength
        for key in ("u_prob", "decision_shift", "hazard"):
            if key not in cs or not 0.0 <= float(cs[key]) <= 1.0:
                raise ParameterError(f"confounder_strength.{key} must be a probability")
        if max(self.accident_base) + float(cs["hazard"]) > 1.0 + 1e-12:
            raise ParameterError("accident_base + hazard exceeds 1")

    @property
    def states(self) -> tuple:
        return tuple(f"S_{i}" for i in range(self.depth + 1))

    @property
    def traffic_vars(self) -> tuple:
        return tuple(f"T_{i}" for i in range(self.depth + 1))


def tta_discretize(tta: float, thresholds) -> int:
    """Peril state index for a time-to-accident reading.

    ``thresholds`` are strictly decreasing seconds t_1 > ... > t_{D+1};
    the returned index counts how many thresholds the reading falls
    below, so boundary values land in the less perilous state.
    """
    thresholds = tuple(float(t) for t in thresholds)
    if not thresholds or any(x <= 0 for x in thresholds) or any(
        a >= b for a, b in zip(thresholds[1:], thresholds[:-1])
    ):
        raise ParameterError("thresholds must be strictly decreasing and positive")
    if tta < 0:
        raise NegativeTta(f"TTA must be nonnegative, got {tta}")
    return sum(1 for t in thresholds if tta < t)


def scenario_dag(s: RoadRiskScenario) -> Dag:
    """Canonical graph extended with traffic parents and the journey gate."""
    states, traffic = s.states, s.traffic_vars
    nodes = ["Y_h", "J_o", "U", "D", *traffic, *states, "Y_f"]
    edges = [("Y_h", "J_o"), ("J_o", "D"), ("U", "D"), ("U", "Y_f"), ("J_o", "Y_f")]
    for t, st in zip(traffic, states):
        edges.append((t, st))
    for st in states:
        edges.append(("D", st))
    for a, b in zip(states, states[1:]):
        edges.append((a, b))
    edges.append((states[-1], "Y_f"))
    return Dag(nodes, edges, ("U",))


def _cpt_rows(dag: Dag, card: Mapping[str, int], node: str, dist_fn) -> np.ndarray:
    """Build a CPT by enumerating parent rows in the model's own order.

    Rows are mixed-radix over the parents sorted topologically, most
    significant parent first, matching :class:`DiscreteScm`.
    """
    order = {v: i for i, v in enumerate(dag.topological_order)}
    parents = sorted(dag.parents(node), key=order.__getitem__)
    rows = [
        dist_fn(dict(zip(parents, cfg)))
        for cfg in itertools.product(*[range(card[p]) for p in parents])
    ]
    return np.array(rows, dtype=float)


def build_scenario(s: RoadRiskScenario) -> DiscreteScm:
    """Emit the scenario as a validated discrete SCM."""
    dag = scenario_dag(s)
    cs = s.confounder_strength
    u_prob, shift, hazard = float(cs["u_prob"]), float(cs["decision_shift"]), float(cs["hazard"])
    dc, tc = s.decision_card, s.traffic_card

    card = {"Y_h": len(s.y_h_prior), "J_o": 2, "U": 2, "D": dc, "Y_f": 2}
    for v in s.traffic_vars + s.states:
        card[v] = tc if v.startswith("T") else 2

    cpt = {
        "Y_h": np.array([s.y_h_prior]),
        "J_o": np.array([[1.0 - r, r] for r in s.journey_rate]),
        "U": np.array([[1.0 - u_prob, u_prob]]),
    }
    # D: the confounder shifts mass toward the most aggressive value.
    aggressive = np.eye(dc)[-1]

    def d_dist(a):
        base = np.array(s.decision_base[a["J_o"]])
        if a["U"]:
            return (1.0 - shift) * base + shift * aggressive
        return base

    cpt["D"] = _cpt_rows(dag, card, "D", d_dist)

    for t in s.traffic_vars:
        cpt[t] = np.array([s.traffic_dist])

    # S_0: every journey starts absolutely safe.
    cpt["S_0"] = _cpt_rows(dag, card, "S_0", lambda a: [1.0, 0.0])
    # S_i: absorbing escalation driven by the decision and stage traffic.
    for i in range(1, s.depth + 1):
        def s_dist(a, stage=i):
            if a[f"S_{stage - 1}"]:
                return [0.0, 1.0]
            e = s.escalation[stage - 1][a["D"]][a[f"T_{stage}"]]
            return [1.0 - e, e]

        cpt[f"S_{i}"] = _cpt_rows(dag, card, f"S_{i}", s_dist)

    # Y_f: accidents require a started journey.
    def y_dist(a):
        if a["J_o"] == 0:
            return [1.0, 0.0]
        p = min(1.0, s.accident_base[a[f"S_{s.depth}"]] + hazard * a["U"])
        return [1.0 - p, p]

    cpt["Y_f"] = _cpt_rows(dag, card, "Y_f", y_dist)
    return DiscreteScm(dag, card, cpt)


def markov_consistency(scm: DiscreteScm, d_value: int) -> float:
    """Max over stages of I(T_i; S_{i+1} | S_i) given the decision value.

    Structurally zero (< 1e-9) for models emitted by
    :func:`build_scenario`; a positive value flags a traffic variable
    leaking past its own stage.
    """
    j = condition(exact_joint(scm), {"D": int(d_value)})
    states = sorted(
        (v for v in j.vars if v.startswith("S_")), key=lambda v: int(v.split("_")[1])
    )
    worst = 0.0
    for i, st in enumerate(states):
        nxt = states[i + 1] if i + 1 < len(states) else "Y_f"
        t = f"T_{i}"
        if t not in j.vars or nxt not in j.vars:
            continue
        worst = max(worst, conditional_mutual_information(j, {t}, {nxt}, {st}))
    return worst


def simulate_journeys(s: RoadRiskScenario, n: int, seed: int) -> Dataset:
    """Ancestral sampling of the scenario, one journey record per row.

    Rows with ``J_o = 0`` describe a journey that never happened: their
    peril-state columns are reported as the all-safe trajectory (the
    sampled values are counterfactual style potentials, not realized
    states).  ``Y_f`` needs no masking; the model gates it on ``J_o``.
    """
    scm = build_scenario(s)
    ds = sample(scm, n, seed)
    rows = np.array(ds.rows)
    stay_home = rows[:, ds.vars.index("J_o")] == 0
    for st in s.states:
        rows[stay_home, ds.vars.index(st)] = 0
    return Dataset(ds.vars, ds.cards, rows, seed)


@dataclass(frozen=True)
class EffectTable:
    """Distributions over an outcome, per do-configuration and stratum."""

    outcome: str
    outcome_card: int
    do_vars: tuple
    given_vars: tuple
    table: dict  # (do_config, given_config) -> np.ndarray over outcome

    def dist(self, do_config, given_config=()) -> np.ndarray:
        return self.table[(tuple(do_config), tuple(given_config))]

    def to_json(self) -> dict:
        return {
            "outcome": self.outcome,
            "outcome_card": int(self.outcome_card),
            "do_vars": list(self.do_vars),
            "given_vars": list(self.given_vars),
            "cells": [
                {
                    "do": list(do_cfg),
                    "given": list(g_cfg),
                    "distribution": [float(p) for p in dist],
                }
                for (do_cfg, g_cfg), dist in sorted(self.table.items())
            ],
        }


def ground_truth_effect(s: RoadRiskScenario, q: EffectQuery) -> EffectTable:
    """Exact interventional oracle via graph surgery on the full model."""
    scm = build_scenario(s)
    order = scm.dag.topological_order
    if isinstance(q.do, Mapping):
        do_vars = tuple(v for v in order if v in q.do)
        do_configs = [tuple(int(q.do[v]) for v in do_vars)]
    else:
        do_vars = tuple(v for v in order if v in q.do)
        do_configs = [tuple(cfg) for cfg in np.ndindex(*(scm.card[v] for v in do_vars))]
    given_vars = tuple(v for v in order if v in q.observed)
    table = {}
    for cfg in do_configs:
        cut = intervene(scm, dict(zip(do_vars, (int(c) for c in cfg))))
        j = exact_joint(cut)
        if given_vars:
            for g_cfg in np.ndindex(*(scm.card[v] for v in given_vars)):
                g = dict(zip(given_vars, (int(c) for c in g_cfg)))
                if mass_of(j, g) <= 0.0:
                    continue
                dist = marginal(condition(j, g), {q.outcome}).probs
                table[(cfg, tuple(int(c) for c in g_cfg))] = dist
        else:
            table[(cfg, ())] = marginal(j, {q.outcome}).probs
    return EffectTable(q.outcome, scm.card[q.outcome], do_vars, given_vars, table)


def observational_joint(s: RoadRiskScenario) -> JointTable:
    """Exact joint over the observable variables (U and traffic summed out)."""
    scm = build_scenario(s)
    keep = {"Y_h", "J_o", "D", "Y_f", *s.states}
    return marginal(exact_joint(scm), keep)


def phyd_effect(s: RoadRiskScenario) -> EffectTable:
    """P(Y_f | do(J_o, D)) for every (J_o, D) pair, identified from data.

    Front-door adjustment through the peril-state chain on the U-free
    observational joint, stratified by the journey switch; matches the
    surgery oracle on the canonical graph to 1e-9.
    """
    j = observational_joint(s)
    dag = scenario_dag(s)
    raw = frontdoor_adjust(j, dag, "D", "Y_f", set(s.states), given={"J_o"})
    table = {((int(g[0]), int(d)), ()): dist for (d, g), dist in raw.items()}
    return EffectTable("Y_f", 2, ("J_o", "D"), (), table)


def naive_effect(s: RoadRiskScenario) -> EffectTable:
    """Conditioning-based estimate P(Y_f | J_o, D), for bias comparison."""
    j = observational_joint(s)
    table = {}
    for jo in range(2):
        for d in range(s.decision_card):
            dist = marginal(condition(j, {"J_o": jo, "D": d}), {"Y_f"}).probs
            table[((jo, d), ())] = dist
    return EffectTable("Y_f", 2, ("J_o", "D"), (), table)


def chain_factorization_residual(s: RoadRiskScenario, d_value: int) -> float:
    """Deviation of P(chain | D) from the product of stage conditionals.

    The chain here is S_0..S_D followed by Y_f as the accident state.
    Configurations whose conditioning events have zero mass (unreachable
    under the absorbing encoding) are skipped.
    """
    scm = build_scenario(s)
    jd = condition(exact_joint(scm), {"D": int(d_value)})
    chain = list(s.states) + ["Y_f"]
    lhs = marginal(jd, set(chain))
    # Stage conditionals P(next | prev, D=d) from pairwise marginals.
    pair_cond = []
    for a, b in zip(chain, chain[1:]):
        m = marginal(jd, {a, b})
        p = m.probs if m.vars == (a, b) else m.probs.T
        denom = p.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            pair_cond.append((np.where(denom > 0, p / np.where(denom > 0, denom, 1.0), np.nan), denom[:, 0]))
    worst = 0.0
    for cfg in np.ndindex(*(2,) * len(chain)):
        vals = list(cfg)
        prod = 1.0
        defined = True
        for k in range(len(chain) - 1):
            cond, denom = pair_cond[k]
            if denom[vals[k]] <= 0.0:
                defined = False
                break
            prod *= cond[vals[k], vals[k + 1]]
        if not defined:
            continue
        idx = tuple(cfg[chain.index(v)] for v in lhs.vars)
        actual = float(lhs.probs[idx])
        worst = max(worst, abs(actual - prod))
    return worst


# -- fixtures and serialization -------------------------------------------


def canonical_scenario(depth: int) -> RoadRiskScenario:
    """Programmatic defaults for any chain depth (fixtures, not data)."""
    dc, tc = 3, 2
    esc = []
    for stage in range(depth):
        base = 0.05 + 0.06 * stage
        esc.append(
            tuple(
                tuple(
                    min(0.9, base * (1.0 + 2.2 * d / (dc - 1)) * (1.0 + 0.9 * t / (tc - 1)))
                    for t in range(tc)
                )
                for d in range(dc)
            )
        )
    return RoadRiskScenario(
        depth=depth,
        decision_card=dc,
        traffic_card=tc,
        tta_thresholds=tuple(4.0 * 0.5**i for i in range(depth + 1)),
        y_h_prior=(0.62, 0.28, 0.10),
        journey_rate=(0.90, 0.72, 0.50),
        decision_base=((0.45, 0.40, 0.15), (0.50, 0.35, 0.15)),
        traffic_dist=(0.65, 0.35),
        escalation=tuple(esc),
        accident_base=(0.015, 0.55),
        confounder_strength={"u_prob": 0.30, "decision_shift": 0.55, "hazard": 0.30},
    )


def scenario_to_json(s: RoadRiskScenario) -> dict:
    doc = asdict(s)
    doc["confounder_strength"] = dict(s.confounder_strength)
    return json.loads(json.dumps(doc))


def scenario_from_json(doc: Mapping) -> RoadRiskScenario:
    if "schema_version" not in doc:
        raise ParameterError("scenario document lacks schema_version")
    if int(doc["schema_version"]) != SCENARIO_SCHEMA_VERSION:
        raise ParameterError(
            f"unsupported scenario schema_version {doc['schema_version']}"
        )
    known = {f for f in RoadRiskScenario.__dataclass_fields__}
    extra = set(doc) - known
    if extra:
        raise ParameterError(f"unknown scenario fields: {sorted(extra)}")
    try:
        return RoadRiskScenario(**{k: doc[k] for k in doc})
    except TypeError as exc:
        raise ParameterError(f"malformed scenario document: {exc}") from exc


def default_scenario() -> RoadRiskScenario:
    """The shipped depth-2 scenario fixture."""
    text = resources.files("causalrating.data").joinpath("default_scenario.json").read_text()
    return scenario_from_json(json.loads(text))
