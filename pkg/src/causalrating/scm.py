"""Discrete structural causal models: CPTs, exact joints, surgery, sampling.

Probabilities are 64-bit floats.  CPT rows for a node are indexed by the
parent configuration in mixed-radix order, most-significant parent
first, with parents listed in the graph's topological order by default.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import (
    EmptyDataset,
    NormalizationError,
    ShapeError,
    StateSpaceTooLarge,
    UnknownNodeError,
    UnknownVariable,
    ValueOutOfRange,
    ZeroProbabilityEvidence,
)
from .graph import Dag, dag_from_json, dag_to_json, mutilate

__all__ = [
    "JointTable",
    "DiscreteScm",
    "Dataset",
    "build_scm",
    "exact_joint",
    "marginal",
    "condition",
    "intervene",
    "sample",
    "empirical_joint",
    "random_scm",
    "do_distribution",
    "scm_to_json",
    "scm_from_json",
    "dataset_to_csv",
]

ROW_SUM_TOL = 1e-9
DEFAULT_CELL_CAP = 1 << 24


@dataclass(frozen=True)
class JointTable:
    """Exact probability mass function over an ordered variable subset."""

    vars: tuple
    cards: tuple
    probs: np.ndarray  # shape == cards

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.shape != tuple(self.cards):
            raise ShapeError(f"probs shape {probs.shape} != cards {self.cards}")
        if len(self.vars) != len(self.cards):
            raise ShapeError("vars and cards length mismatch")
        if probs.size and probs.min() < -1e-12:
            raise NormalizationError(f"negative mass: {probs.min()}")
        total = float(probs.sum())
        if abs(total - 1.0) > ROW_SUM_TOL:
            raise NormalizationError(f"mass sums to {total}, not 1")
        probs = np.clip(probs, 0.0, None)
        probs.flags.writeable = False
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "cards", tuple(self.cards))
        object.__setattr__(self, "probs", probs)

    @property
    def mass(self) -> np.ndarray:
        """Flat row-major view of the table."""
        return self.probs.reshape(-1)

    def axis(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise UnknownVariable(f"unknown variable: {var!r}") from None

    def card(self, var: str) -> int:
        return self.cards[self.axis(var)]


def marginal(j: JointTable, keep: Iterable[str]) -> JointTable:
    """Sum out every variable not in ``keep`` (original order preserved)."""
    keep = set(keep)
    for v in keep:
        if v not in j.vars:
            raise UnknownVariable(f"unknown variable: {v!r}")
    if not keep:
        raise UnknownVariable("keep set must be nonempty")
    axes = tuple(i for i, v in enumerate(j.vars) if v not in keep)
    probs = j.probs.sum(axis=axes) if axes else j.probs
    vars_kept = tuple(v for v in j.vars if v in keep)
    cards_kept = tuple(c for v, c in zip(j.vars, j.cards) if v in keep)
    return JointTable(vars_kept, cards_kept, probs)


def condition(j: JointTable, evidence: Mapping[str, int]) -> JointTable:
    """Condition on ``evidence`` and drop the evidenced variables."""
    if not evidence:
        return j
    idx = [slice(None)] * len(j.vars)
    for var, val in evidence.items():
        ax = j.axis(var)
        if not 0 <= int(val) < j.cards[ax]:
            raise ValueOutOfRange(f"{var}={val} out of range 0..{j.cards[ax] - 1}")
        idx[ax] = int(val)
    sliced = j.probs[tuple(idx)]
    total = float(sliced.sum())
    if total <= 0.0:
        raise ZeroProbabilityEvidence(f"P({dict(evidence)}) = 0")
    vars_kept = tuple(v for v in j.vars if v not in evidence)
    cards_kept = tuple(c for v, c in zip(j.vars, j.cards) if v not in evidence)
    if not vars_kept:
        raise UnknownVariable("conditioning on every variable leaves nothing")
    return JointTable(vars_kept, cards_kept, sliced / total)


def mass_of(j: JointTable, assignment: Mapping[str, int]) -> float:
    """Total probability of a (partial) assignment."""
    idx = [slice(None)] * len(j.vars)
    for var, val in assignment.items():
        idx[j.axis(var)] = int(val)
    return float(np.sum(j.probs[tuple(idx)]))


class DiscreteScm:
    """A :class:`Dag` with per-node cardinalities and CPTs.

    Each node's CPT row order is fixed by its parent tuple at
    construction time (the graph's topological order by default) and is
    preserved by surgery, so interventions never reinterpret rows.
    """

    __slots__ = ("dag", "card", "cpt", "parents")

    def __init__(
        self,
        dag: Dag,
        card: Mapping[str, int],
        cpt: Mapping[str, np.ndarray],
        parents: Mapping[str, tuple] | None = None,
    ):
        missing = set(dag.nodes) - set(card)
        if missing:
            raise ShapeError(f"card missing nodes: {sorted(missing)}")
        missing = set(dag.nodes) - set(cpt)
        if missing:
            raise ShapeError(f"cpt missing nodes: {sorted(missing)}")
        for k in set(card) | set(cpt):
            if k not in set(dag.nodes):
                raise UnknownNodeError(f"unknown node: {k!r}")
        card = {n: int(card[n]) for n in dag.nodes}
        porder = {}
        for v in dag.nodes:
            if parents is not None and v in parents:
                ps = tuple(parents[v])
                if frozenset(ps) != dag.parents(v) or len(ps) != len(set(ps)):
                    raise ShapeError(
                        f"parent order for {v} does not match the graph: {ps}"
                    )
            else:
                ps = self._topo_parents(dag, v)
            porder[v] = ps
        tables = {}
        for v in dag.nodes:
            if card[v] < 2:
                raise ShapeError(f"cardinality of {v} must be >= 2")
            ps = porder[v]
            n_rows = 1
            for p in ps:
                n_rows *= card[p]
            t = np.array(cpt[v], dtype=np.float64)
            if t.shape != (n_rows, card[v]):
                raise ShapeError(
                    f"CPT for {v}: shape {t.shape}, expected {(n_rows, card[v])}"
                )
            if t.min() < 0.0 or t.max() > 1.0 + ROW_SUM_TOL:
                raise NormalizationError(f"CPT for {v} has entries outside [0, 1]")
            bad = np.abs(t.sum(axis=1) - 1.0) > ROW_SUM_TOL
            if bad.any():
                row = int(np.argmax(bad))
                raise NormalizationError(
                    f"CPT row {row} of {v} sums to {t[row].sum()}, not 1"
                )
            t.flags.writeable = False
            tables[v] = t
        object.__setattr__(self, "dag", dag)
        object.__setattr__(self, "card", card)
        object.__setattr__(self, "cpt", tables)
        object.__setattr__(self, "parents", porder)

    def __setattr__(self, name, value):
        raise AttributeError("DiscreteScm is immutable")

    @staticmethod
    def _topo_parents(dag: Dag, v: str) -> tuple:
        order = {n: i for i, n in enumerate(dag.topological_order)}
        return tuple(sorted(dag.parents(v), key=order.__getitem__))

    def parents_of(self, v: str) -> tuple:
        """Parents of ``v`` in CPT row order."""
        if v not in self.parents:
            raise UnknownNodeError(f"unknown node: {v!r}")
        return self.parents[v]

    def state_space(self) -> int:
        size = 1
        for v in self.dag.nodes:
            size *= self.card[v]
        return size


def build_scm(dag: Dag, card: Mapping[str, int], cpt: Mapping) -> DiscreteScm:
    """Validate and construct a :class:`DiscreteScm`."""
    return DiscreteScm(dag, card, cpt)


def exact_joint(scm: DiscreteScm, max_cells: int = DEFAULT_CELL_CAP) -> JointTable:
    """Exact joint over all variables, in topological order."""
    order = scm.dag.topological_order
    if scm.state_space() > max_cells:
        raise StateSpaceTooLarge(
            f"state space {scm.state_space()} exceeds cap {max_cells}"
        )
    pos = {v: i for i, v in enumerate(order)}
    cards = tuple(scm.card[v] for v in order)
    joint = np.ones(cards, dtype=np.float64)
    for v in order:
        dims = list(scm.parents_of(v)) + [v]
        t = scm.cpt[v].reshape([scm.card[d] for d in dims])
        # Align the CPT's (parents..., v) axes with the global axis order.
        perm = sorted(range(len(dims)), key=lambda i: pos[dims[i]])
        t = t.transpose(perm)
        shape = [1] * len(order)
        for d in dims:
            shape[pos[d]] = scm.card[d]
        joint = joint * t.reshape(shape)
    return JointTable(order, cards, joint)


def intervene(scm: DiscreteScm, assignment: Mapping[str, int]) -> DiscreteScm:
    """Graph surgery: cut incoming edges and pin each assigned node."""
    for v, val in assignment.items():
        if v not in scm.card:
            raise UnknownNodeError(f"unknown node: {v!r}")
        if not 0 <= int(val) < scm.card[v]:
            raise ValueOutOfRange(f"{v}={val} out of range 0..{scm.card[v] - 1}")
    if not assignment:
        return scm
    new_dag = mutilate(scm.dag, assignment.keys())
    cpt = dict(scm.cpt)
    parents = dict(scm.parents)
    for v, val in assignment.items():
        row = np.zeros((1, scm.card[v]))
        row[0, int(val)] = 1.0
        cpt[v] = row
        parents[v] = ()
    return DiscreteScm(new_dag, scm.card, cpt, parents=parents)


def do_distribution(
    scm: DiscreteScm,
    outcome: str,
    do: Mapping[str, int],
    given: Mapping[str, int] | None = None,
) -> np.ndarray:
    """Surgery oracle: P(outcome | do(do), given) from the full model."""
    j = exact_joint(intervene(scm, do))
    if given:
        j = condition(j, given)
    return marginal(j, {outcome}).probs


# -- sampling ------------------------------------------------------------
#
# RNG: a splitmix64-based counter generator.  The draw for node k of row
# i is hash(seed, i, k) mapped to [0, 1); rows therefore have independent
# derived streams and sampling is order-independent and parallelizable.

_U64 = np.uint64
_GAMMA = _U64(0x9E3779B97F4A7C15)
_M1 = _U64(0xBF58476D1CE4E5B9)
_M2 = _U64(0x94D049BB133111EB)


def _mix(x):
    x = np.asarray(x, dtype=np.uint64) + _GAMMA
    x = (x ^ (x >> _U64(30))) * _M1
    x = (x ^ (x >> _U64(27))) * _M2
    return x ^ (x >> _U64(31))


def _uniforms(seed: int, rows: np.ndarray, draw: int) -> np.ndarray:
    """Vectorized splitmix64 uniforms in [0, 1) for (seed, row, draw)."""
    with np.errstate(over="ignore"):
        h = _mix(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
        h = _mix(h ^ rows.astype(np.uint64))
        h = _mix(h ^ _U64(draw % (1 << 64)))
    return (h >> _U64(11)).astype(np.float64) * (2.0**-53)


@dataclass(frozen=True)
class Dataset:
    """Integer sample matrix with its variable order and master seed."""

    vars: tuple
    cards: tuple
    rows: np.ndarray  # shape (n, len(vars)), dtype int
    seed: int

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != len(self.vars):
            raise ShapeError("rows must be (n, len(vars))")
        for k, c in enumerate(self.cards):
            if rows.size and (rows[:, k].min() < 0 or rows[:, k].max() >= c):
                raise ValueOutOfRange(f"column {self.vars[k]} exceeds cardinality {c}")
        rows.flags.writeable = False
        object.__setattr__(self, "vars", tuple(self.vars))
        object.__setattr__(self, "cards", tuple(self.cards))
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return self.rows.shape[0]

    def column(self, var: str) -> np.ndarray:
        return self.rows[:, self.vars.index(var)]


def sample(scm: DiscreteScm, n: int, seed: int) -> Dataset:
    """Ancestral sampling; bit-reproducible for a fixed seed."""
    if n < 1:
        raise ValueOutOfRange("n must be >= 1")
    order = scm.dag.topological_order
    pos = {v: i for i, v in enumerate(order)}
    rows = np.zeros((n, len(order)), dtype=np.int64)
    row_ids = np.arange(n, dtype=np.uint64)
    for k, v in enumerate(order):
        u = _uniforms(seed, row_ids, k)
        ps = scm.parents_of(v)
        if ps:
            ridx = np.zeros(n, dtype=np.int64)
            for p in ps:
                ridx = ridx * scm.card[p] + rows[:, pos[p]]
        else:
            ridx = np.zeros(n, dtype=np.int64)
        cum = np.cumsum(scm.cpt[v], axis=1)
        rows[:, k] = (u[:, None] >= cum[ridx, :]).sum(axis=1)
        np.clip(rows[:, k], 0, scm.card[v] - 1, out=rows[:, k])
    cards = tuple(scm.card[v] for v in order)
    return Dataset(order, cards, rows, seed)


def empirical_joint(d: Dataset, vars: Iterable[str]) -> JointTable:
    """Normalized frequency table over ``vars``."""
    vars = tuple(vars)
    if len(d) == 0:
        raise EmptyDataset("dataset has no rows")
    for v in vars:
        if v not in d.vars:
            raise UnknownVariable(f"unknown variable: {v!r}")
    cols = [d.vars.index(v) for v in vars]
    cards = tuple(d.cards[c] for c in cols)
    codes = np.zeros(len(d), dtype=np.int64)
    for c, card in zip(cols, cards):
        codes = codes * card + d.rows[:, c]
    size = int(np.prod(cards))
    counts = np.bincount(codes, minlength=size).astype(np.float64)
    return JointTable(vars, cards, (counts / len(d)).reshape(cards))


def dataset_to_csv(d: Dataset, path_or_buf) -> None:
    """Write the dataset as CSV with a header row."""

    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.vars)
        w.writerows(d.rows.tolist())

    if isinstance(path_or_buf, (str,)) or hasattr(path_or_buf, "__fspath__"):
        with open(path_or_buf, "w", newline="") as fh:
            _write(fh)
    else:
        _write(path_or_buf)


def dataset_csv_text(d: Dataset) -> str:
    buf = io.StringIO()
    dataset_to_csv(d, buf)
    return buf.getvalue()


# -- random models and JSON ----------------------------------------------


def random_scm(dag: Dag, seed: int, card=2, concentration: float = 1.0) -> DiscreteScm:
    """Model on ``dag`` with Dirichlet-distributed CPT rows (strictly positive)."""
    if isinstance(card, Mapping):
        cards = {v: int(card.get(v, 2)) for v in dag.nodes}
    else:
        cards = {v: int(card) for v in dag.nodes}
    rng = np.random.default_rng(seed)
    cpt = {}
    for v in dag.topological_order:
        ps = DiscreteScm._topo_parents(dag, v)
        n_rows = 1
        for p in ps:
            n_rows *= cards[p]
        g = rng.gamma(concentration, size=(n_rows, cards[v]))
        g = np.maximum(g, 1e-12)
        cpt[v] = g / g.sum(axis=1, keepdims=True)
    return DiscreteScm(dag, cards, cpt)


def scm_to_json(scm: DiscreteScm) -> dict:
    doc = {
        "graph": dag_to_json(scm.dag),
        "card": dict(scm.card),
        "cpt": {v: scm.cpt[v].tolist() for v in scm.dag.nodes},
    }
    default = {v: DiscreteScm._topo_parents(scm.dag, v) for v in scm.dag.nodes}
    if any(scm.parents[v] != default[v] for v in scm.dag.nodes):
        doc["parents"] = {v: list(scm.parents[v]) for v in scm.dag.nodes}
    return doc


def scm_from_json(doc: Mapping) -> DiscreteScm:
    try:
        dag = dag_from_json(doc["graph"])
        parents = doc.get("parents")
        if parents is not None:
            parents = {v: tuple(ps) for v, ps in parents.items()}
        return DiscreteScm(dag, doc["card"], doc["cpt"], parents=parents)
    except KeyError as exc:
        raise ShapeError(f"malformed SCM document: missing {exc}") from exc


def scm_dumps(scm: DiscreteScm) -> str:
    return json.dumps(scm_to_json(scm), indent=2, sort_keys=True)
