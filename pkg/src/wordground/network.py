"""Discrete Bayesian network core.

Representation of named discrete variables and a DAG of conditional
probability tables, maximum-a-posteriori parameter fitting with symmetric
Dirichlet smoothing, exact inference by enumeration, and the decomposable
Bayesian-Dirichlet family score used by structure search.

Networks are immutable after construction: fitting returns a new network,
and all query operations are read-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

KINDS = ("action", "feature", "effect", "word")

# Binary presence values shared by every word variable, in CPT column order.
WORD_VALUES = ("absent", "present")
ABSENT, PRESENT = WORD_VALUES

# An assignment is a (possibly partial) map from variable name to value.
Assignment = Mapping[str, str]


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with a fixed, ordered value set."""

    name: str
    values: tuple[str, ...]
    kind: str = "feature"

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.kind not in KINDS:
            raise ValueError(f"unknown variable kind {self.kind!r} for {self.name!r}")
        if len(self.values) < 2:
            raise ValueError(f"variable {self.name!r} needs at least two values")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"variable {self.name!r} has duplicate values")
        if self.kind == "word" and self.values != WORD_VALUES:
            raise ValueError(
                f"word variable {self.name!r} must have values {WORD_VALUES}"
            )

    @property
    def cardinality(self) -> int:
        return len(self.values)

    def index_of(self, value: str) -> int:
        try:
            return self.values.index(value)
        except ValueError:
            raise ValueError(
                f"value {value!r} is not one of {self.name}'s values {self.values}"
            ) from None


def word_variable(word: str) -> Variable:
    """Binary presence/absence variable for one vocabulary word."""
    return Variable(word, WORD_VALUES, "word")


def affordance_variables() -> tuple[Variable, ...]:
    """The eight symbolic manipulation variables, in canonical order.

    The order doubles as the default tie-break ordering for structure search.
    """
    return (
        Variable("Action", ("grasp", "tap", "touch"), "action"),
        Variable("Color", ("lightgreen", "darkgreen", "yellow", "blue"), "feature"),
        Variable("Shape", ("sphere", "box"), "feature"),
        Variable("Size", ("small", "medium", "big"), "feature"),
        Variable("ObjVel", ("slow", "medium", "fast"), "effect"),
        Variable("HandVel", ("slow", "fast"), "effect"),
        Variable("ObjHandVel", ("slow", "medium", "fast"), "effect"),
        Variable("Contact", ("short", "long"), "effect"),
    )


def default_affordance_parents() -> dict[str, tuple[str, ...]]:
    """Default edge set: every effect conditioned on action and object
    geometry, color isolated."""
    return {
        "Action": (),
        "Color": (),
        "Shape": (),
        "Size": (),
        "ObjVel": ("Action", "Shape", "Size"),
        "HandVel": ("Action", "Shape", "Size"),
        "ObjHandVel": ("Action", "Shape", "Size"),
        "Contact": ("Action", "Shape", "Size"),
    }


def _toposort(names: Sequence[str], parents: Mapping[str, Sequence[str]]) -> list[str]:
    """Kahn's algorithm with stable (declaration-order) tie-breaks."""
    remaining = {n: set(parents.get(n, ())) for n in names}
    order: list[str] = []
    while remaining:
        ready = [n for n in names if n in remaining and not remaining[n]]
        if not ready:
            cycle = ", ".join(sorted(remaining))
            raise ValueError(f"cycle detected among variables: {cycle}")
        for n in ready:
            order.append(n)
            del remaining[n]
        for deps in remaining.values():
            deps.difference_update(ready)
    return order


class Network:
    """A DAG of discrete variables with one CPT per variable.

    CPTs are arrays of shape ``(n_parent_configs, cardinality)``; rows are
    indexed row-major over the parent list (first parent varies slowest).
    """

    def __init__(
        self,
        variables: Sequence[Variable],
        parents: Mapping[str, Sequence[str]],
        cpts: Mapping[str, np.ndarray],
        pseudocount: float = 1.0,
    ):
        self.variables = tuple(variables)
        self._by_name = {v.name: v for v in self.variables}
        if len(self._by_name) != len(self.variables):
            raise ValueError("duplicate variable names")
        self.parents: dict[str, tuple[str, ...]] = {}
        for v in self.variables:
            ps = tuple(parents.get(v.name, ()))
            for p in ps:
                if p not in self._by_name:
                    raise ValueError(f"unknown variable name {p!r} in parents of {v.name!r}")
                if v.kind == "word" and self._by_name[p].kind == "word":
                    raise ValueError(
                        f"word variable {v.name!r} cannot have word parent {p!r}"
                    )
            if len(set(ps)) != len(ps):
                raise ValueError(f"duplicate parent in parents of {v.name!r}")
            self.parents[v.name] = ps
        self._topo = _toposort([v.name for v in self.variables], self.parents)
        self.pseudocount = float(pseudocount)

        self.cpts: dict[str, np.ndarray] = {}
        for v in self.variables:
            table = np.asarray(cpts[v.name], dtype=float)
            expected = (self.n_parent_configs(v.name), v.cardinality)
            if table.shape != expected:
                raise ValueError(
                    f"CPT for {v.name!r} has shape {table.shape}, expected {expected}"
                )
            table = table.copy()
            table.flags.writeable = False
            self.cpts[v.name] = table

    # -- structure helpers -------------------------------------------------

    def variable(self, name: str) -> Variable:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValueError(f"unknown variable name {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def topological_order(self) -> list[str]:
        return list(self._topo)

    def n_parent_configs(self, name: str) -> int:
        n = 1
        for p in self.parents[name]:
            n *= self._by_name[p].cardinality
        return n

    def parent_config_index(self, name: str, assignment: Assignment) -> int:
        """Row index of `name`'s CPT under the given (parent-covering) assignment."""
        idx = 0
        for p in self.parents[name]:
            pv = self._by_name[p]
            idx = idx * pv.cardinality + pv.index_of(assignment[p])
        return idx

    def cpt_row(self, name: str, assignment: Assignment) -> np.ndarray:
        return self.cpts[name][self.parent_config_index(name, assignment)]

    def prob(self, name: str, assignment: Assignment) -> float:
        """p(name = assignment[name] | parents as bound in assignment)."""
        v = self._by_name[name]
        return float(self.cpt_row(name, assignment)[v.index_of(assignment[name])])

    def word_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.kind == "word")

    def affordance_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables if v.kind != "word")

    # -- derived networks --------------------------------------------------

    def with_word_layer(
        self,
        words: Sequence[Variable],
        word_parents: Mapping[str, Sequence[str]],
        word_cpts: Mapping[str, np.ndarray],
    ) -> "Network":
        """New network adding word nodes on top of this one, leaving the
        existing variables, structure, and CPTs untouched."""
        variables = list(self.variables) + list(words)
        parents = dict(self.parents)
        cpts = dict(self.cpts)
        for w in words:
            parents[w.name] = tuple(word_parents.get(w.name, ()))
            cpts[w.name] = word_cpts[w.name]
        return Network(variables, parents, cpts, self.pseudocount)

    def without_words(self) -> "Network":
        keep = [v for v in self.variables if v.kind != "word"]
        return Network(
            keep,
            {v.name: self.parents[v.name] for v in keep},
            {v.name: self.cpts[v.name] for v in keep},
            self.pseudocount,
        )


# -- construction and fitting ---------------------------------------------


def make_network(
    variables: Sequence[Variable], parent_map: Mapping[str, Sequence[str]]
) -> Network:
    """Network with the given structure and uniform placeholder CPTs."""
    variables = tuple(variables)
    by_name = {v.name: v for v in variables}
    for child, ps in parent_map.items():
        if child not in by_name:
            raise ValueError(f"unknown variable name {child!r} in parent map")
        for p in ps:
            if p not in by_name:
                raise ValueError(f"unknown variable name {p!r} in parents of {child!r}")
    cpts = {}
    for v in variables:
        n = 1
        for p in parent_map.get(v.name, ()):
            n *= by_name[p].cardinality
        cpts[v.name] = np.full((n, v.cardinality), 1.0 / v.cardinality)
    return Network(variables, parent_map, cpts)


def _encode_column(variable: Variable, records: Sequence[Assignment]) -> np.ndarray:
    """Value-index column for one variable over a complete dataset."""
    lookup = {val: i for i, val in enumerate(variable.values)}
    col = np.empty(len(records), dtype=np.int64)
    for i, rec in enumerate(records):
        try:
            col[i] = lookup[rec[variable.name]]
        except KeyError:
            if variable.name not in rec:
                raise ValueError(
                    f"record {i} is missing a value for {variable.name!r}"
                ) from None
            raise ValueError(
                f"record {i} binds {variable.name!r} to unknown value "
                f"{rec[variable.name]!r}"
            ) from None
    return col


def encode_columns(
    variables: Sequence[Variable], records: Sequence[Assignment]
) -> dict[str, np.ndarray]:
    """Value-index columns for a complete dataset, keyed by variable name."""
    return {v.name: _encode_column(v, records) for v in variables}


def family_counts(
    variable: Variable,
    parent_set: Sequence[Variable],
    columns: Mapping[str, np.ndarray],
) -> np.ndarray:
    """Count matrix of shape (n_parent_configs, cardinality) from encoded columns."""
    n = len(columns[variable.name])
    code = np.zeros(n, dtype=np.int64)
    n_configs = 1
    for p in parent_set:
        code = code * p.cardinality + columns[p.name]
        n_configs *= p.cardinality
    joint = code * variable.cardinality + columns[variable.name]
    counts = np.bincount(joint, minlength=n_configs * variable.cardinality)
    return counts.reshape(n_configs, variable.cardinality)


def fit_cpts(
    network: Network, dataset: Sequence[Assignment], pseudocount: float = 1.0
) -> Network:
    """Refit every CPT from complete records.

    Each CPT entry becomes ``(count + a) / (row_total + a * cardinality)``.
    With ``pseudocount == 0`` the fit is the plain maximum-likelihood
    frequency table (entries may be exactly zero, which is what makes
    impossible-input detection possible); rows for parent configurations
    never observed fall back to uniform so that every row still sums to 1.
    """
    a = float(pseudocount)
    if a < 0:
        raise ValueError("pseudocount must be >= 0")
    columns = {v.name: _encode_column(v, dataset) for v in network.variables}
    cpts = {}
    for v in network.variables:
        parent_vars = [network.variable(p) for p in network.parents[v.name]]
        counts = family_counts(v, parent_vars, columns).astype(float)
        totals = counts.sum(axis=1, keepdims=True)
        if a > 0:
            table = (counts + a) / (totals + a * v.cardinality)
        else:
            with np.errstate(invalid="ignore"):
                table = counts / totals
            table[np.isnan(table)] = 1.0 / v.cardinality
        cpts[v.name] = table
    return Network(network.variables, network.parents, cpts, a)


# -- inference --------------------------------------------------------------


def joint_probability(network: Network, assignment: Assignment) -> float:
    """Probability of one full configuration: the product of CPT lookups."""
    missing = [v.name for v in network.variables if v.name not in assignment]
    if missing:
        raise ValueError(f"assignment is partial, missing {missing}")
    p = 1.0
    for v in network.variables:
        p *= network.prob(v.name, assignment)
    return p


def _relevant_variables(
    network: Network, targets: Iterable[str]
) -> list[str]:
    """Targets plus all their ancestors, in network declaration order.

    Variables outside this set are barren for the query: summing them out
    contributes a factor of exactly one, so enumeration can skip them.
    """
    needed: set[str] = set()
    stack = list(targets)
    while stack:
        name = stack.pop()
        if name in needed:
            continue
        needed.add(name)
        stack.extend(network.parents[name])
    return [v.name for v in network.variables if v.name in needed]


def marginal(
    network: Network,
    query_variables: Sequence[str],
    evidence: Assignment | None = None,
) -> dict[tuple[str, ...], float]:
    """Exact conditional distribution over joint query values.

    Enumerates every configuration of the non-barren unbound variables.
    If the evidence has probability zero the result is the designated
    all-zero table rather than an error, so callers can detect impossible
    inputs.
    """
    evidence = dict(evidence or {})
    query = list(query_variables)
    if not query:
        raise ValueError("query must name at least one variable")
    overlap = set(query) & set(evidence)
    if overlap:
        raise ValueError(f"query and evidence overlap on {sorted(overlap)}")
    for name in query:
        network.variable(name)
    for name, value in evidence.items():
        network.variable(name).index_of(value)

    relevant = _relevant_variables(network, list(query) + list(evidence))
    hidden = [n for n in relevant if n not in evidence and n not in query]
    query_vars = [network.variable(n) for n in query]

    result: dict[tuple[str, ...], float] = {
        cell: 0.0 for cell in product(*(v.values for v in query_vars))
    }
    assignment = dict(evidence)
    for cell in result:
        assignment.update(zip(query, cell))
        total = 0.0
        for hvals in product(*(network.variable(h).values for h in hidden)):
            assignment.update(zip(hidden, hvals))
            p = 1.0
            for name in relevant:
                p *= network.prob(name, assignment)
                if p == 0.0:
                    break
            total += p
        result[cell] = total

    z = sum(result.values())
    if z == 0.0:
        return result
    return {cell: p / z for cell, p in result.items()}


# -- Bayesian-Dirichlet family score ----------------------------------------


def score_from_counts(counts: np.ndarray, alpha: float) -> float:
    """Log Dirichlet-multinomial marginal likelihood of a count matrix.

    Rows are parent configurations; unobserved rows contribute nothing.
    """
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    counts = np.asarray(counts, dtype=float)
    counts = counts[counts.sum(axis=1) > 0]
    if counts.size == 0:
        return 0.0
    r = counts.shape[1]
    row_totals = counts.sum(axis=1)
    score = np.sum(gammaln(r * alpha) - gammaln(r * alpha + row_totals))
    score += np.sum(gammaln(alpha + counts) - gammaln(alpha))
    return float(score)


def family_log_score(
    variable: Variable,
    parent_set: Sequence[Variable],
    dataset: Sequence[Assignment],
    alpha: float = 1.0,
) -> float:
    """Log marginal likelihood of `variable`'s column given its parents.

    Decomposable: depends only on the family's counts, so structure search
    can score candidate parent sets independently per node.
    """
    names = [variable] + list(parent_set)
    columns = {v.name: _encode_column(v, dataset) for v in names}
    return score_from_counts(family_counts(variable, parent_set, columns), alpha)


# -- model file -------------------------------------------------------------


def _fmt_float(x: float) -> str:
    # 17 significant digits: enough to reproduce any double exactly, so
    # save -> load -> save is byte-identical.
    return format(float(x), ".17g")


def network_to_json(network: Network) -> str:
    out: list[str] = ["{"]
    out.append('  "variables": [')
    for i, v in enumerate(network.variables):
        comma = "," if i < len(network.variables) - 1 else ""
        out.append(
            f'    {{"name": {json.dumps(v.name)}, "kind": {json.dumps(v.kind)}, '
            f'"values": {json.dumps(list(v.values))}}}{comma}'
        )
    out.append("  ],")
    out.append('  "parents": {')
    for i, v in enumerate(network.variables):
        comma = "," if i < len(network.variables) - 1 else ""
        out.append(
            f"    {json.dumps(v.name)}: {json.dumps(list(network.parents[v.name]))}{comma}"
        )
    out.append("  },")
    out.append('  "cpts": {')
    for i, v in enumerate(network.variables):
        comma = "," if i < len(network.variables) - 1 else ""
        rows = []
        for row in network.cpts[v.name]:
            rows.append("[" + ", ".join(_fmt_float(x) for x in row) + "]")
        out.append(f"    {json.dumps(v.name)}: [" + ", ".join(rows) + f"]{comma}")
    out.append("  },")
    out.append(f'  "pseudocount": {_fmt_float(network.pseudocount)}')
    out.append("}")
    return "\n".join(out) + "\n"


def network_from_json(text: str) -> Network:
    obj = json.loads(text)
    variables = [
        Variable(d["name"], tuple(d["values"]), d["kind"]) for d in obj["variables"]
    ]
    parents = {name: tuple(ps) for name, ps in obj["parents"].items()}
    cpts = {name: np.asarray(rows, dtype=float) for name, rows in obj["cpts"].items()}
    return Network(variables, parents, cpts, float(obj["pseudocount"]))


def save_network(network: Network, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(network_to_json(network))


def load_network(path) -> Network:
    with open(path, encoding="utf-8") as fh:
        return network_from_json(fh.read())
