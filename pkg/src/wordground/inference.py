"""Using the learned network: instruction following, impossibility
detection, and N-best rescoring.

All three queries share one mechanism: enumerate every configuration of the
non-word variables, weight each by the state model and by the presence
probability of every word in the utterance, and aggregate. Words whose
parents include effect variables are handled automatically, because effects
are part of the enumerated space and are summed out under the state model.

Impossibility is a result state, not an error: a query whose every
configuration has probability zero returns an all-zero result.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .grounding import bag_of_words
from .network import PRESENT, Network

logger = logging.getLogger(__name__)

# Preferred cell-tuple order for the default domain; matches the
# `action,color,size,shape` order used by the scene and instruction files.
CANONICAL_CELL_ORDER = ("Action", "Color", "Size", "Shape")


def default_cells(network: Network) -> tuple[str, ...]:
    """Action and feature variables of the network, in file order when the
    network uses the default domain."""
    present = [
        v.name for v in network.variables if v.kind in ("action", "feature")
    ]
    ordered = [n for n in CANONICAL_CELL_ORDER if n in present]
    ordered.extend(n for n in present if n not in ordered)
    return tuple(ordered)


@dataclass(frozen=True)
class SceneObject:
    """An object in the robot's field of view, named by its feature values."""

    id: str
    features: dict[str, str]


@dataclass(frozen=True)
class NBestList:
    """Recognizer output: hypotheses with positive acoustic probabilities."""

    hypotheses: tuple[tuple[tuple[str, ...], float], ...]

    def __post_init__(self) -> None:
        if not self.hypotheses:
            raise ValueError("N-best list must be nonempty")
        for tokens, p in self.hypotheses:
            if p <= 0:
                raise ValueError(f"acoustic probability must be positive, got {p}")


@dataclass(frozen=True)
class ActionObjectRanking:
    """Full (action, object) posterior grid, best first."""

    entries: tuple[tuple[str, str, float], ...]
    impossible: bool

    @property
    def best(self) -> tuple[str, str, float]:
        return self.entries[0]


class StateTable:
    """Dense view of the network's non-word block.

    Rows are the full cartesian product of the affordance variables; the
    table carries the joint probability of each row and can project any
    word's presence probability onto the rows. Built once per network and
    reused across queries.
    """

    def __init__(self, network: Network):
        self.network = network
        self.variables = [network.variable(n) for n in network.affordance_names()]
        self.names = [v.name for v in self.variables]
        self.shape = tuple(v.cardinality for v in self.variables)
        self.n_states = int(np.prod(self.shape))
        grids = np.indices(self.shape).reshape(len(self.shape), -1)
        self.columns = {v.name: grids[i] for i, v in enumerate(self.variables)}
        self.p_x = np.ones(self.n_states)
        for v in self.variables:
            rows = self._config_codes(network.parents[v.name])
            self.p_x *= network.cpts[v.name][rows, self.columns[v.name]]

    def _config_codes(self, parent_names: Sequence[str]) -> np.ndarray:
        code = np.zeros(self.n_states, dtype=np.int64)
        for p in parent_names:
            code = code * self.network.variable(p).cardinality + self.columns[p]
        return code

    def word_vector(self, word: str) -> np.ndarray:
        """p(word present | state) for every row."""
        v = self.network.variable(word)
        rows = self._config_codes(self.network.parents[word])
        return self.network.cpts[word][rows, v.values.index(PRESENT)]

    def known_bag(self, bag: Iterable[str]) -> list[str]:
        words = sorted(set(bag))
        known, unknown = [], []
        for w in words:
            if w in self.network and self.network.variable(w).kind == "word":
                known.append(w)
            else:
                unknown.append(w)
        if unknown:
            logger.warning("skipping unknown words: %s", ", ".join(unknown))
        return known

    def bag_mass(self, bag: Iterable[str]) -> np.ndarray:
        """Unnormalized joint of state and all bag words present."""
        mass = self.p_x.copy()
        for word in self.known_bag(bag):
            mass *= self.word_vector(word)
        return mass

    def project(self, vec: np.ndarray, cells: Sequence[str]) -> np.ndarray:
        """Sum a state-indexed vector onto the cell variables, in cell order."""
        axes_keep = [self.names.index(c) for c in cells]
        other = tuple(i for i in range(len(self.names)) if i not in axes_keep)
        t = vec.reshape(self.shape)
        if other:
            t = t.sum(axis=other)
        kept_sorted = sorted(axes_keep)
        return t.transpose([kept_sorted.index(a) for a in axes_keep])

    def cell_posterior(
        self, bag: Iterable[str], cells: Sequence[str]
    ) -> np.ndarray:
        """Posterior over the given cell variables; all-zero if impossible."""
        table = self.project(self.bag_mass(bag), cells)
        total = table.sum()
        if total > 0:
            table = table / total
        return table

    def conditional_word_scores(
        self, bag: Iterable[str], cells: Sequence[str]
    ) -> tuple[np.ndarray, np.ndarray]:
        """Per-cell p(bag | cell) with the remaining variables summed out
        under the state model, plus the per-cell prior mass.

        Cells whose prior mass is zero score zero.
        """
        joint_cells = self.project(self.bag_mass(bag), cells)
        prior_cells = self.project(self.p_x, cells)
        with np.errstate(invalid="ignore", divide="ignore"):
            scores = np.where(prior_cells > 0, joint_cells / prior_cells, 0.0)
        return scores, prior_cells


def predict_compatible_set(
    network: Network,
    bag: Iterable[str],
    cells: Sequence[str] | None = None,
) -> dict[tuple[str, ...], float]:
    """Joint posterior over action and object-feature cells given the bag.

    Normalized when any cell has mass; the all-zero table marks an
    impossible request.
    """
    table = StateTable(network)
    cells = tuple(cells) if cells is not None else default_cells(network)
    posterior = table.cell_posterior(bag, cells)
    cell_vars = [network.variable(c) for c in cells]
    out: dict[tuple[str, ...], float] = {}
    for idx in np.ndindex(posterior.shape):
        key = tuple(v.values[i] for v, i in zip(cell_vars, idx))
        out[key] = float(posterior[idx])
    return out


def _object_cell_index(
    table: StateTable, cells: Sequence[str], action: str, obj: SceneObject
) -> tuple[int, ...]:
    idx = []
    for name in cells:
        v = table.network.variable(name)
        if v.kind == "action":
            idx.append(v.index_of(action))
        else:
            if name not in obj.features:
                raise ValueError(f"scene object {obj.id!r} does not bind {name!r}")
            idx.append(v.index_of(obj.features[name]))
    return tuple(idx)


def select_action_object(
    network: Network,
    bag: Iterable[str],
    scene: Sequence[SceneObject],
) -> ActionObjectRanking:
    """Best (action, object) pair for an instruction, with the full grid.

    Scores every pair by the probability of the words given the action and
    the object's features (effects summed out under the state model), under
    a non-informative prior over the grid. Ties break deterministically by
    action order then object order.
    """
    if not scene:
        raise ValueError("scene must contain at least one object")
    table = StateTable(network)
    cells = default_cells(network)
    scores, _ = table.conditional_word_scores(bag, cells)
    action_var = next(v for v in table.variables if v.kind == "action")

    raw: list[tuple[str, str, float]] = []
    for action in action_var.values:
        for obj in scene:
            idx = _object_cell_index(table, cells, action, obj)
            raw.append((action, obj.id, float(scores[idx])))
    total = sum(s for _, _, s in raw)
    if total > 0:
        raw = [(a, o, s / total) for a, o, s in raw]
    order = {
        (a, o): i
        for i, (a, o) in enumerate(
            (a, obj.id) for a in action_var.values for obj in scene
        )
    }
    entries = sorted(raw, key=lambda e: (-e[2], order[(e[0], e[1])]))
    return ActionObjectRanking(entries=tuple(entries), impossible=total == 0.0)


@dataclass(frozen=True)
class RescoredHypothesis:
    tokens: tuple[str, ...]
    acoustic_probability: float
    object_scores: dict[str, float]
    final_score: float


def rescore_nbest(
    network: Network,
    nbest: NBestList,
    scene: Sequence[SceneObject],
    action_aggregate: str = "max",
) -> list[RescoredHypothesis]:
    """Re-rank recognizer hypotheses by context.

    Each hypothesis scores, per scene object, the probability of its words
    given the object (effects summed out, actions aggregated by `max` by
    default, or `sum`); the final score is the acoustic probability times
    the sum of the per-object scores. Sorted best first; uniform scaling of
    the acoustic probabilities cannot change the order.
    """
    if not scene:
        raise ValueError("scene must contain at least one object")
    if action_aggregate not in ("max", "sum"):
        raise ValueError("action_aggregate must be 'max' or 'sum'")
    table = StateTable(network)
    cells = default_cells(network)
    action_var = next(v for v in table.variables if v.kind == "action")

    results = []
    for tokens, acoustic in nbest.hypotheses:
        bag = bag_of_words(tokens)
        scores, _ = table.conditional_word_scores(bag, cells)
        per_object: dict[str, float] = {}
        for obj in scene:
            by_action = [
                float(scores[_object_cell_index(table, cells, a, obj)])
                for a in action_var.values
            ]
            per_object[obj.id] = (
                max(by_action) if action_aggregate == "max" else sum(by_action)
            )
        final = acoustic * sum(per_object.values())
        results.append(
            RescoredHypothesis(
                tokens=tuple(tokens),
                acoustic_probability=acoustic,
                object_scores=per_object,
                final_score=final,
            )
        )
    results.sort(key=lambda r: -r.final_score)
    return results


# -- scene and N-best files ---------------------------------------------------

_SCENE_FIELDS = ("Color", "Size", "Shape")


def parse_scene_line(line: str, lineno: int | None = None) -> SceneObject:
    where = f" at line {lineno}" if lineno is not None else ""
    parts = line.strip().split("|")
    if len(parts) != 2:
        raise ValueError(f"malformed scene record{where}: expected 'id|color,size,shape'")
    values = parts[1].split(",")
    if len(values) != len(_SCENE_FIELDS):
        raise ValueError(f"malformed scene record{where}: expected 3 feature values")
    return SceneObject(id=parts[0], features=dict(zip(_SCENE_FIELDS, values)))


def load_scene(path) -> list[SceneObject]:
    scene = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                scene.append(parse_scene_line(line, lineno))
    return scene


def parse_nbest_line(line: str, lineno: int | None = None) -> tuple[tuple[str, ...], float]:
    where = f" at line {lineno}" if lineno is not None else ""
    parts = line.strip().split("|")
    if len(parts) != 2:
        raise ValueError(f"malformed N-best record{where}: expected 'probability|tokens'")
    try:
        p = float(parts[0])
    except ValueError:
        raise ValueError(f"malformed N-best record{where}: bad probability {parts[0]!r}") from None
    return tuple(parts[1].split()), p


def load_nbest(path) -> NBestList:
    hyps = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if line.strip():
                hyps.append(parse_nbest_line(line, lineno))
    return NBestList(hypotheses=tuple(hyps))


def table_scene() -> list[SceneObject]:
    """The six-object demonstration scene used throughout the docs.

    Also shipped as ``data/scene.txt`` for the command line.
    """
    rows = [
        ("lightgreen big sphere", "lightgreen", "big", "sphere"),
        ("yellow medium sphere", "yellow", "medium", "sphere"),
        ("darkgreen small box", "darkgreen", "small", "box"),
        ("blue medium box", "blue", "medium", "box"),
        ("blue big box", "blue", "big", "box"),
        ("darkgreen small sphere", "darkgreen", "small", "sphere"),
    ]
    return [
        SceneObject(id=name, features={"Color": c, "Size": s, "Shape": sh})
        for name, c, s, sh in rows
    ]
