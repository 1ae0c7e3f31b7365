"""Quantitative evaluation against a judged instruction set.

Soft accuracy is the posterior mass a model assigns to the (action,
features) cells judged compatible with an instruction; hard accuracy is the
fraction of instructions whose single best cell is judged compatible.
Impossible requests are scored separately as a detection rate and never
enter the soft/hard averages.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Sequence

import numpy as np

from .grounding import BagOfWords, Experience, bag_of_words, corpus_vocabulary
from .inference import StateTable, default_cells
from .network import (
    Network,
    affordance_variables,
    encode_columns,
    family_counts,
    fit_cpts,
    make_network,
    score_from_counts,
    word_variable,
)
from .structure import K2Config, train_model

Cell = tuple[str, str, str, str]  # (action, color, size, shape)

DEFAULT_SIZES = (100, 300, 500, 700, 900, 1100, 1270)


@dataclass(frozen=True)
class Instruction:
    """A word bag plus the judged set of compatible outcome cells.

    An empty compatible set marks a request judged impossible.
    """

    bag: BagOfWords
    compatible: frozenset[Cell]
    text: str = ""

    @property
    def impossible(self) -> bool:
        return not self.compatible


@dataclass(frozen=True)
class CurvePoint:
    train_size: int
    repetitions: tuple[tuple[float, float], ...]  # (soft, hard) per repetition

    def median_soft(self) -> float:
        return float(np.median([s for s, _ in self.repetitions]))

    def median_hard(self) -> float:
        return float(np.median([h for _, h in self.repetitions]))


@dataclass(frozen=True)
class EvalResult:
    soft: float
    hard: float
    detection_rate: float | None  # None when the set has no impossible requests
    n_scored: int
    n_impossible: int


# -- scoring -------------------------------------------------------------------


def _cell_arrays(network: Network):
    cells = default_cells(network)
    cell_vars = [network.variable(c) for c in cells]
    return cells, cell_vars


def soft_accuracy(network: Network, instruction: Instruction) -> float:
    """Posterior mass on the instruction's compatible cells."""
    table = StateTable(network)
    cells, cell_vars = _cell_arrays(network)
    post = table.cell_posterior(instruction.bag, cells)
    total = 0.0
    for cell in instruction.compatible:
        idx = tuple(v.index_of(value) for v, value in zip(cell_vars, cell))
        total += float(post[idx])
    return total


def _argmax_cell(post: np.ndarray, cell_vars) -> Cell:
    # np.argmax returns the first maximum in row-major order, which makes
    # the tie-break deterministic: earlier values of earlier variables win.
    flat = int(np.argmax(post))
    idx = np.unravel_index(flat, post.shape)
    return tuple(v.values[i] for v, i in zip(cell_vars, idx))


def hard_accuracy(network: Network, instruction_set: Sequence[Instruction]) -> float:
    """Fraction of instructions whose best predicted cell is judged right.

    Impossible requests are skipped; the remaining set must be nonempty.
    """
    table = StateTable(network)
    cells, cell_vars = _cell_arrays(network)
    hits = 0
    n = 0
    for ins in instruction_set:
        if ins.impossible:
            continue
        post = table.cell_posterior(ins.bag, cells)
        if _argmax_cell(post, cell_vars) in ins.compatible:
            hits += 1
        n += 1
    if n == 0:
        raise ValueError("instruction set has no possible instructions to score")
    return hits / n


def evaluate_instructions(
    network: Network, instructions: Sequence[Instruction]
) -> EvalResult:
    """Soft and hard accuracy plus impossible-request detection rate."""
    table = StateTable(network)
    cells, cell_vars = _cell_arrays(network)
    softs: list[float] = []
    hards: list[float] = []
    detected = 0
    n_impossible = 0
    for ins in instructions:
        post = table.cell_posterior(ins.bag, cells)
        if ins.impossible:
            n_impossible += 1
            if float(post.sum()) == 0.0:
                detected += 1
            continue
        s = 0.0
        for cell in ins.compatible:
            idx = tuple(v.index_of(value) for v, value in zip(cell_vars, cell))
            s += float(post[idx])
        softs.append(s)
        hards.append(1.0 if _argmax_cell(post, cell_vars) in ins.compatible else 0.0)
    if not softs:
        raise ValueError("instruction set has no possible instructions to score")
    return EvalResult(
        soft=float(np.mean(softs)),
        hard=float(np.mean(hards)),
        detection_rate=(detected / n_impossible) if n_impossible else None,
        n_scored=len(softs),
        n_impossible=n_impossible,
    )


# -- one-parent baseline ---------------------------------------------------------


def build_baseline_network(
    dataset: Sequence[Experience],
    vocabulary: Sequence[str] | None = None,
    pseudocount: float = 1.0,
    alpha: float = 1.0,
) -> Network:
    """Reference model without affordance structure.

    Every affordance node is parentless and every word gets exactly one
    affordance parent, the single best by family score, even when no parent
    would have scored better.
    """
    variables = affordance_variables()
    aff = make_network(variables, {v.name: () for v in variables})
    states = [e.state for e in dataset]
    aff = fit_cpts(aff, states, pseudocount)

    vocab = sorted(set(vocabulary if vocabulary is not None else corpus_vocabulary(dataset)))
    columns = encode_columns(list(variables), states)
    word_vars = []
    word_parents = {}
    word_cpts = {}
    for word in vocab:
        wvar = word_variable(word)
        presence = np.fromiter(
            (1 if word in e.description else 0 for e in dataset),
            dtype=np.int64,
            count=len(dataset),
        )
        columns[word] = presence
        best_parent = None
        best_score = -np.inf
        for cand in variables:
            s = score_from_counts(family_counts(wvar, [cand], columns), alpha)
            if s > best_score:
                best_parent, best_score = cand, s
        counts = family_counts(wvar, [best_parent], columns).astype(float)
        totals = counts.sum(axis=1, keepdims=True)
        if pseudocount > 0:
            table = (counts + pseudocount) / (totals + pseudocount * 2)
        else:
            with np.errstate(invalid="ignore"):
                table = counts / totals
            table[np.isnan(table)] = 0.5
        word_vars.append(wvar)
        word_parents[word] = (best_parent.name,)
        word_cpts[word] = table
        del columns[word]
    return aff.with_word_layer(word_vars, word_parents, word_cpts)


# -- staged learning ---------------------------------------------------------------


def staged_learning(
    corpus: Sequence[Experience],
    instructions: Sequence[Instruction],
    sizes: Sequence[int] = DEFAULT_SIZES,
    repetitions: int = 50,
    seed: int = 0,
    pseudocount: float = 1.0,
    config: K2Config = K2Config(),
) -> list[CurvePoint]:
    """Learning curve over random training subsets.

    At the full corpus size there is only one possible subset, so exactly
    one repetition runs and the point has zero variance by construction.
    """
    points = []
    for size in sizes:
        if size > len(corpus):
            raise ValueError(f"training size {size} exceeds corpus size {len(corpus)}")
        reps = 1 if size == len(corpus) else repetitions
        scores = []
        for rep in range(reps):
            if size == len(corpus):
                subset = list(corpus)
            else:
                rng = np.random.default_rng(
                    np.random.SeedSequence(entropy=seed, spawn_key=(size, rep))
                )
                idx = rng.choice(len(corpus), size=size, replace=False)
                subset = [corpus[i] for i in idx]
            net = train_model(subset, pseudocount=pseudocount, config=config)
            result = evaluate_instructions(net, instructions)
            scores.append((result.soft, result.hard))
        points.append(CurvePoint(train_size=size, repetitions=tuple(scores)))
    return points


def curve_to_csv(points: Sequence[CurvePoint]) -> str:
    lines = ["size,repetition,soft,hard"]
    for point in points:
        for rep, (soft, hard) in enumerate(point.repetitions):
            lines.append(
                f"{point.train_size},{rep},{format(soft, '.17g')},{format(hard, '.17g')}"
            )
    return "\n".join(lines) + "\n"


# -- instruction file -----------------------------------------------------------
#
# One instruction per line:
#   w1 w2 ...|action,color,size,shape;action,color,size,shape;...
# with `*` wildcards expanding to every value, or `IMPOSSIBLE` for an empty
# compatible set. `#` starts a comment line.


def _cell_domains() -> list[tuple[str, tuple[str, ...]]]:
    by_name = {v.name: v for v in affordance_variables()}
    return [(n, by_name[n].values) for n in ("Action", "Color", "Size", "Shape")]


def parse_instruction_line(line: str, lineno: int | None = None) -> Instruction:
    where = f" at line {lineno}" if lineno is not None else ""
    parts = line.rstrip("\n").split("|")
    if len(parts) != 2:
        raise ValueError(f"malformed instruction{where}: expected 'words|cells'")
    text = parts[0].strip()
    bag = bag_of_words(text)
    if not bag:
        raise ValueError(f"malformed instruction{where}: empty word bag")
    cells_field = parts[1].strip()
    if cells_field == "IMPOSSIBLE":
        return Instruction(bag=bag, compatible=frozenset(), text=text)
    domains = _cell_domains()
    cells: set[Cell] = set()
    for chunk in cells_field.split(";"):
        values = chunk.strip().split(",")
        if len(values) != 4:
            raise ValueError(
                f"malformed instruction{where}: cell {chunk!r} needs 4 fields"
            )
        expanded: list[tuple[str, ...]] = [()]
        for value, (name, domain) in zip(values, domains):
            options = domain if value == "*" else (value,)
            for option in options:
                if option not in domain:
                    raise ValueError(
                        f"malformed instruction{where}: {option!r} is not a {name} value"
                    )
            expanded = [prefix + (o,) for prefix in expanded for o in options]
        cells.update(expanded)  # type: ignore[arg-type]
    return Instruction(bag=bag, compatible=frozenset(cells), text=text)


def load_instructions(path) -> list[Instruction]:
    instructions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            instructions.append(parse_instruction_line(line, lineno))
    return instructions


def default_instructions() -> list[Instruction]:
    """The 54-sentence judged instruction set shipped with the package."""
    text = (
        resources.files("wordground")
        .joinpath("data/instructions.txt")
        .read_text(encoding="utf-8")
    )
    instructions = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        instructions.append(parse_instruction_line(line, lineno))
    return instructions
