"""Bag-of-words utterances and their likelihood under a fitted network.

An utterance is reduced to the set of distinct lowercase words; order,
repetition, and grammar are discarded. The likelihood of a description
given a world state is the product of the per-word presence probabilities
for exactly the words in the bag.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

from .network import ABSENT, PRESENT, Assignment, Network

logger = logging.getLogger(__name__)

BagOfWords = frozenset[str]

_TERMINAL_PUNCTUATION = ".,!?;:"


def bag_of_words(token_sequence: str | Iterable[str]) -> BagOfWords:
    """Lowercased, deduplicated, order-free word set.

    Accepts either a raw sentence (split on whitespace, terminal punctuation
    stripped) or an iterable of tokens.
    """
    if isinstance(token_sequence, str):
        tokens = token_sequence.split()
    else:
        tokens = list(token_sequence)
    words = set()
    for tok in tokens:
        word = tok.lower().rstrip(_TERMINAL_PUNCTUATION)
        if word:
            words.add(word)
    return frozenset(words)


@dataclass(frozen=True)
class Experience:
    """One trial: the full symbolic state plus the words heard during it."""

    state: dict[str, str]
    description: BagOfWords


def word_likelihood(network: Network, word: str, state: Assignment) -> float:
    """p(word present | state), a CPT lookup on the word's parents."""
    variable = network.variable(word)
    if variable.kind != "word":
        raise ValueError(f"{word!r} is not a word variable")
    row = network.cpt_row(word, state)
    return float(row[variable.values.index(PRESENT)])


def description_likelihood(
    network: Network,
    bag: Iterable[str],
    state: Assignment,
    include_absent_words: bool = False,
) -> float:
    """Probability of a word bag given a full affordance state.

    Multiplies presence probabilities over the words in the bag only; words
    the network never learned are skipped with a warning rather than raised,
    since instructions may contain words outside the training vocabulary.
    With `include_absent_words` the remaining vocabulary contributes its
    absence probabilities too (off by default).
    """
    bag = frozenset(bag)
    known = network.word_names()
    unknown = sorted(w for w in bag if w not in network)
    if unknown:
        logger.warning("skipping unknown words: %s", ", ".join(unknown))
    p = 1.0
    for word in bag:
        if word in unknown:
            continue
        p *= word_likelihood(network, word, state)
    if include_absent_words:
        for word in known:
            if word not in bag:
                variable = network.variable(word)
                row = network.cpt_row(word, state)
                p *= float(row[variable.values.index(ABSENT)])
    return p


# -- experience dataset file -------------------------------------------------
#
# One record per line:
#   action|color,size,shape|objvel,handvel,objhandvel,contact|w1 w2 ...

_STATE_FIELDS = (
    ("Action",),
    ("Color", "Size", "Shape"),
    ("ObjVel", "HandVel", "ObjHandVel", "Contact"),
)


def format_experience(experience: Experience) -> str:
    state = experience.state
    parts = [",".join(state[name] for name in group) for group in _STATE_FIELDS]
    parts.append(" ".join(sorted(experience.description)))
    return "|".join(parts)


def parse_experience(line: str, lineno: int | None = None) -> Experience:
    where = f" at line {lineno}" if lineno is not None else ""
    fields = line.rstrip("\n").split("|")
    if len(fields) != 4:
        raise ValueError(f"malformed experience record{where}: expected 4 '|' fields")
    state: dict[str, str] = {}
    for group, field in zip(_STATE_FIELDS, fields):
        values = field.split(",") if field else []
        if len(values) != len(group):
            raise ValueError(
                f"malformed experience record{where}: "
                f"expected {len(group)} values in {field!r}"
            )
        state.update(zip(group, values))
    return Experience(state=state, description=bag_of_words(fields[3].split()))


def save_corpus(experiences: Sequence[Experience], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for exp in experiences:
            fh.write(format_experience(exp) + "\n")


def load_corpus(path) -> list[Experience]:
    experiences = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            experiences.append(parse_experience(line, lineno))
    return experiences


def corpus_vocabulary(experiences: Iterable[Experience]) -> list[str]:
    words: set[str] = set()
    for exp in experiences:
        words.update(exp.description)
    return sorted(words)
