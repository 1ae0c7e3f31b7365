import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wordground.grounding import (
    Experience,
    bag_of_words,
    corpus_vocabulary,
    description_likelihood,
    format_experience,
    load_corpus,
    parse_experience,
    save_corpus,
    word_likelihood,
)
from wordground.network import (
    Network,
    Variable,
    fit_cpts,
    make_network,
    word_variable,
)


# -- bag of words ------------------------------------------------------------


def test_bag_merges_duplicates():
    assert bag_of_words("the ball the ball is") == {"the", "ball", "is"}


def test_bag_of_empty_string():
    assert bag_of_words("") == frozenset()


def test_bag_example_sentence():
    got = bag_of_words("Baltazar is grasping the ball but the ball is still.")
    assert got == {"baltazar", "is", "grasping", "the", "ball", "but", "still"}


def test_bag_accepts_token_iterables():
    assert bag_of_words(["The", "Ball", "ball."]) == {"the", "ball"}


def test_bag_idempotent():
    bag = bag_of_words("He taps the green square and the square is sliding.")
    assert bag_of_words(bag) == bag


@given(st.lists(st.sampled_from("the ball is rolling green he".split()), max_size=12))
def test_bag_order_and_repetition_invariant(tokens):
    assert bag_of_words(tokens) == bag_of_words(list(reversed(tokens)) + tokens)


# -- word likelihood ------------------------------------------------------------


def word_net(parents, rows, word="w"):
    """Tiny net: ternary Action root plus one word node."""
    action = Variable("Action", ("grasp", "tap", "touch"), "action")
    w = word_variable(word)
    cpts = {"Action": np.array([[1 / 3, 1 / 3, 1 / 3]]), word: np.array(rows, dtype=float)}
    return Network([action, w], {"Action": (), word: tuple(parents)}, cpts)


def test_word_likelihood_matches_laplace_frequency():
    # a parentless word present in 74 of 1270 records, alpha=1
    action = Variable("Action", ("grasp", "tap", "touch"), "action")
    w = word_variable("w")
    net = make_network([action, w], {"Action": (), "w": ()})
    records = [
        {"Action": ("grasp", "tap", "touch")[i % 3], "w": "present" if i % 17 == 0 and i // 17 < 74 else "absent"}
        for i in range(1270)
    ]
    presences = sum(1 for r in records if r["w"] == "present")
    assert presences == 74
    fitted = fit_cpts(net, records, 1.0)
    assert abs(word_likelihood(fitted, "w", {"Action": "tap"}) - 75 / 1272) < 1e-15


def test_word_likelihood_unseen_configuration_is_half():
    action = Variable("Action", ("grasp", "tap", "touch"), "action")
    w = word_variable("w")
    net = make_network([action, w], {"Action": (), "w": ("Action",)})
    records = [{"Action": "grasp", "w": "present"}] * 10
    fitted = fit_cpts(net, records, 1.0)
    assert word_likelihood(fitted, "w", {"Action": "tap"}) == 0.5


def test_word_likelihood_deterministic_indicator_approaches_one():
    action = Variable("Action", ("grasp", "tap", "touch"), "action")
    w = word_variable("w")
    net = make_network([action, w], {"Action": (), "w": ("Action",)})
    records = [{"Action": "grasp", "w": "present"}] * 40 + [
        {"Action": "tap", "w": "absent"}
    ] * 40
    ml = fit_cpts(net, records, 0.0)
    assert word_likelihood(ml, "w", {"Action": "grasp"}) == 1.0
    tiny = fit_cpts(net, records, 1e-9)
    assert word_likelihood(tiny, "w", {"Action": "grasp"}) > 1 - 1e-6


def test_word_likelihood_rejects_non_word():
    net = word_net([], [[0.5, 0.5]])
    with pytest.raises(ValueError):
        word_likelihood(net, "Action", {})


# -- description likelihood -------------------------------------------------------


def two_word_net(p, q):
    action = Variable("Action", ("grasp", "tap", "touch"), "action")
    w1, w2 = word_variable("w1"), word_variable("w2")
    cpts = {
        "Action": np.array([[1 / 3, 1 / 3, 1 / 3]]),
        "w1": np.array([[1 - p, p]]),
        "w2": np.array([[1 - q, q]]),
    }
    return Network([action, w1, w2], {"Action": (), "w1": (), "w2": ()}, cpts)


STATE = {"Action": "tap"}


def test_description_likelihood_empty_bag_is_one():
    net = two_word_net(0.3, 0.6)
    assert description_likelihood(net, [], STATE) == 1.0


def test_description_likelihood_single_word_equals_word_likelihood():
    net = two_word_net(0.3, 0.6)
    assert description_likelihood(net, ["w1"], STATE) == word_likelihood(net, "w1", STATE)


def test_description_likelihood_independent_words_multiply():
    # fitted frequencies 30/100 and 52/100 with alpha=1
    p = (30 + 1) / 102
    q = (52 + 1) / 102
    net = two_word_net(p, q)
    assert abs(description_likelihood(net, ["w1", "w2"], STATE) - p * q) < 1e-15


def test_description_likelihood_skips_unknown_words(caplog):
    net = two_word_net(0.3, 0.6)
    with caplog.at_level("WARNING"):
        got = description_likelihood(net, ["w1", "zebra"], STATE)
    assert got == word_likelihood(net, "w1", STATE)
    assert "zebra" in caplog.text


def test_description_likelihood_absent_word_flag():
    net = two_word_net(0.3, 0.6)
    got = description_likelihood(net, ["w1"], STATE, include_absent_words=True)
    assert abs(got - 0.3 * 0.4) < 1e-15


@given(st.permutations(["w1", "w2", "w1", "w2"]))
def test_description_likelihood_order_and_repetition_invariant(tokens):
    net = two_word_net(0.3, 0.6)
    assert description_likelihood(net, tokens, STATE) == description_likelihood(
        net, ["w1", "w2"], STATE
    )


def test_description_likelihood_in_unit_interval_with_smoothing():
    rng = np.random.default_rng(6)
    net = make_network(
        [Variable("Action", ("grasp", "tap", "touch"), "action"), word_variable("w1"), word_variable("w2")],
        {"Action": (), "w1": ("Action",), "w2": ()},
    )
    records = [
        {
            "Action": rng.choice(["grasp", "tap", "touch"]),
            "w1": rng.choice(["absent", "present"]),
            "w2": rng.choice(["absent", "present"]),
        }
        for _ in range(50)
    ]
    fitted = fit_cpts(net, records, 1.0)
    for action in ("grasp", "tap", "touch"):
        p = description_likelihood(fitted, ["w1", "w2"], {"Action": action})
        assert 0.0 < p <= 1.0


# -- corpus file ------------------------------------------------------------------


FULL_STATE = {
    "Action": "grasp",
    "Color": "yellow",
    "Size": "medium",
    "Shape": "sphere",
    "ObjVel": "medium",
    "HandVel": "fast",
    "ObjHandVel": "slow",
    "Contact": "long",
}


def test_experience_line_roundtrip(tmp_path):
    exp = Experience(state=dict(FULL_STATE), description=bag_of_words("the ball is rising"))
    line = format_experience(exp)
    assert line == "grasp|yellow,medium,sphere|medium,fast,slow,long|ball is rising the"
    assert parse_experience(line) == exp

    path = tmp_path / "corpus.txt"
    save_corpus([exp, exp], path)
    assert load_corpus(path) == [exp, exp]


def test_parse_experience_reports_line_numbers():
    with pytest.raises(ValueError, match="line 3"):
        parse_experience("only|two|fields", lineno=3)
    with pytest.raises(ValueError, match="expected 3 values"):
        parse_experience("grasp|yellow,medium|slow,slow,slow,short|w")


def test_corpus_vocabulary_sorted_union():
    exps = [
        Experience(state=dict(FULL_STATE), description=frozenset({"b", "a"})),
        Experience(state=dict(FULL_STATE), description=frozenset({"c", "a"})),
    ]
    assert corpus_vocabulary(exps) == ["a", "b", "c"]
