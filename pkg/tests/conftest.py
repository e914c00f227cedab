import pytest

from seglit.ingest import build_lexicon


TOY_TAGSET = ("n", "v", "a", "o", "1")

TOY_ROWS = [
    ("a", "n", -1.2),
    ("b", "v", -0.7),
    ("ab", "n", -1.5),
    ("bc", "a", -0.9),
    ("abc", "n", -2.0),
    ("c", "o", -1.1),
]

TOY_TRANSITIONS = {
    ("<s>", "n"): -0.3,
    ("<s>", "v"): -1.1,
    ("n", "v"): -0.4,
    ("v", "n"): -0.6,
    ("n", "</s>"): -0.5,
    ("a", "o"): -0.2,
    ("o", "</s>"): -0.9,
}


@pytest.fixture(scope="session")
def toy_lexicon():
    return build_lexicon(TOY_ROWS, TOY_TAGSET, TOY_TRANSITIONS, trans_floor=-2.5)


@pytest.fixture(scope="session")
def uniform_lexicon():
    # no transition preferences at all: pure emission competition
    return build_lexicon(TOY_ROWS, TOY_TAGSET, {}, trans_floor=0.0)
