import json

import numpy as np
import pytest

from hypcontract import DiscLogExtremal, DiscPoissonData, HerglotzMix, ImMobius, LinearIm, PoissonAtom
from hypcontract.corpus import (CorpusSpecError, build, default_corpus, default_descriptors, dumps, loads,
                                parse_inline)


def corpus(seed):
    return default_corpus(np.random.Generator(np.random.PCG64(seed)))


def test_default_corpus_composition():
    entries = corpus(1)
    kinds = [type(m) for _, m in entries]
    assert kinds.count(LinearIm) == 1
    assert kinds.count(PoissonAtom) == 3
    assert kinds.count(ImMobius) == 2
    mixes = [m for _, m in entries if isinstance(m, HerglotzMix)]
    assert sum(m.ac_part is None for m in mixes) >= 2
    assert sum(m.ac_part is not None for m in mixes) >= 1
    assert kinds.count(DiscLogExtremal) >= 2 and kinds.count(DiscPoissonData) == 1
    assert sum(k not in (DiscLogExtremal, DiscPoissonData) for k in kinds) >= 10


def test_seed_changes_parameters_not_names():
    a, b = corpus(1), corpus(2)
    assert [n for n, _ in a] == [n for n, _ in b]
    assert dumps(a) != dumps(b)
    assert dumps(corpus(1)) == dumps(a)


def test_round_trip_is_exact():
    entries = corpus(3)
    text = dumps(entries)
    back = loads(text)
    assert dumps(back) == text
    assert [m for _, m in back] == [m for _, m in entries]
    # one JSON document per line with full precision floats
    first = json.loads(text.splitlines()[0])
    assert first["name"] == "linear" and isinstance(first["k"], float)


def test_rejection_names_the_entry():
    with pytest.raises(CorpusSpecError, match="'bad_atom'"):
        build([{"name": "bad_atom", "type": "PoissonAtom", "k": -1, "t": 0}])
    with pytest.raises(CorpusSpecError, match="unknown model type"):
        build([{"name": "x", "type": "Nope"}])
    with pytest.raises(CorpusSpecError, match="missing field"):
        build([{"name": "m", "type": "ImMobius"}])
    with pytest.raises(CorpusSpecError, match="unique"):
        build([{"name": "a", "type": "LinearIm"}, {"name": "a", "type": "LinearIm"}])


@pytest.mark.parametrize("text,expected", [
    ("PoissonAtom{2, 1.5}", {"type": "PoissonAtom", "k": 2.0, "t": 1.5}),
    ("PoissonAtom{k=2,t=1.5}", {"type": "PoissonAtom", "k": 2.0, "t": 1.5}),
    ("LinearIm{1}", {"type": "LinearIm", "k": 1.0}),
    ('{"type": "LinearIm", "k": 3}', {"type": "LinearIm", "k": 3}),
])
def test_parse_inline(text, expected):
    assert parse_inline(text) == expected


@pytest.mark.parametrize("text", ["PoissonAtom", "LinearIm{k=abc}", "LinearIm{1, 2}", "{not json"])
def test_parse_inline_errors(text):
    with pytest.raises(CorpusSpecError):
        parse_inline(text)


def test_descriptors_are_plain_data():
    json.dumps(default_descriptors(np.random.Generator(np.random.PCG64(0))))
