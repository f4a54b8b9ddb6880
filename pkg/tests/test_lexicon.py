import numpy as np
import pytest

from lexalign.lib.errors import ConfigError, DataError, DictionaryLineError
from lexalign.lib.lexicon import (
    SeedLexicon,
    parse_dictionary,
    split_lexicon,
    write_dictionary,
)
from tests.toy_data import table


def _tables():
    return table("s", np.eye(4)), table("t", np.eye(4))


def test_parse_dictionary_counts_skips(tmp_path):
    src, tgt = _tables()
    path = tmp_path / "d.txt"
    path.write_text("s0 t1\ns0 t2\nsX t0\ns1 t3\ns0 t1\n\n", encoding="utf-8")

    lexicon, report = parse_dictionary(path, src, tgt)

    assert lexicon.pairs == ((0, 1), (0, 2), (1, 3))
    assert lexicon.source_gold[0] == frozenset({1, 2})
    assert report.as_lines() == ["kept=3", "skipped_oov=1", "skipped_dup=1"]


def test_parse_dictionary_rejects_malformed_lines(tmp_path):
    src, tgt = _tables()
    path = tmp_path / "d.txt"
    path.write_text("s0 t1\ns1 t2 extra\n", encoding="utf-8")

    with pytest.raises(DictionaryLineError) as info:
        parse_dictionary(path, src, tgt)

    assert info.value.line_number == 2
    with pytest.raises(DataError):
        parse_dictionary(tmp_path / "missing.txt", src, tgt)


def test_dictionary_round_trip(tmp_path):
    src, tgt = _tables()
    lexicon = SeedLexicon(((2, 1), (0, 3), (0, 0)))

    write_dictionary(lexicon, src, tgt, tmp_path / "d.txt")
    parsed, _ = parse_dictionary(tmp_path / "d.txt", src, tgt)

    assert parsed == lexicon


def test_seed_lexicon_set_operations():
    lexicon = SeedLexicon.from_pairs([(3, 1), (0, 2), (3, 1), (3, 0)])

    assert lexicon.pairs == ((3, 1), (0, 2), (3, 0))
    assert lexicon.sources == [3, 0]
    assert lexicon.union([(0, 2), (5, 5)]).pairs == ((3, 1), (0, 2), (3, 0), (5, 5))
    assert lexicon.restrict_sources([3]).pairs == ((3, 1), (3, 0))
    assert not SeedLexicon(())
    with pytest.raises(DataError):
        SeedLexicon(((1, 1), (1, 1)))
    with pytest.raises(DataError):
        lexicon.check_bounds(4, 2)


def test_split_holds_out_whole_source_words():
    lexicon = SeedLexicon(((0, 0), (0, 1), (1, 1), (2, 2), (3, 3)))

    split = split_lexicon(lexicon, 0.5, seed=7)

    assert len(split.validation.sources) == 2
    assert set(split.train.sources).isdisjoint(split.validation.sources)
    assert len(split.train) + len(split.validation) == len(lexicon)
    for source in split.validation.sources:
        assert split.validation.source_gold[source] == lexicon.source_gold[source]


def test_split_is_deterministic_and_can_be_empty():
    lexicon = SeedLexicon(tuple((i, i) for i in range(20)))

    assert split_lexicon(lexicon, 0.1, 4) == split_lexicon(lexicon, 0.1, 4)
    assert not split_lexicon(lexicon, 0.0, 4).validation
    with pytest.raises(ConfigError):
        split_lexicon(SeedLexicon(((0, 0),)), 0.9, 0)
    with pytest.raises(ConfigError):
        split_lexicon(lexicon, 1.0, 0)
