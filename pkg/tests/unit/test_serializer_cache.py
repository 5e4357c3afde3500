"""Unit tests for JSON documents and the on-disk series cache."""

import json

import pytest

from src.errors import ConfigurationError
from src.ifunction import big_I, small_I
from src.mirror import birkhoff
from src.output_serializer import OutputSerializer
from src.series_cache import SeriesCache
from src.target import projective_target


@pytest.fixture
def serializer():
    return OutputSerializer()


@pytest.fixture(scope="module")
def p2():
    return projective_target(2)


class TestSeriesDocuments:

    def test_small_I_layout(self, serializer, p2):
        document = serializer.series_to_document(small_I(p2, 2).series, p2)
        degree_one = document["terms"]["1"][""]
        assert degree_one["-3"] == {"1": "1"}
        assert degree_one["-4"] == {"H": "-3"}
        assert degree_one["-5"] == {"H^2": "6"}
        assert document["truncation"] == {"D": "2", "T": 0}
        assert document["variables"] == []
        assert document["target_hash"] == p2.spec_hash()

    def test_big_I_keys(self, serializer, p2):
        document = serializer.series_to_document(big_I(p2, 0, 1).series, p2)
        assert document["variables"] == ["1", "H", "H^2"]
        assert document["terms"]["0"]["0,1,0"] == {"-1": {"H": "1"}}

    def test_series_reloads(self, serializer, p2):
        series = big_I(p2, 1, 1, insertions=(2,)).series
        text = serializer.dumps(serializer.series_to_document(series, p2))
        restored = serializer.series_from_document(serializer.loads(text), p2)
        assert restored.equals(series)

    def test_foreign_document_rejected(self, serializer, p2):
        document = serializer.series_to_document(small_I(p2, 1).series, p2)
        with pytest.raises(ConfigurationError):
            serializer.series_from_document(document, projective_target(1))

    def test_bad_json(self, serializer):
        with pytest.raises(ConfigurationError):
            serializer.loads("{oops")

    def test_dumps_is_canonical(self, serializer):
        assert serializer.dumps({"b": 1, "a": 2}) == serializer.dumps({"a": 2, "b": 1})


class TestMirrorDocuments:

    def test_untwisted_has_no_ambient(self, serializer, p2):
        document = serializer.mirror_to_document(birkhoff(small_I(p2, 1)))
        assert "ambient_J" not in document
        assert document["flat"] is False

    def test_twisted_keeps_ambient(self, serializer):
        quintic = projective_target(4, twist=[5])
        out = birkhoff(small_I(quintic, 1))
        document = serializer.mirror_to_document(out)
        assert document["J"]["terms"]["1"][""]["-2"] == {"H^3": "2875"}
        assert document["ambient_J"]["terms"]["1"][""]["-2"] == {"H^2": "575"}
        restored = serializer.mirror_from_document(json.loads(serializer.dumps(document)), quintic)
        assert restored.J.equals(out.J)
        assert restored.ambient_J.equals(out.ambient_J)
        assert [s.to_dict() for s in restored.factor_log] == [s.to_dict() for s in out.factor_log]


class TestSeriesCache:

    def test_miss_then_hit(self, tmp_path, p2):
        cache = SeriesCache(tmp_path / "cache")
        key = cache.key(p2, "ifun-small", 2, 0)
        assert cache.get(key) is None
        path = cache.put(key, "{}")
        assert path.exists()
        assert cache.get(key) == "{}"

    def test_key_covers_inputs(self, tmp_path, p2):
        cache = SeriesCache(tmp_path)
        base = cache.key(p2, "mirror", 2, 2, (0, 1, 2))
        assert base == cache.key(p2, "mirror", 2, 2, (0, 1, 2))
        assert base != cache.key(p2, "mirror", 3, 2, (0, 1, 2))
        assert base != cache.key(p2, "mirror", 2, 1, (0, 1, 2))
        assert base != cache.key(p2, "mirror", 2, 2, (2,))
        assert base != cache.key(p2, "ifun-big", 2, 2, (0, 1, 2))
        assert base != cache.key(projective_target(3), "mirror", 2, 2, (0, 1, 2))
