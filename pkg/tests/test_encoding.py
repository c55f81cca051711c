"""Vocabulary, sample construction, and dataset ingestion."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from statenet import encoding
from statenet.encoding import (Dataset, Vocabulary, ascii_vocab,
                               datasets_equal, export_jsonl, ingest,
                               make_sample, small_vocab, vocabulary_for)
from statenet.errors import DataError, ParseError


class TestAsciiVocab:
    def test_size_and_known_indices(self):
        v = ascii_vocab()
        assert v.size == 96
        assert v.encode_char(" ") == 0
        assert v.encode_char("A") == 33
        assert v.encode_char("~") == 94
        assert v.encode_char(chr(127)) == 95

    def test_out_of_range_maps_to_fallback(self):
        v = ascii_vocab()
        assert v.encode_char(chr(31)) == 0
        assert v.encode_char(chr(128)) == 0
        assert v.encode_char("é") == 0

    def test_encode_text_matches_per_char(self):
        v = ascii_vocab()
        text = "Hello, World! ~" + chr(127) + chr(31) + "é"
        fast = v.encode_text(text)
        assert fast.dtype == np.int16
        assert fast.tolist() == [v.encode_char(c) for c in text]

    def test_fast_path_agrees_with_dict_path(self):
        # Same character table, but without the description that enables the
        # arithmetic shortcut; both must produce identical indices.
        v_fast = ascii_vocab()
        v_dict = Vocabulary(chars=v_fast.chars, fallback_index=0,
                            description="same-chars-no-shortcut")
        text = "".join(chr(c) for c in range(0, 200)) + " plain text 123"
        assert v_fast.encode_text(text).tolist() == v_dict.encode_text(text).tolist()

    @given(st.text(max_size=60))
    @settings(max_examples=60, deadline=None)
    def test_fast_path_agrees_on_arbitrary_text(self, text):
        v_fast = ascii_vocab()
        v_dict = Vocabulary(chars=v_fast.chars, fallback_index=0,
                            description="no-shortcut")
        assert v_fast.encode_text(text).tolist() == v_dict.encode_text(text).tolist()

    def test_lowercase_folding(self):
        v = ascii_vocab(lowercase=True)
        assert v.encode_text("ABC").tolist() == v.encode_text("abc").tolist()
        assert v.encode_char("A") == v.encode_char("a")


class TestSmallVocab:
    def test_bounds(self):
        with pytest.raises(ValueError):
            small_vocab(1)
        with pytest.raises(ValueError):
            small_vocab(28)
        assert small_vocab(2).size == 2
        assert small_vocab(27).size == 27

    def test_layout(self):
        v = small_vocab(5)
        assert v.chars == (" ", "a", "b", "c", "d")
        assert v.encode_char(" ") == 0
        assert v.encode_char("d") == 4
        assert v.encode_char("z") == 0  # unmapped -> fallback

    def test_vocabulary_for(self):
        assert vocabulary_for(96).description == "ascii-32-127"
        assert vocabulary_for(8).size == 8


class TestVocabularyValidation:
    def test_duplicate_chars_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary(chars=("a", "a"), fallback_index=0)

    def test_fallback_out_of_range(self):
        with pytest.raises(ValueError):
            Vocabulary(chars=("a", "b"), fallback_index=2)


class TestMakeSample:
    def test_valid(self):
        s = make_sample(ascii_vocab(), 2, "hi", "here")
        assert s.label == 2 and s.text == "hi" and len(s) == 2

    @pytest.mark.parametrize("label", [-1, 4, "1", 1.0, True, None])
    def test_bad_label(self, label):
        with pytest.raises(DataError):
            make_sample(ascii_vocab(), label, "text", "here")

    def test_empty_text(self):
        with pytest.raises(DataError, match="empty text"):
            make_sample(ascii_vocab(), 0, "", "here")


class TestCsvIngest:
    def _write(self, tmp_path, content, name="data.csv"):
        p = tmp_path / name
        p.write_text(content, encoding="utf-8")
        return str(p)

    def test_three_column_join(self, tmp_path):
        path = self._write(tmp_path, '"3","Title here","Body text."\n')
        ds = ingest(path, "agnews-csv")
        assert len(ds) == 1
        assert ds[0].label == 2
        assert ds[0].text == "Title here Body text."

    def test_two_column_variant(self, tmp_path):
        path = self._write(tmp_path, "1,just text\n4,more text\n")
        ds = ingest(path, "agnews-csv")
        assert [s.label for s in ds] == [0, 3]
        assert ds[1].text == "more text"

    def test_extra_columns_joined(self, tmp_path):
        path = self._write(tmp_path, "2,a,b,c\n")
        ds = ingest(path, "agnews-csv")
        assert ds[0].text == "a b c"

    def test_tab_delimiter_sniffed(self, tmp_path):
        path = self._write(tmp_path, "1\ttitle\tbody, with comma\n")
        ds = ingest(path, "agnews-csv")
        assert ds[0].text == "title body, with comma"

    def test_class_out_of_range(self, tmp_path):
        path = self._write(tmp_path, "1,ok,ok\n5,bad,bad\n")
        with pytest.raises(DataError, match=":2"):
            ingest(path, "agnews-csv")

    def test_class_not_integer(self, tmp_path):
        path = self._write(tmp_path, "one,text,text\n")
        with pytest.raises(ParseError, match="not an integer"):
            ingest(path, "agnews-csv")

    def test_too_few_fields(self, tmp_path):
        path = self._write(tmp_path, "3\n")
        with pytest.raises(ParseError, match="at least 2 fields"):
            ingest(path, "agnews-csv")

    def test_empty_file(self, tmp_path):
        path = self._write(tmp_path, "")
        assert len(ingest(path, "agnews-csv")) == 0

    def test_quoted_newline_inside_field(self, tmp_path):
        path = self._write(tmp_path, '"2","line one\nline two","body"\n')
        ds = ingest(path, "agnews-csv")
        assert len(ds) == 1
        assert "line one" in ds[0].text and "line two" in ds[0].text


class TestJsonl:
    def _write(self, tmp_path, lines, name="data.jsonl"):
        p = tmp_path / name
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return str(p)

    def test_roundtrip(self, tmp_path):
        rows = [{"label": i % 4, "text": f"sample {i} with é"} for i in range(9)]
        path = self._write(tmp_path, [json.dumps(r) for r in rows])
        ds = ingest(path, "canonical-jsonl")
        out = tmp_path / "out.jsonl"
        export_jsonl(ds, str(out))
        again = ingest(str(out), "canonical-jsonl")
        assert datasets_equal(ds, again)

    def test_export_is_byte_deterministic(self, tmp_path):
        rows = [json.dumps({"label": 1, "text": "abc"}),
                json.dumps({"text": "zyx", "label": 0})]
        path = self._write(tmp_path, rows)
        ds = ingest(path, "jsonl")
        p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        export_jsonl(ds, str(p1))
        export_jsonl(ds, str(p2))
        assert p1.read_bytes() == p2.read_bytes()

    def test_blank_lines_skipped(self, tmp_path):
        path = self._write(tmp_path, ['{"label": 0, "text": "a"}', "", "  ",
                                      '{"label": 1, "text": "b"}'])
        assert len(ingest(path, "jsonl")) == 2

    def test_invalid_json_reports_line(self, tmp_path):
        path = self._write(tmp_path, ['{"label": 0, "text": "a"}', "{nope"])
        with pytest.raises(ParseError, match=":2"):
            ingest(path, "jsonl")

    def test_missing_keys(self, tmp_path):
        path = self._write(tmp_path, ['{"label": 0}'])
        with pytest.raises(ParseError, match="'label' and 'text'"):
            ingest(path, "jsonl")

    def test_non_string_text(self, tmp_path):
        path = self._write(tmp_path, ['{"label": 0, "text": 5}'])
        with pytest.raises(ParseError, match="must be a string"):
            ingest(path, "jsonl")

    def test_bad_label_is_data_error(self, tmp_path):
        path = self._write(tmp_path, ['{"label": 9, "text": "a"}'])
        with pytest.raises(DataError):
            ingest(path, "jsonl")


def test_unknown_format(tmp_path):
    p = tmp_path / "x"
    p.write_text("")
    with pytest.raises(DataError, match="unknown dataset format"):
        ingest(str(p), "parquet")


def test_datasets_equal_detects_differences():
    v = ascii_vocab()
    base = Dataset(samples=[make_sample(v, 0, "ab", "t")])
    same = Dataset(samples=[make_sample(v, 0, "ab", "t")])
    other_label = Dataset(samples=[make_sample(v, 1, "ab", "t")])
    other_text = Dataset(samples=[make_sample(v, 0, "ac", "t")])
    longer = Dataset(samples=[make_sample(v, 0, "ab", "t")] * 2)
    assert datasets_equal(base, same)
    assert not datasets_equal(base, other_label)
    assert not datasets_equal(base, other_text)
    assert not datasets_equal(base, longer)


def test_dataset_labels():
    v = small_vocab(4)
    ds = Dataset(samples=[make_sample(v, i, "a", "t") for i in (3, 1, 2)])
    assert ds.labels().tolist() == [3, 1, 2]
    assert ds.labels().dtype == np.int64
