import os
import tempfile
import unittest

import numpy as np
import pandas as pd

from pgmvg.core_types import EmbeddingMatrix, PseudoLabels, RunConfig, UtteranceSet
from pgmvg.exceptions import (
    BadMagic,
    ConfigError,
    CountMismatch,
    DataFormatError,
    DuplicateId,
    EmptyId,
    InvalidEncoding,
    InvalidId,
    MalformedTable,
    NonFiniteValue,
    TrailingData,
    TruncatedFile,
    UnsupportedVersion,
)
from pgmvg.io_operations.config_reader import load_run_config, parse_key_value_lines
from pgmvg.io_operations.embedding_reader_writer import (
    HEADER,
    MAGIC,
    read_embeddings,
    write_embeddings,
)
from pgmvg.io_operations.text_reader_writer import (
    read_ids,
    read_labels,
    read_table,
    write_ids,
    write_labels,
    write_table,
)


class TestEmbeddingFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.path = os.path.join(self.tmp.name, "m.pgmv")

    def tearDown(self):
        self.tmp.cleanup()

    def _write_raw(self, raw: bytes):
        with open(self.path, "wb") as f:
            f.write(raw)

    def test_write_then_read(self):
        data = np.arange(12, dtype=np.float32).reshape(3, 4) / 7.0
        write_embeddings(self.path, EmbeddingMatrix(data))
        self.assertEqual(os.path.getsize(self.path), 24 + 12 * 4)

        m = read_embeddings(self.path, model_id=2)
        np.testing.assert_array_equal(m.data, data)
        self.assertEqual(m.model_id, 2)

    def test_header_layout(self):
        write_embeddings(self.path, EmbeddingMatrix(np.ones((2, 3))))
        with open(self.path, "rb") as f:
            raw = f.read()
        self.assertEqual(raw[:4], b"PGMV")
        self.assertEqual(HEADER.unpack_from(raw), (MAGIC, 1, 2, 3))

    def test_bad_magic(self):
        self._write_raw(HEADER.pack(b"XXXX", 1, 1, 2) + bytes(8))
        with self.assertRaises(BadMagic):
            read_embeddings(self.path)

    def test_bad_version(self):
        self._write_raw(HEADER.pack(MAGIC, 2, 1, 2) + bytes(8))
        with self.assertRaises(UnsupportedVersion):
            read_embeddings(self.path)

    def test_truncated(self):
        self._write_raw(HEADER.pack(MAGIC, 1, 2, 2) + bytes(12))
        with self.assertRaises(TruncatedFile):
            read_embeddings(self.path)
        self._write_raw(MAGIC + bytes(3))
        with self.assertRaises(TruncatedFile):
            read_embeddings(self.path)

    def test_trailing(self):
        self._write_raw(HEADER.pack(MAGIC, 1, 1, 2) + bytes(9))
        with self.assertRaises(TrailingData):
            read_embeddings(self.path)

    def test_non_finite(self):
        payload = np.array([[1.0, 2.0], [np.inf, 0.0]], dtype="<f4").tobytes()
        self._write_raw(HEADER.pack(MAGIC, 1, 2, 2) + payload)
        with self.assertRaises(NonFiniteValue) as cm:
            read_embeddings(self.path)
        self.assertEqual((cm.exception.row, cm.exception.col), (1, 0))

    def test_errors_are_data_errors(self):
        self._write_raw(b"nope")
        with self.assertRaises(DataFormatError):
            read_embeddings(self.path)


class TestTextFiles(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def _write_text(self, name, text):
        path = os.path.join(self.dir, name)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        return path

    def test_read_ids(self):
        path = self._write_text("a.ids", "u1\nu2\r\nu3\n")
        ids = read_ids(path, expected=3)
        self.assertEqual(ids.ids, ("u1", "u2", "u3"))

    def test_read_ids_errors(self):
        with self.assertRaises(EmptyId) as cm:
            read_ids(self._write_text("e.ids", "u1\n\nu3\n"))
        self.assertEqual(cm.exception.line, 2)
        with self.assertRaises(InvalidId):
            read_ids(self._write_text("t.ids", "u1\nu\t2\n"))
        with self.assertRaises(DuplicateId):
            read_ids(self._write_text("d.ids", "u1\nu2\nu1\n"))
        with self.assertRaises(CountMismatch):
            read_ids(self._write_text("c.ids", "u1\nu2\n"), expected=3)

        path = os.path.join(self.dir, "b.ids")
        with open(path, "wb") as f:
            f.write(b"u1\n\xff\xfe\n")
        with self.assertRaises(InvalidEncoding):
            read_ids(path)

    def test_labels_file(self):
        ids = UtteranceSet(("a", "b", "c"))
        labels = PseudoLabels(np.array([1, -1, 0]))
        path = os.path.join(self.dir, "labels.tsv")
        write_labels(path, ids, labels)
        with open(path, encoding="utf-8") as f:
            self.assertEqual(f.read(), "a\t1\nb\t-1\nc\t0\n")

        read_back_ids, read_back = read_labels(path)
        self.assertEqual(read_back_ids.ids, ids.ids)
        np.testing.assert_array_equal(read_back.label, labels.label)

    def test_labels_errors(self):
        with self.assertRaises(DataFormatError):
            read_labels(self._write_text("bad.tsv", "a\tx\n"))
        with self.assertRaises(DuplicateId):
            read_labels(self._write_text("dup.tsv", "a\t1\na\t2\n"))
        with self.assertRaises(MalformedTable):
            read_labels(self._write_text("extra.tsv", "a\t1\nb\t2\tx\n"))
        with self.assertRaises(MalformedTable):
            read_labels(self._write_text("wide.tsv", "a\t1\tx\nb\t2\ty\n"))
        with self.assertRaises(MalformedTable):
            read_labels(self._write_text("narrow.tsv", "a\nb\n"))
        path = os.path.join(self.dir, "binary.tsv")
        with open(path, "wb") as f:
            f.write(b"a\t1\n\xff\t2\n")
        with self.assertRaises(InvalidEncoding):
            read_labels(path)
        with self.assertRaises(ValueError):
            path = os.path.join(self.dir, "x.tsv")
            write_labels(path, UtteranceSet(("a",)), PseudoLabels([1, 2]))

    def test_write_ids(self):
        path = os.path.join(self.dir, "out.ids")
        write_ids(path, UtteranceSet(("x", "y")))
        self.assertEqual(read_ids(path).ids, ("x", "y"))

    def test_table_with_header(self):
        path = os.path.join(self.dir, "history.tsv")
        df = pd.DataFrame({"k": [5, 10], "nodes": [100, 120]})
        write_table(path, df, header_lines=["k_init = 5"])
        with open(path, encoding="utf-8") as f:
            self.assertEqual(f.readline(), "# k_init = 5\n")
        pd.testing.assert_frame_equal(read_table(path), df)


class TestConfigReader(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = self.tmp.name

    def tearDown(self):
        self.tmp.cleanup()

    def _write_text(self, name, text):
        path = os.path.join(self.dir, name)
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
        return path

    def test_key_value_lines(self):
        values = parse_key_value_lines("# comment\nk_init = 3  # trailing\n\nth_high=0.5\n")
        self.assertEqual(values, {"k_init": "3", "th_high": "0.5"})
        with self.assertRaises(ConfigError):
            parse_key_value_lines("k_init 3\n")

    def test_defaults(self):
        self.assertEqual(load_run_config(), RunConfig())

    def test_key_value_file(self):
        path = self._write_text("run.cfg", "k_init = 3\nth_high = 0.5\nvote_quorum = 2\n")
        config = load_run_config(path)
        self.assertEqual(config.k_init, 3)
        self.assertEqual(config.th_high, 0.5)
        self.assertEqual(config.vote_quorum, 2)

    def test_yaml_file(self):
        path = self._write_text("run.yaml", "k_step: 10\nvote_quorum: null\nepsilon: 0.1\n")
        config = load_run_config(path)
        self.assertEqual(config.k_step, 10)
        self.assertIsNone(config.vote_quorum)
        self.assertEqual(config.epsilon, 0.1)

    def test_overrides_win(self):
        path = self._write_text("run.cfg", "k_max = 50\n")
        config = load_run_config(path, overrides={"k_max": 80, "k_init": None})
        self.assertEqual(config.k_max, 80)
        self.assertEqual(config.k_init, RunConfig().k_init)

    def test_assessment_cap_none(self):
        config = load_run_config(overrides={"assess_max_utterances": "none"})
        self.assertIsNone(config.assess_max_utterances)
        path = self._write_text("cap.cfg", "assess_max_utterances = none\n")
        self.assertIsNone(load_run_config(path).assess_max_utterances)
        config = load_run_config(overrides={"assess_max_utterances": "64"})
        self.assertEqual(config.assess_max_utterances, 64)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            load_run_config(self._write_text("u.cfg", "bogus = 1\n"))
        with self.assertRaises(ConfigError):
            load_run_config(self._write_text("t.cfg", "k_init = five\n"))
        with self.assertRaises(ConfigError):
            load_run_config(self._write_text("f.cfg", "k_init = 2.5\n"))
        with self.assertRaises(ConfigError):
            load_run_config(self._write_text("v.cfg", "th_low = 0.6\n"))
        with self.assertRaises(ConfigError):
            load_run_config(self._write_text("l.yaml", "- 1\n- 2\n"))
