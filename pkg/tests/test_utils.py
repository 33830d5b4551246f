"""Tests for seed derivation, the parallel map, artifact sidecars and logging setup."""

import io
import logging
import math

import numpy as np
import pytest

from app import __version__
from app.dataset import ClassLabel
from app.logging_config import LEVEL_ENV, level_for, setup_logging
from app.utils.metadata import file_digest, read_sidecar, sidecar_path, write_sidecar
from app.utils.parallel import parallel_map
from app.utils.seeding import derive_seed, make_rng


class TestSeeding:
    def test_same_keys_same_stream(self):
        assert derive_seed(5, "tree", 3) == derive_seed(5, "tree", 3)
        assert np.array_equal(make_rng(5, "a").random(4), make_rng(5, "a").random(4))

    def test_keys_and_seed_separate_streams(self):
        assert derive_seed(5, "tree", 3) != derive_seed(5, "tree", 4)
        assert derive_seed(5, "tree", 3) != derive_seed(6, "tree", 3)

    def test_enum_keys_use_their_value(self):
        assert derive_seed(0, ClassLabel.WW) == derive_seed(0, "WW")

    def test_negative_seed_is_accepted(self):
        assert 0 <= derive_seed(-1, "x") < 2**32


class TestParallelMap:
    def test_inline(self):
        assert parallel_map(math.factorial, range(6), workers=1) == [1, 1, 2, 6, 24, 120]

    def test_worker_count_does_not_change_results(self):
        items = list(range(12))
        assert parallel_map(math.factorial, items, workers=3) == parallel_map(math.factorial, items, workers=1)

    def test_empty(self):
        assert parallel_map(math.factorial, [], workers=4) == []


class TestSidecar:
    def test_write_and_read(self, tmp_path):
        source = tmp_path / "input.txt"
        source.write_text("hello")
        artifact = tmp_path / "out.tsv"
        artifact.write_text("x")
        path = write_sidecar(artifact, "extract", {"grid": {"patch_side": 64}}, seed=9, inputs=[source])

        assert path == sidecar_path(artifact)
        assert path.name == "out.tsv.meta.yml"
        meta = read_sidecar(artifact)
        assert meta["stage"] == "extract"
        assert meta["seed"] == 9
        assert meta["tool"] == {"name": "stonetype", "version": __version__}
        assert meta["config"]["grid"]["patch_side"] == 64
        assert meta["inputs"] == {source.as_posix(): file_digest(source)}

    def test_sha256_of_file(self, tmp_path):
        path = tmp_path / "a"
        path.write_bytes(b"abc")
        assert file_digest(path) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"

    def test_directory_digest_ignores_sidecars(self, tmp_path):
        (tmp_path / "a.txt").write_text("a")
        before = file_digest(tmp_path)
        (tmp_path / "a.txt.meta.yml").write_text("stage: x")
        assert file_digest(tmp_path) == before
        (tmp_path / "b.txt").write_text("b")
        assert file_digest(tmp_path) != before

    def test_missing_sidecar(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_sidecar(tmp_path / "nothing")


class TestLogging:
    @pytest.fixture(autouse=True)
    def restore_root(self):
        root = logging.getLogger()
        handlers, level = root.handlers[:], root.level
        yield
        root.handlers[:] = handlers
        root.setLevel(level)

    def test_switches_win_over_environment(self, monkeypatch):
        monkeypatch.setenv(LEVEL_ENV, "ERROR")
        assert level_for(verbose=True) == logging.DEBUG
        assert level_for(quiet=True) == logging.WARNING
        assert level_for() == logging.ERROR

    def test_unknown_environment_level_falls_back_to_info(self, monkeypatch):
        monkeypatch.setenv(LEVEL_ENV, "chatty")
        assert level_for() == logging.INFO
        monkeypatch.delenv(LEVEL_ENV)
        assert level_for() == logging.INFO

    def test_format_and_library_damping(self):
        stream = io.StringIO()
        setup_logging(logging.INFO, stream=stream)
        logging.getLogger("app.test").info("hello")
        logging.getLogger("matplotlib").info("font cache")
        assert stream.getvalue() == "app.test - INFO - hello\n"
        assert logging.getLogger("PIL").level == logging.WARNING
