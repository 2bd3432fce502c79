"""
Tests for INI reading and grouped output writes
"""

import os

import pytest

from sbvsim.exceptions import ConfigError
from sbvsim.fileio import read_ini, write_outputs

FILES = {"a.csv": "new a\n", "b.svg": "new b\n", "c.csv": "new c\n"}


@pytest.fixture
def fail_replace(mocker):
    """Make the n-th os.replace call inside fileio raise"""

    def _arm(failing_call):
        real_replace = os.replace
        calls = {"n": 0}

        def _replace(src, dst):
            calls["n"] += 1
            if calls["n"] == failing_call:
                raise OSError("disk full")
            return real_replace(src, dst)

        return mocker.patch("sbvsim.fileio.os.replace", side_effect=_replace)

    return _arm


class TestReadIni:
    def test_case_is_kept(self, write_file):
        path = write_file("run.ini", """
            [scenario]
            Mode = NV
            n_op = 2
            """)
        assert read_ini(path) == {"scenario": {"Mode": "NV", "n_op": "2"}}

    def test_inline_comments(self, write_file):
        path = write_file("run.ini", """
            [output]
            directory = out   ; where results go
            formats = csv     # only the table
            """)
        assert read_ini(path) == {"output": {"directory": "out", "formats": "csv"}}

    def test_colon_is_a_parse_error(self, write_file):
        path = write_file("run.ini", """
            [scenario]
            n_op = 2
            mode: NV
            """)
        with pytest.raises(ConfigError, match="line 3") as excinfo:
            read_ini(path)
        assert "mode: NV" in str(excinfo.value)

    def test_key_outside_section(self, write_file):
        path = write_file("run.ini", """
            mode = NV
            """)
        with pytest.raises(ConfigError, match="outside"):
            read_ini(path)


class TestWriteOutputs:
    def test_writes_everything(self, tmp_path):
        out = tmp_path / "nested" / "out"
        written = write_outputs(out, FILES)
        assert [p.name for p in written] == list(FILES)
        assert {p.name: p.read_text() for p in out.iterdir()} == FILES

    def test_replaces_existing_files(self, tmp_path):
        (tmp_path / "a.csv").write_text("old a\n")
        write_outputs(tmp_path, FILES)
        assert sorted(p.name for p in tmp_path.iterdir()) == sorted(FILES)
        assert (tmp_path / "a.csv").read_text() == "new a\n"

    @pytest.mark.parametrize("failing_call", [1, 2, 3])
    def test_failure_in_empty_directory_leaves_it_empty(self, tmp_path, fail_replace, failing_call):
        fail_replace(failing_call)
        with pytest.raises(OSError, match="disk full"):
            write_outputs(tmp_path, FILES)
        assert list(tmp_path.iterdir()) == []

    @pytest.mark.parametrize("failing_call", [1, 2, 3, 4, 5, 6])
    def test_failure_restores_previous_files(self, tmp_path, fail_replace, failing_call):
        for name in FILES:
            (tmp_path / name).write_text(f"old {name}\n")
        fail_replace(failing_call)
        with pytest.raises(OSError, match="disk full"):
            write_outputs(tmp_path, FILES)
        assert {p.name: p.read_text() for p in tmp_path.iterdir()} == {name: f"old {name}\n" for name in FILES}

    def test_failure_keeps_unrelated_files(self, tmp_path, fail_replace):
        (tmp_path / "notes.txt").write_text("keep me")
        (tmp_path / "b.svg").write_text("old b\n")
        fail_replace(3)
        with pytest.raises(OSError):
            write_outputs(tmp_path, FILES)
        assert {p.name: p.read_text() for p in tmp_path.iterdir()} == {"notes.txt": "keep me", "b.svg": "old b\n"}

    def test_write_failure_removes_staged_files(self, tmp_path, mocker):
        mocker.patch("sbvsim.fileio.os.replace", side_effect=AssertionError("never reached"))
        with pytest.raises(TypeError):
            write_outputs(tmp_path, {"a.csv": "fine", "b.csv": None})
        assert list(tmp_path.iterdir()) == []
