"""Unit tests for output rendering and manifests."""

import json

import pytest

from specsense import __version__
from specsense.utils.output import (
    RunManifest,
    format_float,
    manifest_path_for,
    render_csv,
    render_csv_comments,
    render_json,
    rows_to_records,
    sha256_text,
    write_manifest_sidecar,
    write_text,
)


class TestFormatting:
    """Test numeric and CSV formatting."""

    def test_format_float_round_trips(self):
        """Test 17 significant digits reproduce the float."""
        for value in (0.1, 1.0 / 3.0, 2.5e-17, 14 / 41):
            assert float(format_float(value)) == value
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(1.0) == "1"

    def test_render_csv(self):
        """Test header, cell formatting and line endings."""
        text = render_csv(["m", "flag", "value"], [[1, True, 0.5], [2, False, "x"]])
        assert text == "m,flag,value\n1,true,0.5\n2,false,x\n"

    def test_render_csv_comments(self):
        """Test scalars render as comment lines in insertion order."""
        text = render_csv_comments({"average_error": 0.125, "trials": 10})
        assert text == "# average_error,0.125\n# trials,10\n"
        assert render_csv_comments({}) == ""

    def test_render_csv_row_length(self):
        """Test rows must match the header."""
        with pytest.raises(ValueError, match="cells"):
            render_csv(["a", "b"], [[1]])

    def test_render_json_sorted(self):
        """Test stable key order and trailing newline."""
        text = render_json({"b": 1, "a": [1.5]})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": [1.5], "b": 1}

    def test_records(self):
        """Test rows zip with the header."""
        assert rows_to_records(["x", "y"], [[1, 2], [3, 4]]) == [{"x": 1, "y": 2}, {"x": 3, "y": 4}]

    def test_sha256(self):
        """Test the digest of a known string."""
        assert sha256_text("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


class TestWriting:
    """Test writing to files and stdout."""

    def test_write_file_creates_parents(self, tmp_path):
        """Test parent directories are created."""
        path = tmp_path / "nested" / "out.csv"
        write_text("a\n", str(path))
        assert path.read_text() == "a\n"

    def test_write_stdout(self, capsys):
        """Test no path writes to stdout."""
        write_text("hello\n")
        assert capsys.readouterr().out == "hello\n"


class TestManifest:
    """Test run manifests."""

    def test_defaults(self):
        """Test version and timestamp are filled in."""
        manifest = RunManifest(command="moments")
        assert manifest.artifact_version == __version__
        assert manifest.timestamp
        assert manifest.outputs == {}
        assert manifest.results == {}

    def test_empty_command(self):
        """Test a command name is required."""
        with pytest.raises(ValueError, match="empty"):
            RunManifest(command=" ")

    def test_sidecar(self, tmp_path):
        """Test the sidecar lands next to the output."""
        output = tmp_path / "curve.csv"
        manifest = RunManifest(command="pfa-curve", parameters={"K": 8}, seed=3, outputs={str(output): "abc"})
        path = write_manifest_sidecar(manifest, str(output))
        assert path == manifest_path_for(str(output))
        assert path.name == "curve.csv.manifest.json"
        data = json.loads(path.read_text())
        assert data["command"] == "pfa-curve"
        assert data["parameters"] == {"K": 8}
        assert data["seed"] == 3
