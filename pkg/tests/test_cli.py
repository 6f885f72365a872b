import csv
import io
import json
from importlib import resources

import numpy as np
import pytest

from lhvpov.cli import main, parse_dims
from lhvpov.errors import InvalidPovm, ParseError
from lhvpov.specfile import dump_spec, load_channel, parse_channel, parse_spec

DATA = resources.files("lhvpov") / "data"
EXAMPLE = str(DATA / "example_projective.yaml")
QUTRIT = str(DATA / "example_qutrit.yaml")
DEPOLARIZING = str(DATA / "depolarizing_qubit.yaml")


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestSpecFile:
    def test_bundled_examples_parse(self):
        spec = parse_spec((DATA / "example_projective.yaml").read_text())
        assert spec.d == 2 and spec.povm_a.n_outcomes == 2 and spec.povm_b.n_outcomes == 2
        assert spec.alpha == pytest.approx(5 / 12)
        assert spec.channel_a is None
        qutrit = parse_spec((DATA / "example_qutrit.yaml").read_text())
        assert [i for i, _ in qutrit.povm_a.fine_grained] == [0, 0, 1, 1, 1]

    def test_round_trip(self, rng):
        spec = parse_spec((DATA / "example_qutrit.yaml").read_text())
        again = parse_spec(dump_spec(3, spec.povm_a.elements, spec.povm_b.elements, alpha=0.5))
        assert again.alpha == 0.5
        for a, b in zip(spec.povm_a.elements, again.povm_a.elements):
            np.testing.assert_array_equal(a, b)

    def test_not_complete(self):
        text = """d: 2
alice:
  povm:
    - [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]
    - [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]
bob:
  povm:
    - [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]
"""
        with pytest.raises(ParseError) as info:
            parse_spec(text)
        assert isinstance(info.value.__cause__, InvalidPovm)
        assert info.value.__cause__.reason == "not-complete"
        assert info.value.field == "alice.povm"
        assert info.value.line == 4

    def test_bad_entry_has_line(self):
        text = "d: 2\nalice:\n  povm:\n    - [[[1, 0], [0, 0]], [[0, 0], 1]]\nbob:\n  povm: []\n"
        with pytest.raises(ParseError) as info:
            parse_spec(text)
        assert info.value.field == "alice.povm[0][1][1]"
        assert info.value.line == 4

    def test_yaml_syntax_error(self):
        with pytest.raises(ParseError) as info:
            parse_spec("d: 2\nalice: [\n")
        assert info.value.line is not None

    @pytest.mark.parametrize("text,field", [
        ("d: 1\n", "d"),
        ("d: 2\nalpha: 1.5\n", "alpha"),
        ("d: 2\nbob: {}\n", "alice"),
    ])
    def test_field_errors(self, text, field):
        with pytest.raises(ParseError) as info:
            parse_spec(text)
        assert info.value.field == field

    def test_channel_files(self):
        ch = load_channel(DEPOLARIZING)
        assert ch.dim == 2 and len(ch.kraus_ops) == 4
        bare = parse_channel("- [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]\n")
        assert len(bare.kraus_ops) == 1
        with pytest.raises(ParseError):
            parse_channel("kraus:\n  - [[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]\n")


def test_parse_dims():
    assert parse_dims("3") == [3]
    assert parse_dims("2..4") == [2, 3, 4]
    assert parse_dims("2-4") == [2, 3, 4]
    assert parse_dims("2,5") == [2, 5]


class TestIntegrals:
    def test_rows(self, capsys):
        assert main(["integrals", "--d", "2..3", "--samples", "1000"]) == 0
        rows = read_csv(capsys.readouterr().out)
        assert float(rows[0]["J0_closed"]) == pytest.approx(0.375, abs=1e-12)
        assert float(rows[0]["J1_closed"]) == pytest.approx(7 / 24, abs=1e-11)
        assert float(rows[0]["alpha_formula"]) == pytest.approx(5 / 12, abs=1e-11)
        assert float(rows[0]["J0_quad"]) == pytest.approx(0.375, abs=1e-11)
        assert float(rows[1]["alpha_moments"]) == pytest.approx(8 / 27, abs=1e-11)

    def test_d1_is_domain_error(self, capsys):
        assert main(["integrals", "--d", "1"]) == 1
        assert "DomainError" in capsys.readouterr().err


class TestSimulate:
    def test_columns_agree(self, tmp_path):
        out = tmp_path / "table.csv"
        assert main(["simulate", "--spec", EXAMPLE, "--runs", "200000", "--seed", "3", "--out", str(out)]) == 0
        rows = read_csv(out.read_text())
        assert len(rows) == 4
        for r in rows:
            emp, se = float(r["empirical"]), float(r["empirical_se"])
            assert float(r["model_analytic"]) == pytest.approx(float(r["quantum"]), abs=1e-11)
            assert abs(emp - float(r["quantum"])) <= 4 * se
        assert sum(float(r["empirical"]) for r in rows) == pytest.approx(1.0, abs=1e-9)
        assert sum(float(r["quantum"]) for r in rows) == pytest.approx(1.0, abs=1e-9)

    def test_byte_identical(self, tmp_path):
        paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
        for p in paths:
            assert main(["simulate", "--spec", QUTRIT, "--runs", "5000", "--seed", "8", "--workers", "2",
                         "--out", str(p)]) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_channel_column(self, tmp_path):
        out = tmp_path / "t.csv"
        assert main(["simulate", "--spec", EXAMPLE, "--runs", "1000", "--channel-a", DEPOLARIZING,
                     "--out", str(out)]) == 0
        rows = read_csv(out.read_text())
        assert "quantum_rho2" in rows[0]
        for r in rows:
            assert float(r["quantum_rho2"]) == pytest.approx(float(r["quantum"]), abs=1e-10)

    def test_not_complete_spec_fails(self, tmp_path, capsys):
        bad = tmp_path / "bad.yaml"
        bad.write_text("d: 2\nalice:\n  povm:\n    - [[[1, 0], [0, 0]], [[0, 0], [0, 0]]]\n"
                       "bob:\n  povm:\n    - [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]\n")
        assert main(["simulate", "--spec", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "ParseError" in err and "not-complete" in err


class TestVerify:
    def test_small_sample_is_inconclusive_not_failed(self, tmp_path):
        report = tmp_path / "r.json"
        assert main(["verify", "--d", "2", "--samples", "100", "--out", str(report)]) == 0
        data = json.loads(report.read_text())
        by_name = {c["name"]: c for c in data["checks"]}
        assert by_name["simplex_J0[d=2]"]["status"] == "inconclusive"
        assert by_name["central_mc[d=2]"]["status"] == "inconclusive"
        assert by_name["central_exact[d=2]"]["status"] == "pass"
        assert data["summary"]["fail"] == 0
        for c in data["checks"]:
            assert set(c) >= {"name", "status", "observed", "expected", "tolerance", "se"}

    def test_alpha_override_fails(self, tmp_path):
        report = tmp_path / "r.json"
        assert main(["verify", "--d", "2", "--samples", "100", "--alpha-override", "0.9", "--out", str(report)]) == 1
        by_name = {c["name"]: c for c in json.loads(report.read_text())["checks"]}
        assert by_name["central_exact[d=2]"]["status"] == "fail"
        assert by_name["alpha_identity[d=2]"]["status"] == "skipped"

    def test_report_is_reproducible(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for p in (a, b):
            main(["verify", "--d", "3", "--samples", "2000", "--seed", "4", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()
