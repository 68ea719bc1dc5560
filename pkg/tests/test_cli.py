import csv
import io
import math
import re
from pathlib import Path

import pytest

from symtsg.cli import (
    CSV_COLUMNS,
    EXIT_ASSERT,
    EXIT_DIVERGED,
    EXIT_OK,
    EXIT_USAGE,
    format_value,
    main,
    parse_overrides,
)

from .conftest import MODELS

GOLDEN = Path(__file__).parent / "golden" / "bench.csv"
TIMING = {"construct_time", "qual_time", "quant_time", "total_time"}
P1_REACH = '<<p1>> Pmax=? [ F "goal" ]'


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


class TestBuild:
    def test_example(self, capsys):
        code, out, err = run(capsys, "build", "example")
        assert code == EXIT_OK
        assert "states: 3" in out and "transitions: 6" in out
        assert "no owning player" in err

    def test_explicit_text_input(self, capsys):
        code, out, _ = run(capsys, "build", str(MODELS / "example.txt"), "--engine", "explicit")
        assert code == EXIT_OK and "states: 3" in out

    def test_override(self, capsys):
        code, out, _ = run(capsys, "build", "dice", "-c", "N=2")
        assert code == EXIT_OK and "states: 283" in out

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "build", str(tmp_path / "nope.tsg"))
        assert code == EXIT_USAGE and "error" in err

    def test_syntax_error(self, capsys, tmp_path):
        bad = tmp_path / "bad.tsg"
        bad.write_text("tsg\nmodule m\nendmodule\n")
        code, _, err = run(capsys, "build", str(bad))
        assert code == EXIT_USAGE and "2:1" in err

    def test_bad_arguments(self, capsys):
        assert run(capsys, "build")[0] == EXIT_USAGE
        assert run(capsys, "--help")[0] == EXIT_OK


class TestCheck:
    def test_result_line(self, capsys):
        code, out, _ = run(capsys, "check", "example", "--prop", P1_REACH)
        assert code == EXIT_OK and "result: 1.0" in out

    @pytest.mark.parametrize("engine", ["symbolic", "explicit"])
    def test_property_file(self, capsys, engine):
        code, out, _ = run(capsys, "check", "example", "--props", str(MODELS / "example.props"), "--engine", engine)
        assert code == EXIT_OK
        results = re.findall(r"result: (\S+)", out)
        assert [float(r) for r in results] == pytest.approx([1.0, 0.0, 2.0, 1.9], abs=1e-6)

    def test_engines_agree(self, capsys):
        code, out, _ = run(capsys, "check", "avoid", "-c", "K=3", "--props", str(MODELS / "avoid.props"), "--engine", "both")
        assert code == EXIT_OK
        results = [float(r) for r in re.findall(r"result: (\S+)", out)]
        half = len(results) // 2
        assert results[:half] == pytest.approx(results[half:], rel=1e-6)

    def test_vector(self, capsys):
        _, out, _ = run(capsys, "check", "example", "--prop", '<<p2>> Pmax=? [ F "goal" ]', "--vector")
        assert "(s=0) = 0.0" in out and "(s=1) = 1.0" in out

    def test_epsilon_controls_iterations(self, capsys):
        its = []
        for eps in ("1e-3", "1e-6"):
            code, out, _ = run(capsys, "check", "dice", "-c", "N=2", "--prop", '<<p1>> R{"moves"}min=? [ F "done" ]',
                               "--epsilon", eps, "--stats")
            assert code == EXIT_OK
            its.append(int(re.search(r"iterations=(\d+)", out).group(1)))
        assert 0 < its[0] <= its[1]

    def test_assert(self, capsys):
        code, out, _ = run(capsys, "check", "example", "--prop", '<<p2>> P>=0.5 [ F "goal" ]', "--assert")
        assert code == EXIT_ASSERT and "result: false" in out
        code, _, _ = run(capsys, "check", "example", "--prop", '<<p1>> P>=0.5 [ F "goal" ]', "--assert")
        assert code == EXIT_OK

    def test_divergence(self, capsys):
        code, _, err = run(capsys, "check", "avoid", "-c", "K=3", "--prop", '<<evader>> Pmax=? [ !"caught" U "home" ]', "--max-iters", "1")
        assert code == EXIT_DIVERGED and "no convergence" in err

    def test_bad_property_reported(self, capsys):
        code, out, err = run(capsys, "check", "example", "--prop", "<<p9>> Pmax=? [ F \"goal\" ]", "--prop", P1_REACH)
        assert code == EXIT_USAGE
        assert "unknown player" in err + out and "result: 1.0" in out

    def test_bad_epsilon(self, capsys):
        assert run(capsys, "check", "example", "--prop", P1_REACH, "--epsilon", "0")[0] == EXIT_USAGE

    def test_export_strategy_text(self, capsys, tmp_path):
        path = tmp_path / "strat.txt"
        code, _, _ = run(capsys, "check", "example", "--prop", P1_REACH, "--export-strategy", str(path))
        assert code == EXIT_OK and path.read_text() == "(s=0) -> b\n"

    @pytest.mark.parametrize("engine", ["symbolic", "explicit"])
    def test_export_strategy_dot(self, capsys, tmp_path, engine):
        path = tmp_path / "strat.dot"
        code, _, _ = run(capsys, "check", "example", "--prop", P1_REACH, "--export-strategy", str(path),
                         "--strategy-format", "dot", "--engine", engine)
        assert code == EXIT_OK and path.read_text().startswith("digraph")

    def test_export_many_properties(self, capsys, tmp_path):
        path = tmp_path / "s.txt"
        run(capsys, "check", "example", "--props", str(MODELS / "example.props"), "--export-strategy", str(path))
        assert sorted(p.name for p in tmp_path.iterdir())[:2] == ["s.0.txt", "s.1.txt"]


class TestValues:
    @pytest.mark.parametrize(
        "v,text",
        [(1.0, "1.0"), (0, "0.0"), (0.25, "0.25"), (True, "true"), (False, "false"), (math.inf, "inf"), (1 / 3, "0.3333333333")],
    )
    def test_format(self, v, text):
        assert format_value(v) == text

    def test_overrides(self):
        assert parse_overrides(["N=3,K=2", "P=0.5"]) == {"N": "3", "K": "2", "P": "0.5"}


class TestBench:
    def manifest(self, tmp_path: Path) -> Path:
        path = tmp_path / "bench.ini"
        path.write_text(
            f"[example]\nmodel = {MODELS / 'example.tsg'}\nproperties = {MODELS / 'example.props'}\n\n"
            f"[dice]\nmodel = {MODELS / 'dice.tsg'}\nparam.N = 2\nengines = symbolic, explicit\n"
        )
        return path

    def test_construction_rows(self, capsys, tmp_path):
        code, out, _ = run(capsys, "bench", "--manifest", str(self.manifest(tmp_path)))
        assert code == EXIT_OK
        rows = rows_of(out)
        assert list(rows[0]) == list(CSV_COLUMNS)
        build = [r for r in rows if not r["property"]]
        assert [(r["model"], r["engine"]) for r in build] == [
            ("example", "symbolic"), ("example", "explicit"), ("dice", "symbolic"), ("dice", "explicit")]
        assert all(bool(r["nodes"]) == (r["engine"] == "symbolic") for r in rows)
        assert len(rows) == 4 + 2 * 4

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "r.csv"
        code, msg, _ = run(capsys, "bench", "--manifest", str(self.manifest(tmp_path)), "--out", str(out), "--only", "dice")
        assert code == EXIT_OK and "2 rows" in msg
        assert len(rows_of(out.read_text())) == 2

    def test_bad_manifest(self, capsys, tmp_path):
        path = tmp_path / "m.ini"
        path.write_text("[x]\nproperties = a.props\n")
        assert run(capsys, "bench", "--manifest", str(path))[0] == EXIT_USAGE

    def test_golden(self, capsys):
        code, out, _ = run(capsys, "bench")
        assert code == EXIT_OK
        got, want = rows_of(out), rows_of(GOLDEN.read_text())
        assert len(got) == len(want)
        for g, w in zip(got, want):
            for col in CSV_COLUMNS:
                if col in TIMING:
                    continue
                if col == "value" and w[col] not in ("", "true", "false", "inf"):
                    assert float(g[col]) == pytest.approx(float(w[col]), rel=1e-6, abs=1e-9), (w, col)
                else:
                    assert g[col] == w[col], (w, col)
            assert all(g[c] == "" or float(g[c]) >= 0 for c in TIMING)
