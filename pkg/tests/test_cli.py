import io
import json
import subprocess
import sys

import pytest

from kla import formalgroups as fg
from kla.cli import main, parse_group, parse_range

NONSPLIT = '{"type":"crystZp","d":2,"p":3,"rho":[[0,-1],[1,-1]],"split":false}'


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_compute_zd_l_table():
    code, out, _ = run("compute", "--group", "zd:3", "--ring", "Z", "--theory", "L", "--n", "-2..6")
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith("n=")]
    assert len(lines) == 9
    assert lines[2] == "n=0: Z + (Z/2)^3" and lines[6] == "n=4: Z + (Z/2)^3"


def test_compute_surface_with_note():
    code, out, _ = run("compute", "--group", "surface:2", "--ring", "Z", "--theory", "L", "--n", "0..3")
    assert code == 0
    assert "n=0: Z + Z/2" in out and "n=1: Z^4" in out and "n=3: (Z/2)^4" in out
    assert out.count("note:") == 2
    assert "theorem:" in out and "hypotheses:" in out


def test_nonsplit_without_jcard_exits_2():
    code, _, err = run("compute", "--group", NONSPLIT, "--ring", "regular", "--theory", "Wh")
    assert code == 2 and "UnknownJ" in err
    code, out, _ = run("compute", "--group", NONSPLIT, "--ring", "regular", "--theory", "Wh",
                       "--jcard", "1")
    assert code == 0 and "Wh_0(Z/3;R)" in out


def test_usage_errors_exit_1():
    assert run("compute")[0] == 1
    assert run("compute", "--group", "zd:x")[0] == 1
    assert run("compute", "--group", "zd:2", "--ring", "nope")[0] == 1
    assert run("compute", "--group", "zd:2", "--jcard", "2")[0] == 1
    assert run("compute", "--group", "zd:2", "--theory", "K", "--structure-set-preset")[0] == 1
    assert run("analyze", "--group", 'crystZp:{"d":2,"p":3,"rho":[[0,1],[1,0]]}')[0] == 1
    assert run("bogus")[0] == 1


def test_no_applicable_theorem_exits_2():
    code, _, err = run("compute", "--group", 'crystZp:{"d":3,"p":3,"rho":[[0,0,1],[1,0,0],[0,1,0]]}',
                       "--ring", "generic", "--theory", "Wh")
    assert code == 2 and "NoApplicableTheorem" in err


def test_analyze_outputs():
    code, out, _ = run("analyze", "--group", 'crystZp:{"d":2,"p":3,"rho":[[0,-1],[1,-1]]}')
    assert code == 0 and "e = 0" in out and "|J| = 3" in out and "free away from 0: True" in out
    code, out, _ = run("analyze", "--group", 'crystZp:{"d":2,"p":3,"rho":[[1,0],[0,1]]}')
    assert "e = 2" in out and "|J| = 1" in out
    code, out, _ = run("analyze", "--group", 'crystZp:{"d":3,"p":2,"rho":[[-1,0,0],[0,-1,0],[0,0,-1]]}',
                       "--format", "json")
    obj = json.loads(out)
    assert obj["schema"] == "kla.analysis/1"
    assert obj["analysis"]["jCard"] == {"fin": 8} and obj["analysis"]["jcSize"] == {"fin": 4}


def test_table_pascal_and_empty():
    code, out, _ = run("table", "--family", "zd:0..3", "--ring", "regular", "--n", "3")
    assert code == 0
    rows = out.splitlines()[1:]
    assert rows[3].split(None, 1)[1] == "K_0(R) + K_1(R)^3 + K_2(R)^3 + K_3(R)"
    code, out, _ = run("table", "--family", "zd:3..2")
    assert code == 0 and out.splitlines() == ["group  n=0"]
    code, out, _ = run("table", "--family", "surface:0..2", "--theory", "L", "--n", "0..3")
    assert len(out.splitlines()) == 4


def test_table_marks_error_cells():
    code, out, _ = run("table", "--family", "zd:1..2", "--theory", "L", "--decoration", "s",
                       "--ring", "regular")
    assert code == 0 and out.count("ERR") == 2


def test_json_rows_round_trip():
    code, out, _ = run("compute", "--group", "crystZp:{\"d\":1,\"p\":2,\"rho\":[[-1]]}",
                       "--ring", "generic", "--theory", "Sper", "--n", "-2..2", "--format", "json")
    obj = json.loads(out)
    assert obj["schema"] == "kla.result/1"
    for row in obj["rows"]:
        e = fg.from_json(row["expr"])
        assert fg.to_json(e) == row["expr"]
        assert fg.render(e) == row["text"]


def test_latex_and_localize():
    code, out, _ = run("compute", "--group", "crystZp:{\"d\":1,\"p\":2,\"rho\":[[-1]]}",
                       "--ring", "Z", "--theory", "Sper", "--localize2", "--format", "latex")
    assert code == 0 and "UNil" not in out and "tabular" in out


def test_oracle_subcommand():
    assert run("oracle", "--quick")[0] == 0
    code, out, _ = run("oracle", "--quick", "--inject-bug", "h1")
    assert code == 3 and "DISAGREE" in out
    code, out, _ = run("oracle", "--quick", "--format", "json")
    assert json.loads(out)["schema"] == "kla.oracle/1"


def test_shorthand_parsers():
    assert parse_range("-2..1") == (-2, -1, 0, 1)
    assert parse_range("3") == (3,)
    assert parse_range("1,4") == (1, 4)
    g = parse_group("tfhyp:1,4,1:micy=omega")
    assert g.betti == (1, 4, 1)
    assert parse_group("hyp:micy=3").micy == fg.Card(3)


def test_ring_file(tmp_path):
    p = tmp_path / "ring.json"
    p.write_text(json.dumps({"name": "Z", "axioms": ["IsZ"], "values": {"K": {"0": "Z"}}}))
    code, out, _ = run("compute", "--group", "zd:1", "--ring", str(p), "--n", "0")
    assert code == 0 and "n=0: Z" in out


@pytest.mark.parametrize("argv", [
    ["compute", "--group", "surface:3", "--ring", "Z", "--theory", "L", "--n", "-4..4", "--format", "json"],
    ["table", "--family", "zd:0..4", "--ring", "generic", "--n", "-1..2"],
])
def test_byte_identical_subprocess_runs(argv):
    outs = [subprocess.run([sys.executable, "-m", "kla", *argv], capture_output=True, check=True).stdout
            for _ in range(2)]
    assert outs[0] == outs[1] and outs[0]
