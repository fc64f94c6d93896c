import json
import subprocess
import sys

import pytest

from entcone import cli, cone, groups, stab
from entcone.entvec import EntropyVector, PartySystem


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_states_r2_entropy(capsys):
    code, out, _ = run(capsys, "states", "R2", "--entropy")
    assert code == 0
    assert EntropyVector.from_csv(out) == cone.table1_vector(2)


@pytest.mark.parametrize("tag", stab.PAPER_TAGS + stab.EXTRA_TAGS)
def test_states_roundtrip(capsys, tmp_path, tag):
    code, stab_text, _ = run(capsys, "states", tag, "--stab")
    assert code == 0
    path = tmp_path / "state.txt"
    path.write_text(stab_text)
    _, direct, _ = run(capsys, "states", tag, "--entropy")
    code, via_file, _ = run(capsys, "entropy", str(path))
    assert code == 0 and via_file == direct


def test_check_counterexample(capsys, tmp_path):
    v = groups.classical_polymatroid(groups.or_and_distribution(), PartySystem("abcd"))
    path = tmp_path / "counterexample.csv"
    path.write_text(v.to_csv())
    code, out, _ = run(capsys, "check", str(path), "--family", "ingleton")
    assert code == 1
    assert "VIOLATED Ing(ab:cd): margin -0.122556248918" in out
    code, out, _ = run(capsys, "check", str(path), "--family", "shannon", "--family", "matus", "--format", "csv")
    assert code == 0 and out.startswith("instance,margin,verdict")


def test_check_json_lines(capsys, tmp_path):
    path = tmp_path / "r5.csv"
    path.write_text(cone.table1_vector(5).to_csv())
    code, out, _ = run(capsys, "check", str(path), "--family", "kinser", "--format", "json-lines")
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and rows and all(r["verdict"] in ("tight", "satisfied") for r in rows)


def test_rays_table(capsys):
    code, out, _ = run(capsys, "rays", "quantum-ingleton-4")
    assert code == 0
    lines = out.splitlines()
    header = lines[0].split("|")[1].split()
    assert header == ["1", "2", "3", "4", "5", "6", "0"]
    rows = {ln.split("|")[0].strip(): ln.split("|")[1].split() for ln in lines[2:17]}
    for j, k in enumerate(header):
        col = [int(rows[r][j]) for r in rows]
        assert col == cone.TABLE1_COLUMNS[int(k)]
    assert "e (= abcd)" in rows and "ae (= bcd)" in rows
    assert "total extreme rays: 46; orbits under S5: 7" in out


def test_rays_csv(capsys):
    code, out, _ = run(capsys, "rays", "quantum-ingleton-4", "--format", "csv", "--group", "S4")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 47
    assert len({ln.split(",")[1] for ln in lines[1:]}) == 13


def test_group_commands(capsys, tmp_path):
    g = groups.abelian(2, 2)
    path = tmp_path / "klein.txt"
    path.write_text(groups.dump_group(g, [{0, 1}, {0, 2}]))
    code, out, _ = run(capsys, "group", str(path), "--exact")
    assert code == 0
    assert EntropyVector.from_csv(out).values == (0, 1, 1, 2)
    dist = tmp_path / "dist.txt"
    dist.write_text("0000 1/4\n1001 1/4\n1010 1/4\n1111 1/4\n")
    code, out, _ = run(capsys, "group", str(dist), "--distribution", "--format", "table")
    assert code == 0 and "0.811278124459" in out


def test_input_errors(capsys, tmp_path):
    code, _, err = run(capsys, "entropy", str(tmp_path / "missing.txt"))
    assert code == 2 and "cannot read" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("nonsense\n")
    code, _, err = run(capsys, "check", str(bad))
    assert code == 2 and err.count("\n") == 1
    code, _, _ = run(capsys, "rays", "no-such-cone")
    assert code == 2
    state = tmp_path / "bad_state.txt"
    state.write_text("prime: 2\nparties: a:1\ngen: X\ngen: Z\n")
    code, _, err = run(capsys, "entropy", str(state))
    assert code == 2 and "commute" in err


def test_unknown_flag_is_an_error(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["states", "R1", "--bogus"])
    assert exc.value.code == 2


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify-paper", "--only", "2", "--only", "8")
    assert code == 0
    assert out.splitlines()[-1] == "2/2 criteria passed"
    code2, out2, _ = run(capsys, "verify-paper", "--only", "2", "--only", "8")
    strip = lambda s: [ln.rsplit(" (", 1)[0] for ln in s.splitlines()]  # noqa: E731
    assert strip(out2) == strip(out)


def test_console_script():
    res = subprocess.run(
        [sys.executable, "-m", "entcone.cli", "states", "R4", "--format", "json-lines"],
        capture_output=True, text=True, check=True,
    )
    first = json.loads(res.stdout.splitlines()[0])
    assert first == {"party_system": ["a", "b", "c", "d", "e"]}
