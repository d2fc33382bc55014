import json
import subprocess
import sys

import pytest

from halfsurf import __version__
from halfsurf.cli import connections_from_records, main
from halfsurf.fixtures import load_fixture
from halfsurf.saddle import edge_connection
from halfsurf.fixtures import fixture_path
from halfsurf.surface import load, validate


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate(capsys):
    code, out, _ = run(["validate", "torus.surf"], capsys)
    assert code == 0 and out.startswith("ok: genus 1")


def test_validate_bad_file(tmp_path, capsys):
    p = tmp_path / "bad.surf"
    p.write_text("{}")
    code, _, err = run(["validate", str(p)], capsys)
    assert code == 1 and "missing field" in err


def test_unknown_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["validate", "--bogus"])
    assert info.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_bad_lambda_is_usage(capsys):
    with pytest.raises(SystemExit) as info:
        main(["flow", "--surface", "torus", "--lambda", "0"])
    assert info.value.code == 2


def test_domain_error_verbatim(capsys):
    code, _, err = run(["cover", "--surface", "torus"], capsys)
    assert code == 1 and err.strip() == "error: surface is already a translation surface"


def test_count_torus_rows(capsys):
    code, out, _ = run(["count-torus", "--r-min", "5", "--r-max", "8"], capsys)
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith(f"# halfsurf {__version__} seed=0 params=")
    assert lines[1] == "R,count,ratio,fitted_exponent"
    assert len(lines[2:]) == 7
    assert lines[-1].startswith("8,595253,")


def test_count_torus_svg_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        d.mkdir()
        main(["count-torus", "--r-min", "3", "--r-max", "5", "--csv", str(tmp_path / "g.csv"),
              "--svg", str(tmp_path / "g.svg")])
        (d / "g.csv").write_bytes((tmp_path / "g.csv").read_bytes())
        (d / "g.svg").write_bytes((tmp_path / "g.svg").read_bytes())
    assert (a / "g.csv").read_bytes() == (b / "g.csv").read_bytes()
    assert (a / "g.svg").read_bytes() == (b / "g.svg").read_bytes()
    assert (a / "g.svg").read_text().startswith("<svg")


def test_flow_output_loads(tmp_path, capsys):
    out = tmp_path / "q.surf"
    log = tmp_path / "flips.csv"
    assert main(["flow", "--surface", str(fixture_path("lshape")), "--lambda", "7/2", "--out", str(out),
                 "--log", str(log)]) == 0
    s = load(out)
    assert validate(s).ok
    data = json.loads(out.read_text())
    assert data["header"]["params"]["lam"] == "7/2" and data["header"]["version"] == __version__
    assert log.read_text().splitlines()[1] == "edge,lambda"


def test_saddles_and_cylinders(capsys):
    code, out, _ = run(["saddles", "--surface", "torus", "--max-length", "2"], capsys)
    assert code == 0 and len(out.splitlines()) == 2 + 4
    code, out, _ = run(["cylinders", "--surface", "torus", "--max-length", "1"], capsys)
    assert code == 0 and len(out.splitlines()) == 2 + 2


def test_shortset_hdim_cover(tmp_path, capsys):
    code, out, _ = run(["shortset", "--surface", "fig1", "--epsilon", "1/3"], capsys)
    data = json.loads(out)
    assert code == 0 and data["rank"] >= 1 and len(data["shortCurves"]) == 2
    code, out, _ = run(["hdim", "--surface", "fig1"], capsys)
    assert json.loads(out)["h"] == 5
    p = tmp_path / "cover.surf"
    code, _, err = run(["cover", "--surface", "fig1", "--out", str(p)], capsys)
    assert code == 0 and "cover genus 4" in err
    assert validate(load(p)).ok


def test_triangulate_and_imatrix(tmp_path, capsys):
    tri = tmp_path / "tri.json"
    seed = tmp_path / "seed.json"
    seed.write_text("[1]")
    assert main(["triangulate", "--surface", "fig1", "--tau", "3", "--epsilon", "1/3", "--seed", str(seed),
                 "--out", str(tri)]) == 0
    data = json.loads(tri.read_text())
    assert data["report"]["ok"] and len(data["edges"]) == 10
    fig1 = load_fixture("fig1")
    keys = {sc.key for sc in connections_from_records(fig1, data["edges"])}
    assert edge_connection(fig1, 1).key in keys
    capsys.readouterr()
    code, out, _ = run(["imatrix", "--surface", "fig1", "--tri-a", str(tri), "--tri-b", str(tri)], capsys)
    rows = out.splitlines()[2:]
    assert code == 0 and len(rows) == 10
    assert all(set(r.split(",")[1:]) == {"0"} for r in rows)


def test_walk_sim(tmp_path, capsys):
    net = {"nodes": [{"id": "a", "G": 1}, {"id": "b", "G": 2}],
           "edges": [{"from": "a", "to": "b", "thin": 1}, {"from": "b", "to": "a", "thin": 0},
                     {"from": "a", "to": "a", "thin": 0}],
           "h": 2, "lambda": "3", "j": 1, "c": "1"}
    p = tmp_path / "n.json"
    p.write_text(json.dumps(net))
    code, out, _ = run(["walk-sim", "--net", str(p), "--steps", "5", "--theta", "1/2"], capsys)
    assert code == 0 and out.splitlines()[2:] == ["1,1", "2,2", "3,1", "4,3", "5,1"]
    code, out, _ = run(["walk-sim", "--net", str(p), "--steps", "5", "--end", "b", "--certify"], capsys)
    assert code == 0 and all(r.endswith(",1") for r in out.splitlines()[2:])
    code, _, err = run(["walk-sim", "--net", str(p), "--steps", "3", "--end", "zz"], capsys)
    assert code == 1 and "no node" in err


def test_acceptance_single(capsys):
    code, out, _ = run(["acceptance", "--criterion", "9"], capsys)
    assert code == 0 and out.startswith("criterion 9: PASS")


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "halfsurf.cli", "validate", "lshape"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("ok: genus 2")
