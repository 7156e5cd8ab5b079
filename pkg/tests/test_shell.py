import json
import xml.etree.ElementTree as ET
from pathlib import Path

import pytest

from hexmeasure import cli
from hexmeasure.fixtures import FIXTURE_DIR, all_fixtures
from hexmeasure.measure import InputError, InvalidMeasure, M, dumps, from_segments, read_measure, write_measure
from hexmeasure.puzzle import build_puzzle
from hexmeasure.render import measure_svg, puzzle_svg

SVG = "{http://www.w3.org/2000/svg}"


def fx(name):
    return str(FIXTURE_DIR / name)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_shipped_fixtures_are_current():
    for name, m in all_fixtures().items():
        assert (FIXTURE_DIR / name).read_text(encoding="utf-8") == dumps(m)


def test_file_round_trip(tmp_path, T3):
    text = Path(fx("T3.json")).read_text(encoding="utf-8")
    write_measure(read_measure(fx("T3.json")), tmp_path / "t.json")
    assert (tmp_path / "t.json").read_text(encoding="utf-8") == text


def edited(tmp_path, fn):
    data = json.loads(Path(fx("T3.json")).read_text(encoding="utf-8"))
    fn(data)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(data), encoding="utf-8")
    return p


def test_zero_density_rejected(tmp_path):
    p = edited(tmp_path, lambda d: d["edges"][0].update(density="0"))
    with pytest.raises(InvalidMeasure):
        read_measure(p)


def test_vertex_outside_rejected(tmp_path):
    p = edited(tmp_path, lambda d: d["vertices"][0].update(a="7"))
    with pytest.raises(InvalidMeasure):
        read_measure(p)


def test_measure_svg(T3):
    root = ET.fromstring(measure_svg(T3))
    lines = root.findall(f"{SVG}line")
    assert sum(1 for x in lines if x.get("class") == "edge") == 3
    assert sum(1 for x in lines if x.get("marker-end") == "url(#arrow)") == 3
    assert root.find(f"{SVG}polygon").get("stroke-dasharray")
    empty = ET.fromstring(measure_svg(from_segments(M, 2, [], [])))
    assert empty.findall(f"{SVG}line") == [] and len(empty.findall(f"{SVG}polygon")) == 1
    assert measure_svg(T3) == measure_svg(T3)


def test_puzzle_svg(T3):
    root = ET.fromstring(puzzle_svg(build_puzzle(T3)))
    kinds = [p.get("class") for p in root.findall(f"{SVG}polygon")]
    assert len(kinds) == 7
    assert (kinds.count("white"), kinds.count("parallelogram"), kinds.count("branch")) == (3, 3, 1)


def test_cli_rigid(capsys):
    assert run(capsys, "rigid", fx("T3.json"))[0] == 0
    code, out, _ = run(capsys, "rigid", fx("HF-a.json"))
    assert code == 1
    data = json.loads(out)
    assert data["rigid"] is False and data["gentle_cycle"]


def test_cli_theorem(capsys):
    code, out, _ = run(capsys, "theorem", fx("T3.json"))
    assert code == 0 and json.loads(out)["report"] == "1+3=3+1"
    assert run(capsys, "theorem", fx("HF-b.json"))[0] == 1


def test_cli_info(capsys):
    code, out, _ = run(capsys, "info", fx("C5.json"))
    data = json.loads(out)
    assert code == 0 and data["omega"] == "2" and data["att"] == 5 and data["trace"] == ["10", "10", True]


def test_cli_bad_input(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text('{"variant": "M",\n  "r": }', encoding="utf-8")
    code, _, err = run(capsys, "validate", str(p))
    assert code == 2 and "line 2" in err
    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == 2
    p.write_text(json.dumps({"variant": "M", "r": "3", "vertices": [{"a": "2", "b": "1"}], "edges": [],
                             "rays": [{"base": 0, "j": 1, "density": "1"}]}), encoding="utf-8")
    assert run(capsys, "validate", str(p))[0] == 2


def test_cli_dual_and_decompose(tmp_path, capsys):
    d = tmp_path / "d.json"
    assert run(capsys, "dual", fx("T3.json"), "-o", str(d))[0] == 0
    code, out, _ = run(capsys, "dual", str(d))
    assert out == Path(fx("T3.json")).read_text(encoding="utf-8")
    code, out, _ = run(capsys, "decompose", fx("C5.json"), "-o", str(tmp_path / "dec"))
    man = json.loads((tmp_path / "dec" / "manifest.json").read_text(encoding="utf-8"))
    assert code == 0 and man["ext"] == 2 and len(man["components"]) == 2
    assert run(capsys, "decompose", fx("HF-a.json"), "-o", str(tmp_path / "x"))[0] == 1


def test_cli_hive_puzzle_render(tmp_path, capsys):
    code, out, _ = run(capsys, "hive", fx("T3.json"), "--at", "3", "0")
    assert code == 0 and json.loads(out)["f"] == "2"
    code, out, _ = run(capsys, "hive", fx("T3.json"), "--lattice")
    assert json.loads(out)["n"] == 3
    code, out, _ = run(capsys, "puzzle", fx("T3.json"), "--svg", str(tmp_path / "p.svg"))
    assert json.loads(out)["size"] == "4" and (tmp_path / "p.svg").exists()
    assert run(capsys, "render", fx("T3.json"), "--svg", str(tmp_path / "m.svg"))[0] == 0
    ET.parse(tmp_path / "m.svg")


def test_cli_perturb_and_phi(tmp_path, capsys):
    code, out, _ = run(capsys, "perturb", fx("T3.json"), "--r", "3", "--x", "1/2", "1", "3/2", "--no-delta-check")
    assert code == 0 and '"b": "1/2"' in out
    assert run(capsys, "perturb", fx("T3.json"), "--r", "3", "--x", "1/2", "1", "3/2")[0] == 2
    code, out, _ = run(capsys, "phi", fx("T3.json"))
    assert code == 0 and json.loads(out)["value0"] == ["3", "1", "1", "1"]


def test_cli_gen_corpus_fixtures(tmp_path, capsys):
    g1, g2 = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gen", "--branches", "4", "--seed", "5", "-o", str(g1), "--tree", str(tmp_path / "t.json"))
    run(capsys, "gen", "--branches", "4", "--seed", "5", "-o", str(g2))
    assert g1.read_bytes() == g2.read_bytes()
    assert run(capsys, "validate", str(g1))[0] == 0
    code, out, _ = run(capsys, "corpus", "--seed", "3", "--count", "4", "--sums", "1", "--max-branches", "4",
                       "--report", str(tmp_path / "r.json"))
    assert code == 0 and json.loads(out)["falsification_count"] == 0
    assert run(capsys, "fixtures", "--check")[0] == 0
    assert run(capsys, "fixtures", "-o", str(tmp_path / "fx"))[0] == 0
    assert (tmp_path / "fx" / "HF-a.json").read_text(encoding="utf-8") == Path(fx("HF-a.json")).read_text(encoding="utf-8")
