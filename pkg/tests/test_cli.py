"""Command line surface: exit codes, file formats, determinism."""

import json
from importlib import resources

import jsonschema
import pytest

from screlax.cli import main


def run(argv):
    return main([str(a) for a in argv])


def load_schema(name):
    text = resources.files("screlax.schemas").joinpath(name).read_text()
    return json.loads(text)


def check(path, schema_name):
    doc = json.loads(path.read_text())
    jsonschema.validate(doc, load_schema(schema_name))
    return doc


@pytest.fixture
def inst_file(tmp_path):
    out = tmp_path / "inst.json"
    assert run(["gen", "--ell", 2, "--seed", 1, "-o", out]) == 0
    return out


def test_gen_schema_and_determinism(tmp_path, inst_file):
    doc = check(inst_file, "instance.json")
    assert doc["ell"] == 2 and doc["seed"] == 1 and doc["kind"] == "general"
    other = tmp_path / "again.json"
    assert run(["gen", "--ell", 2, "--seed", 1, "-o", other]) == 0
    a = json.loads(inst_file.read_text())
    b = json.loads(other.read_text())
    a.pop("generated_at"), b.pop("generated_at")
    assert a == b


def test_gen_symmetric_class(tmp_path):
    out = tmp_path / "sym.json"
    assert run(["gen", "--ell", 3, "--seed", 2, "--class", "symmetric_psd",
                "-o", out]) == 0
    doc = check(out, "instance.json")
    M = doc["M"]
    assert M == [list(r) for r in zip(*M)]


def test_gen_rejects_bad_ell():
    assert run(["gen", "--ell", 0, "-o", "/tmp/x.json"]) == 2


def test_solve_report(tmp_path, inst_file):
    out = tmp_path / "sol.json"
    assert run(["solve", inst_file, "-o", out]) == 0
    doc = check(out, "oracle_report.json")
    assert doc["ell"] == 2
    assert doc["n_solutions"] == len(doc["solutions"])
    for s in doc["solutions"]:
        assert set(s) == {"pattern", "x", "s"}


def test_solve_no_solutions(tmp_path, capsys):
    inst = tmp_path / "none.json"
    inst.write_text(json.dumps({"ell": 1, "M": [[-1.0]], "q": [-1.0]}))
    out = tmp_path / "sol.json"
    assert run(["solve", inst, "-o", out]) == 0
    assert json.loads(out.read_text())["n_solutions"] == 0
    assert "no solutions" in capsys.readouterr().err


def test_run_trace_schema(tmp_path, inst_file):
    out = tmp_path / "trace.json"
    assert run(["run", "-i", inst_file, "--form", "mip_alpha",
                "--mode", "ssilp", "--max-iter", 1, "--probes", 4,
                "--seed", 0, "-o", out]) == 0
    doc = check(out, "trace.json")
    assert doc["mode"] == "ssilp" and doc["form"] == "mip_alpha"
    assert doc["iterations"][0]["k"] == 0


def test_run_homog_needs_binary_block(tmp_path, inst_file):
    out = tmp_path / "trace.json"
    assert run(["run", "-i", inst_file, "--form", "lcp_alpha_explicit",
                "--mode", "homog_lp", "-o", out]) == 2


def test_run_determinism(tmp_path, inst_file):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert run(["run", "-i", inst_file, "--form", "mip_alpha",
                    "--mode", "homog_lp", "--probes", 4, "--seed", 3,
                    "-o", out]) == 0
        doc = json.loads(out.read_text())
        doc.pop("generated_at"), doc.pop("wall_time")
        outs.append(doc)
    assert outs[0] == outs[1]


def test_hull_float_and_compare(tmp_path, inst_file):
    out = tmp_path / "hull.json"
    assert run(["hull", "-i", inst_file, "--max-iter", 2,
                "--compare-dominance", "-o", out]) == 0
    doc = check(out, "hull.json")
    assert doc["arith"] == "float"
    assert doc["dominance"]["all_ok"] is True
    assert len(doc["facets"]) == 3  # seed list plus one per round


def test_hull_zero_iterations_echoes_seed(tmp_path, inst_file):
    out = tmp_path / "hull.json"
    assert run(["hull", "-i", inst_file, "--max-iter", 0, "-o", out]) == 0
    doc = check(out, "hull.json")
    assert len(doc["facets"]) == 1
    assert doc["trace"]["iterations"][-1]["k"] == 0


def test_hull_rational(tmp_path):
    inst = tmp_path / "one.json"
    assert run(["gen", "--ell", 1, "--seed", 0, "-o", inst]) == 0
    out = tmp_path / "hull.json"
    assert run(["hull", "-i", inst, "--arith", "rational", "--max-iter", 1,
                "-o", out]) == 0
    doc = check(out, "hull.json")
    assert doc["arith"] == "rational"
    sup = doc["trace"]["iterations"][-1]["supports"]
    assert all("/" in v or v.lstrip("-").isdigit() for v in sup.values())


def test_hull_jobs_agree(tmp_path, inst_file):
    docs = []
    for jobs in (1, 2):
        out = tmp_path / f"hull{jobs}.json"
        assert run(["hull", "-i", inst_file, "--max-iter", 1,
                    "--jobs", jobs, "-o", out]) == 0
        doc = json.loads(out.read_text())
        doc.pop("generated_at")
        doc["trace"].pop("wall_time")
        docs.append(doc)
    assert docs[0] == docs[1]


def test_compare_schema(tmp_path, inst_file):
    out = tmp_path / "dom.json"
    assert run(["compare", "-i", inst_file, "-o", out]) == 0
    doc = check(out, "dominance.json")
    assert doc["status"] == "ok" and doc["all_ok"] is True


def test_report_csv_round_trip(tmp_path, inst_file):
    trace = tmp_path / "trace.json"
    assert run(["run", "-i", inst_file, "--form", "mip_alpha",
                "--mode", "ssilp", "--max-iter", 1, "--probes", 3,
                "--seed", 0, "-o", trace]) == 0
    csv_out = tmp_path / "out.csv"
    assert run(["report", "-i", trace, "-o", csv_out]) == 0
    lines = csv_out.read_text().strip().splitlines()
    assert lines[0] == "k,dir_id,support"
    doc = json.loads(trace.read_text())
    n_dirs = len(doc["iterations"][0]["supports"])
    assert len(lines) == 1 + len(doc["iterations"]) * n_dirs


def test_report_accepts_hull_output(tmp_path, inst_file):
    hull = tmp_path / "hull.json"
    assert run(["hull", "-i", inst_file, "--max-iter", 1, "-o", hull]) == 0
    csv_out = tmp_path / "out.csv"
    assert run(["report", "-i", hull, "-o", csv_out]) == 0
    assert csv_out.read_text().startswith("k,dir_id,support")


def test_report_without_iterations(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"hello": 1}))
    assert run(["report", "-i", bad, "-o", tmp_path / "x.csv"]) == 2


def test_usage_errors(tmp_path, inst_file):
    assert run(["solve", tmp_path / "missing.json"]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run(["solve", broken]) == 2
    assert run(["run", "-i", inst_file, "--ell", 2, "--form", "mip_alpha",
                "--mode", "ssilp"]) == 2
    with pytest.raises(SystemExit) as exc:
        run(["run", "-i", inst_file, "--form", "nope", "--mode", "ssilp"])
    assert exc.value.code == 2
