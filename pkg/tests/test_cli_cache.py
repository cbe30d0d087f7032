import json
from pathlib import Path

import pytest

from kahlerstar.cache import (
    ENV_VAR,
    FORMAT_VERSION,
    CacheEntry,
    GraphCache,
    build_entry,
    default_cache_dir,
    entry_weight_check,
    serialize,
)
from kahlerstar.cli import main, parse_point, CliError

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_VAR, str(tmp_path / "cache"))
    return tmp_path / "cache"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- cache -------------------------------------------------------------------------


def test_cache_round_trip_is_byte_identical(tmp_path):
    cache = GraphCache(tmp_path / "c")
    first = cache.get(2, 3)
    path = cache.path(2, 3)
    data = path.read_bytes()
    path.unlink()
    again = cache.get(2, 3)
    assert path.read_bytes() == data
    assert again == first
    assert serialize(first) == data
    assert entry_weight_check(first)
    assert not list((tmp_path / "c").glob("*.tmp"))


def test_cache_payload_contents():
    entry = build_entry(2, 2)
    assert len(entry.forms) == 5
    assert sorted(entry.automorphisms) == [1, 2, 2, 2, 2]
    assert entry.max_external_degree() == [2, 2]
    assert CacheEntry.from_json(entry.to_json()) == entry


def test_cache_version_mismatch_regenerates(tmp_path):
    cache = GraphCache(tmp_path)
    cache.get(2, 1)
    path = cache.path(2, 1)
    data = json.loads(path.read_text())
    data["format"] = "graphs-0"
    path.write_text(json.dumps(data))
    assert cache.load(2, 1) is None
    assert cache.get(2, 1).forms == build_entry(2, 1).forms
    assert json.loads(path.read_text())["format"] == FORMAT_VERSION


def test_disabled_cache_writes_nothing(tmp_path):
    cache = GraphCache(tmp_path / "off", enabled=False)
    cache.get(2, 1)
    assert not (tmp_path / "off").exists()


def test_env_var_sets_default_dir(isolated_cache):
    assert default_cache_dir() == isolated_cache


# -- cli ---------------------------------------------------------------------------


def test_graphs_counts(capsys):
    for k, rows in ((0, 1), (1, 1), (2, 5)):
        code, out, _ = run(capsys, "graphs", "--n", "2", "--k", str(k))
        assert code == 0
        assert out.strip().endswith(f"{rows} graph(s) in A_2({k})")


def test_graphs_json_golden(capsys, isolated_cache):
    code, out, _ = run(capsys, "graphs", "--n", "2", "--k", "2", "--format", "json")
    assert code == 0
    assert out == (GOLDEN / "graphs_n2_k2.json").read_text()
    assert list(isolated_cache.glob("A_n2_k2.*.json"))


def test_graphs_bound_refusal(capsys):
    code, _, err = run(capsys, "graphs", "--n", "2", "--k", "5")
    assert code == 2
    assert "k <= 4" in err
    code, _, err = run(capsys, "graphs", "--n", "3", "--k", "4")
    assert code == 2 and "k <= 3" in err


def test_star_value_golden(capsys):
    code, out, _ = run(capsys, "star", "--builtin", "flat", "--f1", "zb1", "--f2", "z1",
                       "--point", "0", "--order", "3", "--format", "json")
    assert code == 0
    assert out == (GOLDEN / "star_flat_zb_z.json").read_text()
    coeffs = json.loads(out)["coefficients"]
    assert [c["value"]["re"] for c in coeffs] == [0, 1, 0, 0]


def test_star_latex_golden(capsys):
    code, out, _ = run(capsys, "star", "--latex", "--order", "1", "--format", "json")
    assert code == 0
    assert out == (GOLDEN / "star_latex_order1.jsonl").read_text()


def test_star_latex_text(capsys):
    code, out, _ = run(capsys, "star", "--latex", "--order", "1")
    assert out.splitlines()[1] == "D_{1} = g^{\\bar{q} p} \\partial_{\\bar{q}} f_{1} \\partial_{p} f_{2}"


def test_star_holomorphic_left_factor_is_pointwise(capsys):
    code, out, _ = run(capsys, "star", "--builtin", "fubini-study", "--f1", "z1^2",
                       "--f2", "zb1*z1 + zb1^2", "--point", "0.2+0.1i", "--order", "3",
                       "--format", "json")
    coeffs = json.loads(out)["coefficients"]
    z = 0.2 + 0.1j
    expected = z ** 2 * (z.conjugate() * z + z.conjugate() ** 2)
    assert coeffs[0]["value"]["re"] == pytest.approx(expected.real)
    assert coeffs[0]["value"]["im"] == pytest.approx(expected.imag)
    assert all(abs(c["value"]["re"]) + abs(c["value"]["im"]) < 1e-12 for c in coeffs[1:])


def test_star_chart_file_and_phi(capsys, tmp_path):
    chart = tmp_path / "disc.json"
    chart.write_text(json.dumps({"m": 1, "potentials": {"-1": "-log(1 - z1*zb1)"}}))
    code, out, _ = run(capsys, "star", "--chart", str(chart), "--phi", "0=z1*zb1",
                       "--f1", "zb1", "--f2", "z1", "--point", "0.1", "--order", "2")
    assert code == 0
    assert "Phi_0 = z1*zb1" in out


def test_star_errors(capsys, tmp_path):
    code, _, err = run(capsys, "star", "--f1", "z1 + * 2", "--f2", "z1")
    assert code == 2 and "column 6" in err
    chart = tmp_path / "flat4.json"
    chart.write_text(json.dumps({"m": 1, "potentials": {"-1": "z1^2*zb1^2"}}))
    code, _, err = run(capsys, "star", "--chart", str(chart), "--f1", "z1",
                       "--f2", "z1", "--point", "0")
    assert code == 2 and "singular" in err
    code, _, err = run(capsys, "star", "--builtin", "hyperbolic-disc", "--f1", "z1",
                       "--f2", "z1", "--point", "1")
    assert code == 2 and "logarithm" in err
    code, _, err = run(capsys, "star", "--f1", "z1")
    assert code == 2


def test_parse_point():
    assert parse_point("0.3+0.1i", 2) == (0.3 + 0.1j, 0.3 + 0.1j)
    assert parse_point("1, 2j", 2) == (1, 2j)
    with pytest.raises(CliError):
        parse_point("1,2,3", 2)
    with pytest.raises(CliError):
        parse_point("abc", 1)


def test_verify_writes_jsonl(capsys, tmp_path):
    report = tmp_path / "r.jsonl"
    code, out, _ = run(capsys, "verify", "--suite", "wick", "--report", str(report), "--quiet")
    assert code == 0
    lines = [json.loads(x) for x in report.read_text().splitlines()]
    assert [x["name"] for x in lines] == ["wick", "wick"]
    assert all(x["passed"] and x["max_residual"] <= 1e-12 for x in lines)


def test_verify_chart_option(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "assoc", "--chart", "fubini-study",
                       "--order", "2", "--quiet")
    assert code == 0
    assert "assoc" in out


def test_report_writes_tables_and_figures(capsys, tmp_path):
    out_dir = tmp_path / "rep"
    code, _, _ = run(capsys, "report", "--out", str(out_dir), "--suite", "first-order",
                     "--gallery-k", "1", "--quiet")
    assert code == 0
    for name in ("reports.jsonl", "summary.csv", "residuals.png", "graphs_n2_k0.png",
                 "graphs_n2_k1.png", "graphs_n2_k1.csv"):
        assert (out_dir / name).stat().st_size > 0
    assert (out_dir / "residuals.png").read_bytes()[:4] == b"\x89PNG"
    header = (out_dir / "summary.csv").read_text().splitlines()[0]
    assert header == "check,parameters,max_residual,tolerance,passed,seed"
