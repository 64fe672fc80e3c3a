import json

import pytest

from qfslice.cli import ConfigError, main, parse_complex


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    report = json.loads(out.out) if out.out.strip().startswith("{") else None
    return code, report, out.err


def strip_timing(r):
    return {k: v for k, v in r.items() if k != "timing"}


@pytest.mark.parametrize(
    "text, value",
    [
        ("0.4+0.4i", 0.4 + 0.4j),
        ("0.4 + 0.4i", 0.4 + 0.4j),
        ("-1 - 2i", -1 - 2j),
        ("3", 3),
        ("+2i", 2j),
        ("-i", -1j),
        ("1e-3+2.5e1j", 0.001 + 25j),
        (" .5-.25i ", 0.5 - 0.25j),
    ],
)
def test_parse_complex(text, value):
    assert parse_complex(text) == value


@pytest.mark.parametrize("text", ["", "0.4+", "1+2", "abc", "1+2k", "i+1", "++1"])
def test_parse_complex_rejects(text):
    with pytest.raises(ConfigError):
        parse_complex(text)


def test_scan_outputs(capsys, tmp_path):
    pgm, csv_path, fig, js = tmp_path / "s.pgm", tmp_path / "s.csv", tmp_path / "s.png", tmp_path / "s.json"
    code, r, _ = run(
        capsys, "scan", "--l", "4.13", "--re-min", "-2", "--re-max", "10", "--nx", "24", "--ny", "16",
        "--out", str(pgm), "--csv", str(csv_path), "--figure", str(fig), "--json", str(js),
    )
    assert code == 0
    assert pgm.read_bytes().startswith(b"P5\n24 16\n255\n")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "re,im,verdict,label" and len(lines) == 24 * 16 + 1
    assert fig.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert sum(r["histogram"].values()) == 24 * 16
    assert r["version"] and r["config"]["l"] == 4.13 and "wall_seconds" in r["timing"]
    assert json.loads(js.read_text()) == r


def test_scan_overlay_is_ppm(capsys, tmp_path):
    p = tmp_path / "s.ppm"
    code, _, _ = run(capsys, "scan", "--l", "2", "--nx", "10", "--ny", "8", "--overlay-pp", "--out", str(p))
    assert code == 0 and p.read_bytes().startswith(b"P6\n10 8\n255\n")


def test_scan_workers_identical(capsys, tmp_path, monkeypatch):
    outs = []
    for w in ("1", "3"):
        p = tmp_path / f"w{w}.pgm"
        monkeypatch.setenv("QFSLICE_WORKERS", w)
        code, r, _ = run(capsys, "scan", "--l", "4.13", "--nx", "20", "--ny", "12", "--out", str(p))
        assert code == 0 and r["config"]["workers"] == int(w)
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]


def test_config_errors(capsys):
    assert run(capsys, "scan")[0] == 2
    assert run(capsys, "scan", "--l", "-1")[0] == 2
    assert run(capsys, "scan", "--l", "1", "--nx", "0")[0] == 2
    assert run(capsys, "scan", "--l", "1", "--workers", "0")[0] == 2
    assert run(capsys, "scan", "--l", "1", "--node-cap", "0")[0] == 2
    assert run(capsys, "ray", "--l", "2", "--slope", "1/0")[0] == 2
    assert run(capsys, "ray", "--l", "2", "--slope", "x")[0] == 2
    assert run(capsys, "limitset", "--l", "6", "--tau", "0.4+")[0] == 2
    assert run(capsys, "limitset", "--l", "6", "--tau", "0", "--max-word-len", "21")[0] == 2
    assert run(capsys, "components", "--l", "2", "--re-min", "0", "--re-max", "3")[0] == 2
    assert run(capsys, "bogus")[0] == 2


def test_env_workers_invalid(capsys, monkeypatch):
    monkeypatch.setenv("QFSLICE_WORKERS", "many")
    assert run(capsys, "scan", "--l", "1", "--nx", "4", "--ny", "4")[0] == 2


def test_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "scan", "--l", "1", "--nx", "4", "--ny", "4", "--out", str(tmp_path / "no" / "x.pgm"))
    assert code == 1 and "x.pgm" in err


def test_components_deterministic(capsys):
    args = ("components", "--l", "16", "--re-min", "-4", "--re-max", "20", "--nx", "120", "--ny", "48")
    c1, r1, _ = run(capsys, *args)
    c2, r2, _ = run(capsys, *args)
    assert c1 == c2 == 0
    assert strip_timing(r1) == strip_timing(r2)
    assert r1["standard"]
    assert {"standard", "nonstandard_count", "truncated", "components"} <= set(r1)


def test_components_small_l(capsys):
    code, r, _ = run(capsys, "components", "--l", "1.39", "--re-min", "-0.7", "--re-max", "2.1", "--nx", "56", "--ny", "40")
    assert code == 0 and r["standard"] and r["nonstandard_count"] == 0


def test_ray(capsys, tmp_path):
    p, img = tmp_path / "r.csv", tmp_path / "r.ppm"
    code, r, _ = run(
        capsys, "ray", "--l", "2", "--slope", "0/1", "--re-min", "-2", "--re-max", "4",
        "--nx", "30", "--ny", "24", "--csv", str(p), "--out", str(img),
    )
    assert code == 0 and r["segments"]
    rows = p.read_text().splitlines()[1:]
    assert rows and all(abs(float(row.split(",")[2])) < 1e-9 for row in rows)
    assert {row.split(",")[1] for row in rows} == {"+", "-"}
    assert img.read_bytes().startswith(b"P6")


def test_verify_exit_codes(capsys):
    code, r, _ = run(capsys, "verify", "--l", "4.13", "--samples", "60")
    assert code == 0 and r["passed"]
    code, r, _ = run(capsys, "verify", "--l", "1.0", "--samples", "60")
    assert code == 0
    code, r, _ = run(capsys, "verify", "--l", "4.13", "--samples", "40", "--explore-cutoff", "0.1")
    assert code == 3 and not r["passed"]


def test_limitset(capsys, tmp_path):
    csv_path, pgm, fig = tmp_path / "l.csv", tmp_path / "l.pgm", tmp_path / "l.png"
    code, r, _ = run(
        capsys, "limitset", "--l", "6", "--tau", "0", "--max-word-len", "8",
        "--csv", str(csv_path), "--out", str(pgm), "--width", "32", "--height", "20", "--figure", str(fig),
    )
    assert code == 0
    assert r["realness"] <= 1e-6
    assert r["points"] == len(csv_path.read_text().splitlines()) - 1
    assert pgm.read_bytes().startswith(b"P5\n32 20\n255\n")
    assert fig.exists()
    code, r2, _ = run(capsys, "limitset", "--l", "6", "--tau", "0.40+0.40i", "--max-word-len", "8")
    assert code == 0 and r2["realness"] > 1e-3
    assert r2["config"]["tau"] == [0.4, 0.4]


def test_version(capsys):
    from qfslice import __version__

    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out
