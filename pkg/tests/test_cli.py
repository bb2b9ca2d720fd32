import csv
import io
import math

import pytest

from listved.cli import main
from listved.geometry import gram_of, simplex_vectors


def tetrahedron_rows():
    _, D = gram_of(simplex_vectors(3, 1.0)).dense()
    return "".join(" ".join(repr(float(x)) for x in row) + "\n" for row in D)


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def fields(text):
    return dict(line.split("=", 1) for line in text.splitlines())


@pytest.mark.parametrize(
    "rows, expected",
    [
        ("2 0\n", 1.0),
        ("2 0\n0 2\n", 1.4142136),
        (tetrahedron_rows(), 0.6123724),
    ],
)
def test_ved_command(tmp_path, capsys, rows, expected):
    f = tmp_path / "v.txt"
    f.write_text(rows)
    rc, out, _ = run(capsys, "ved", str(f))
    assert rc == 0
    assert float(fields(out)["ved"]) == pytest.approx(expected, abs=1e-7)


def test_ved_iterative_and_rank(tmp_path, capsys):
    f = tmp_path / "v.txt"
    f.write_text("2 0\n3 0\n")
    rc, out, _ = run(capsys, "ved", str(f), "--strategy", "iterative")
    info = fields(out)
    assert rc == 0 and info["rank"] == "1" and info["active"] == "1"
    assert float(info["ved"]) == 1.5


def test_ved_missing_file(capsys):
    rc, _, err = run(capsys, "ved", "/nonexistent/vectors.txt")
    assert rc != 0
    assert err.startswith("listved: error:") and err.count("\n") == 1


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_code_ved(capsys):
    rc, out, _ = run(capsys, "code-ved", "--code", "gens=5,7", "--L", "1,2,3", "--window", "8")
    rows = read_rows(out)
    assert rc == 0
    assert float(rows[0]["min_ved"]) == pytest.approx(math.sqrt(5), rel=1e-8)
    vals = [float(r["min_ved"]) for r in rows]
    assert vals == sorted(vals)
    assert all(r["exact"] == "true" for r in rows)


def test_code_ved_node_cap(capsys):
    rc, out, _ = run(capsys, "code-ved", "--code", "gens=5,7", "--L", "3", "--node-cap", "2")
    assert rc == 0 and read_rows(out)[0]["exact"] == "false"


def test_min_list(capsys):
    rc, out, err = run(capsys, "min-list", "--code", "gens=5,7", "--depth", "4")
    assert rc == 0
    assert "B*=3" in err
    assert len(read_rows(out)) == 3


def test_sweep(tmp_path, capsys):
    svg = tmp_path / "p.svg"
    csv_path = tmp_path / "p.csv"
    rc, _, _ = run(capsys, "sweep", "--code", "gens=5,7", "--ebno-grid", "3:6:1", "--trials", "2000",
                   "--info-len", "50", "--svg", str(svg), "--out", str(csv_path))
    assert rc == 0
    rows = read_rows(csv_path.read_text())
    assert [float(r["ebno_db"]) for r in rows] == [3, 4, 5, 6]
    assert list(rows[0]) == ["ebno_db", "decoder", "L", "trials", "ce_count", "p_ce", "ci95", "asymptote"]
    for r in rows:
        assert float(r["p_ce"]) == pytest.approx(int(r["ce_count"]) / int(r["trials"]), rel=1e-8)
    text = svg.read_text()
    assert text.startswith("<svg") and "<circle" in text and "href" not in text


def test_sweep_empty_grid(capsys):
    rc, _, err = run(capsys, "sweep", "--code", "gens=5,7", "--ebno-grid", "")
    assert rc != 0 and "grid" in err


def test_csv_round_trip(capsys):
    rc, out, _ = run(capsys, "simulate", "--code", "gens=5,7", "--ebno", "2.5", "--trials", "3000",
                     "--info-len", "20", "--seed", "3")
    row = read_rows(out)[0]
    again = ",".join(f"{float(row[k]):.9g}" for k in ("ebno_db", "p_ce", "ci95", "asymptote"))
    assert again == ",".join(row[k] for k in ("ebno_db", "p_ce", "ci95", "asymptote"))


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# simulation\ncode = gens=5,7\nebno = 60\ntrials = 1500\ninfo_len = 10\nseed = 4\n")
    rc, out, _ = run(capsys, "simulate", "--config", str(cfg))
    row = read_rows(out)[0]
    assert rc == 0 and row["trials"] == "1500" and row["ce_count"] == "0"
    rc, out, _ = run(capsys, "simulate", "--config", str(cfg), "--trials", "1000")
    assert read_rows(out)[0]["trials"] == "1000"


@pytest.mark.parametrize(
    "text",
    ["code = gens=5,7\nebno = 3\nbogus = 1\n", "code = gens=5,7\nebno = 3\ntrials = 0\n",
     "code = gens=5,7\nebno = 3\nwindow = 2\nsvg = x.svg\n", "code gens\n"],
)
def test_config_rejected(tmp_path, capsys, text):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(text)
    rc, _, err = run(capsys, "simulate", "--config", str(cfg))
    assert rc != 0 and "listved: error:" in err


def test_bad_code(capsys):
    rc, _, err = run(capsys, "code-ved", "--code", "gens=5,9")
    assert rc != 0 and err.count("\n") == 1
