import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ecgd import raster
from ecgd.cli import FEATURE_COLUMNS, main, output_dirs, signal_csv
from ecgd.calibrate import Signal
from ecgd.pipeline import LEAD_STAGES, PAGE_STAGES

from conftest import sheet

THREE = ("I", "II", "III")


@pytest.fixture(scope="module")
def scan(tmp_path_factory):
    d = tmp_path_factory.mktemp("scan")
    _, img, truth = sheet(THREE, duration_ms=2000.0)
    path = d / "page.png"
    raster.save_image(img, path)
    return path, truth


def read_manifest(d):
    return json.loads((d / "manifest.json").read_text())


def test_digitize_writes_leads_and_manifest(scan, tmp_path):
    path, truth = scan
    assert main(["digitize", str(path), "--out", str(tmp_path)]) == 0
    out = tmp_path / "page"
    m = read_manifest(out)
    assert m["schema_version"] == 1 and m["status"] == "ok"
    assert m["px_per_mm_source"] == "grid"
    assert abs(m["px_per_mm"] - 23.622) / 23.622 <= 0.02
    assert [ld["name"] for ld in m["leads"]] == ["lead_0", "lead_1", "lead_2"]
    for ld in m["leads"]:
        r0, r1 = ld["stripe_rows"]
        c0, c1 = ld["roi_cols"]
        assert 0 <= r0 <= r1 < m["image"]["height"]
        assert 0 <= c0 <= c1 < m["image"]["width"]
        rows = list(csv.reader((out / ld["file"]).read_text().splitlines()))
        assert rows[0] == ["t_ms", "v_mv"]
        assert len(rows) - 1 == ld["samples"]
        assert float(rows[1][0]) == 0.0


def test_json_format(scan, tmp_path):
    path, _ = scan
    assert main(["digitize", str(path), "--out", str(tmp_path), "--format", "json"]) == 0
    doc = json.loads((tmp_path / "page" / "00_lead_0.json").read_text())
    assert len(doc["t_ms"]) == len(doc["v_mv"]) > 100


def test_override_skips_pitch_estimation(scan, tmp_path):
    path, _ = scan
    assert main(["digitize", str(path), "--out", str(tmp_path), "--px-per-mm", "23.62"]) == 0
    m = read_manifest(tmp_path / "page")
    assert m["px_per_mm_source"] == "override"
    assert m["px_per_mm"] == 23.62 and m["grid"] is None


def test_grayscale_scan_fails_at_grid_mask(scan, tmp_path):
    path, _ = scan
    gray = np.repeat(raster.to_grayscale(raster.load_image(path))[..., None], 3, axis=2)
    raster.save_image(gray, tmp_path / "gray.png")
    assert main(["digitize", str(tmp_path / "gray.png"), str(path), "--out", str(tmp_path / "o")]) == 1
    m = read_manifest(tmp_path / "o" / "gray")
    assert m["status"] == "error"
    assert m["error"]["stage"] == "grid_mask"
    assert "no grid detected" in m["error"]["message"]
    # the batch went on to the good input
    assert read_manifest(tmp_path / "o" / "page")["status"] == "ok"


def test_unreadable_input(tmp_path):
    (tmp_path / "junk.png").write_bytes(b"not an image")
    assert main(["digitize", str(tmp_path / "junk.png"), "--out", str(tmp_path / "o")]) == 1
    assert read_manifest(tmp_path / "o" / "junk")["error"]["stage"] == "load"


def test_debug_images_in_stage_order(scan, tmp_path):
    path, _ = scan
    assert main(["digitize", str(path), "--out", str(tmp_path), "--debug-images"]) == 0
    dbg = tmp_path / "page" / "debug"
    page = sorted(p.name for p in dbg.iterdir() if p.is_file())
    assert page == [f"{i + 1:02d}_{s}.png" for i, s in enumerate(PAGE_STAGES)]
    lead_dirs = sorted(p.name for p in dbg.iterdir() if p.is_dir())
    assert lead_dirs == ["00_lead_0", "01_lead_1", "02_lead_2"]
    first = len(PAGE_STAGES)
    assert sorted(p.name for p in (dbg / lead_dirs[0]).iterdir()) == \
        [f"{first + i + 1:02d}_{s}.png" for i, s in enumerate(LEAD_STAGES)]


def test_same_stem_twice_gets_two_dirs(tmp_path):
    dirs = output_dirs(["a/x.png", "b/x.png", "y.ppm"], tmp_path)
    assert [d.name for d in dirs] == ["x", "x_1", "y"]


def test_csv_formatting():
    sig = Signal(0, np.array([0.0, 1.6]), np.array([-0.0, 1 / 3]))
    assert signal_csv(sig) == b"t_ms,v_mv\n0.000000,0.000000\n1.600000,0.333333\n"


def test_synth_subcommand(tmp_path):
    spec = {"leads": [{"name": "I", "samples_mv": [0.0, 0.3, 0.0], "ms_per_sample": 400.0}],
            "label_glyphs": True}
    (tmp_path / "one.json").write_text(json.dumps(spec))
    assert main(["synth", "--spec", str(tmp_path / "one.json"), "--blur", "0.5",
                 "--desaturate", "0.1", "--rotate", "0.2", "--out", str(tmp_path)]) == 0
    img = raster.load_image(tmp_path / "one.png")
    truth = json.loads((tmp_path / "one.truth.json").read_text())
    assert (truth["height"], truth["width"]) == img.shape[:2]


def test_synth_invalid_spec(tmp_path):
    (tmp_path / "bad.json").write_text(json.dumps({"leads": [], "bogus": 1}))
    assert main(["synth", "--spec", str(tmp_path / "bad.json"), "--out", str(tmp_path)]) == 1


def test_feature_stats(scan, capsys):
    path, _ = scan
    assert main(["feature-stats", str(path), "--stripe", "1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == ",".join(FEATURE_COLUMNS)
    rows = list(csv.reader(lines[1:]))
    assert rows and all(len(r) == len(FEATURE_COLUMNS) for r in rows)
    areas = [int(r[1]) for r in rows]
    assert areas == sorted(areas, reverse=True)


def test_feature_stats_bad_stripe(scan):
    path, _ = scan
    assert main(["feature-stats", str(path), "--stripe", "9"]) == 1


def test_bad_arguments_exit_2(tmp_path):
    for argv in (["digitize", "--out", str(tmp_path)], ["digitize", "x.png", "--out", "o", "--mv-per-mm", "-1"],
                 ["nonsense"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "ecgd", "digitize", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 2
    assert "usage" in res.stderr
