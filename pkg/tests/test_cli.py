import json
import math
from pathlib import Path

import numpy as np
import pytest

from wavesign import io as wio
from wavesign.cli import main, resolve_config
from wavesign.signal import Signal

DATA = Path(__file__).parent / "data"
BUNDLED = Path(__file__).parents[1] / "src" / "wavesign" / "data" / "test_signal.csv"


def run(*args):
    return main([str(a) for a in args])


def _table(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    return lines[0].split(","), np.loadtxt(lines[1:], delimiter=",", ndmin=2)


def test_transform_zero_signal(tmp_path):
    mags = tmp_path / "m.csv"
    assert run("transform", "--generator", "zero", "--mags", mags, "--coeffs", tmp_path / "c.csv") == 0
    header, data = _table(mags)
    assert header[-3:] == ["m1", "m2", "m3"]
    assert np.all(data[:, 4:] == 0)


def test_transform_golden(tmp_path):
    c, m = tmp_path / "c.csv", tmp_path / "m.csv"
    assert run("transform", "--input", BUNDLED, "--coeffs", c, "--mags", m) == 0
    for got, gold in ((c, DATA / "golden_coefficients.csv"), (m, DATA / "golden_magnitudes.csv")):
        h1, d1 = _table(got)
        h2, d2 = _table(gold)
        assert h1 == h2 and d1.shape == d2.shape
        assert np.max(np.abs(d1 - d2)) <= 1e-10


def test_transform_channels_independent(tmp_path):
    run("transform", "--seed", 3, "--mags", tmp_path / "all.csv", "--coeffs", tmp_path / "c.csv",
        "--wavelets", "poisson,hpoisson,combo:1,1")
    cols = []
    for i, w in enumerate(("poisson", "hpoisson", "combo:1,1")):
        out = tmp_path / f"m{i}.csv"
        run("transform", "--seed", 3, "--mags", out, "--coeffs", tmp_path / f"c{i}.csv", "--wavelets", w)
        cols.append(_table(out)[1][:, 4])
    _, full = _table(tmp_path / "all.csv")
    assert np.array_equal(full[:, 4:], np.column_stack(cols))


def test_transform_json_format(tmp_path):
    assert run("transform", "--format", "json", "--mags", tmp_path / "m.json",
               "--coeffs", tmp_path / "c.json") == 0
    mf, meta = wio.read_magnitudes(tmp_path / "m.json")
    assert mf.width == 3 and meta["seed"] == 0


def _round_trip(tmp_path, *extra, seed=5):
    sig = tmp_path / "f.csv"
    mags = tmp_path / "m.csv"
    assert run("transform", "--seed", seed, "--signal-out", sig, "--mags", mags,
               "--coeffs", tmp_path / "c.csv") == 0
    out = tmp_path / "rec.csv"
    rep = tmp_path / "rep.json"
    code = run("retrieve", "--mags", mags, "--out", out, "--report", rep, "--truth", sig, *extra)
    return code, wio.read_signal(sig), wio.read_signal(out), json.loads(rep.read_text())


def test_retrieve_round_trip(tmp_path):
    code, f, g, rep = _round_trip(tmp_path)
    assert code == 0
    assert rep["relative_error"] <= 1e-3
    assert rep["contract_void"] is False
    assert rep["version"] and rep["seed"] == 0 and rep["source_seed"] == 5
    assert {"resolved", "deferred", "ambiguous", "residual"} <= set(rep)


def test_retrieve_minus_f_identical(tmp_path):
    f = wio.read_signal(BUNDLED)
    neg = tmp_path / "neg.csv"
    wio.write_signal(neg, Signal(-f.samples.real, f.dx, f.x0))
    outs = []
    for name, src in (("pos", BUNDLED), ("neg", neg)):
        mags = tmp_path / f"{name}_m.csv"
        run("transform", "--input", src, "--mags", mags, "--coeffs", tmp_path / f"{name}_c.csv")
        out = tmp_path / f"{name}_rec.csv"
        assert run("retrieve", "--mags", mags, "--out", out, "--report", tmp_path / f"{name}.json") == 0
        outs.append(out)
    # magnitudes of f and -f agree bit for bit, so the files do too
    assert (tmp_path / "pos_m.csv").read_text() == (tmp_path / "neg_m.csv").read_text()
    assert outs[0].read_text() == outs[1].read_text()


def test_retrieve_flip_pointwise(tmp_path):
    _, _, g, _ = _round_trip(tmp_path)
    out = tmp_path / "flip.csv"
    assert run("retrieve", "--mags", tmp_path / "m.csv", "--out", out, "--report",
               tmp_path / "flip.json", "--flip-pointwise") == 0
    h = wio.read_signal(out)
    assert np.max(np.abs(h.samples + g.samples)) <= 1e-10 * np.max(np.abs(g.samples))


def test_retrieve_ablation(tmp_path):
    mags = tmp_path / "m2.csv"
    run("transform", "--wavelets", "poisson,hpoisson", "--mags", mags, "--coeffs", tmp_path / "c.csv")
    rep = tmp_path / "r.json"
    code = run("retrieve", "--mags", mags, "--out", tmp_path / "o.csv", "--report", rep,
               "--ablation", "--max-iter", 3)
    assert code in (0, 3)
    assert json.loads(rep.read_text())["contract_void"] is True


def test_retrieve_signs_file(tmp_path):
    _round_trip(tmp_path)
    signs = tmp_path / "s.csv"
    assert run("retrieve", "--mags", tmp_path / "m.csv", "--out", tmp_path / "o.csv",
               "--report", tmp_path / "r.json", "--signs", signs) == 0
    sf = wio.read_sign_field_csv(signs)
    assert set(np.unique(sf.eps).tolist()) <= {-1, 0, 1}


def test_density_fig1(tmp_path):
    out = tmp_path / "d.json"
    assert run("density", "--alpha", 2, "--beta", 4 * math.pi / (5 * math.log(2)), "-p", 1,
               "--w", "6", "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["sign_retrieval_unique"]["value"] is True
    assert rep["bergman_sampling"]["6"]["sampling"] is False
    assert rep["version"] and "config" in rep


def test_counterexample(tmp_path):
    assert run("counterexample", "--out-dir", tmp_path, "--seed", 2) == 0
    rep = json.loads((tmp_path / "counterexample.json").read_text())
    assert rep["max_scalogram_gap"] <= 1e-10 * rep["max_magnitude"]
    assert rep["phase_distance"] > 0.1
    f = wio.read_signal(tmp_path / "counterexample_f.csv")
    g = wio.read_signal(tmp_path / "counterexample_g.csv")
    assert np.array_equal(g.samples, np.conj(f.samples))


def test_framebounds(tmp_path):
    out = tmp_path / "fb.json"
    assert run("framebounds", "--d", math.pi, "--trials", 1, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["A_est"] > 0 and rep["d"] == pytest.approx(math.pi)


def test_selftest(capsys):
    assert run("selftest") == 0
    assert "FAIL" not in capsys.readouterr().out


def test_exit_codes(tmp_path):
    assert run("transform", "--input", tmp_path / "missing.csv") == 2
    assert run("transform", "--wavelets", "morlet", "--mags", tmp_path / "m.csv",
               "--coeffs", tmp_path / "c.csv") == 2
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"no_such_key": 1}))
    assert run("density", "--config", cfg) == 2
    with pytest.raises(SystemExit) as info:
        run("transform", "--bogus")
    assert info.value.code == 2
    # a one-step loop cannot settle: reported as non-convergence
    _round_trip(tmp_path)
    assert run("retrieve", "--mags", tmp_path / "m.csv", "--out", tmp_path / "o.csv",
               "--report", tmp_path / "r.json", "--max-iter", 1, "--tol", 0) == 3


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 3.0, "p": 2.0}))
    merged = resolve_config("density", {"config": str(cfg), "p": 1.5})
    assert merged["alpha"] == 3.0 and merged["p"] == 1.5
    out = tmp_path / "d.json"
    assert run("density", "--config", cfg, "-p", 0.5, "--out", out) == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["alpha"] == 3.0 and rep["config"]["p"] == 0.5


def test_transform_config_out(tmp_path):
    cfg = tmp_path / "retrieve.json"
    sig = tmp_path / "f.csv"
    mags = tmp_path / "m.csv"
    run("transform", "--seed", 8, "--signal-out", sig, "--mags", mags, "--coeffs", tmp_path / "c.csv",
        "--config-out", cfg)
    rep = tmp_path / "r.json"
    assert run("retrieve", "--config", cfg, "--out", tmp_path / "o.csv", "--report", rep) == 0
    assert json.loads(rep.read_text())["relative_error"] <= 1e-3


def test_deterministic(tmp_path):
    for i in range(2):
        run("transform", "--seed", 11, "--mags", tmp_path / f"m{i}.csv", "--coeffs", tmp_path / f"c{i}.csv")
    assert (tmp_path / "m0.csv").read_text() == (tmp_path / "m1.csv").read_text()
