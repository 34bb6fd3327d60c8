import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hoytdf import sweep
from hoytdf.errors import ConfigError, NumericError
from hoytdf.sweep import (
    SnrGrid,
    SweepConfig,
    SweepResult,
    build_scenario,
    config_from_mapping,
    dump_config,
    emit_csv,
    format_csv,
    grid_points,
    parse_config,
    read_csv,
    run_sweep,
)

MINIMAL = """\
m: 4
k: 2
q: 0.3
snr_db: {start: 0, stop: 30, step: 5}
"""


# --- parsing ---------------------------------------------------------------


def test_minimal_document_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.m == (4,) and cfg.k == (2,) and cfg.q == (0.3,)
    assert cfg.snr_db.values() == [0, 5, 10, 15, 20, 25, 30]
    assert cfg.noise == 1.0 and cfg.omega_sd == cfg.omega_sr == cfg.omega_rd == 1.0
    assert cfg.power_s == cfg.power_r == 1.0
    assert cfg.trials == 10**6 and cfg.mode == "analytic"
    assert cfg.snr_links == ("sd", "sr", "rd")


def test_empty_document_is_all_defaults():
    assert parse_config("") == SweepConfig()


def test_per_link_q_gives_inid_scenario():
    cfg = parse_config(MINIMAL + "q_sd: 1.0\nq_sr: [0.3, 0.7]\nq_rd: [0.5, 0.9]\n")
    (pt, *_) = grid_points(cfg)
    sc = build_scenario(cfg, pt)
    assert sc.sd.q == 1.0
    assert [l.q for l in sc.sr] == [0.3, 0.7]
    assert [l.q for l in sc.rd] == [0.5, 0.9]


def test_single_per_relay_value_broadcasts():
    cfg = parse_config("k: [1, 3]\nq_rd: 0.4\n")
    pts = grid_points(cfg)
    assert {p.q_rd for p in pts} == {(0.4,), (0.4, 0.4, 0.4)}


@pytest.mark.parametrize(
    "doc,key,line",
    [
        ("m: 4\nsnr_db: {start: 0, stop: 10, step: -1}\n", "snr_db", 2),
        ("m: 4\nk: 1\nbogus: 3\n", "bogus", 3),
        ("m: 5\n", "m", 1),
        ("k: two\n", "k", 1),
        ("q: [0.5, 1.5]\n", "q", 1),
        ("mode: fast\n", "mode", 1),
        ("trials: 0\n", "trials", 1),
        ("trials: 2.5\n", "trials", 1),
        ("m: []\n", "m", 1),
        ("k: 2\nq_sr: [0.3, 0.4, 0.5]\n", "q_sr", 2),
        ("m: 4\nm: 16\n", "m", 2),
        ("snr_db: {start: 0, end: 3}\n", "snr_db", 1),
        ("snr_links: [sd, xy]\n", "snr_links", 1),
    ],
)
def test_parse_errors_name_key_and_line(doc, key, line):
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.key == key
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_malformed_yaml():
    with pytest.raises(ConfigError):
        parse_config("m: [4, 16\n")


def test_non_mapping_document():
    with pytest.raises(ConfigError):
        parse_config("- 4\n- 16\n")


def test_snr_grid_values():
    assert SnrGrid(0, 1, 0.25).values() == [0, 0.25, 0.5, 0.75, 1.0]
    assert SnrGrid(3, 3, 1).values() == [3.0]


configs = st.builds(
    SweepConfig,
    m=st.lists(st.sampled_from([4, 16, 64]), min_size=1, max_size=3).map(tuple),
    k=st.just((2,)),
    q=st.lists(st.floats(0.01, 1.0), min_size=1, max_size=3).map(tuple),
    q_sd=st.none() | st.floats(0.01, 1.0),
    q_sr=st.none() | st.lists(st.floats(0.01, 1.0), min_size=2, max_size=2).map(tuple),
    omega_rd=st.floats(0.1, 10.0),
    power_r=st.floats(0.0, 5.0),
    snr_db=st.builds(SnrGrid, st.floats(-10, 10), st.floats(10, 40), st.floats(0.5, 5)),
    snr_links=st.sampled_from([("sd", "sr", "rd"), ("rd",), ("sd", "rd")]),
    mode=st.sampled_from(["analytic", "simulate", "compare"]),
    trials=st.integers(1, 10**7),
    seed=st.none() | st.integers(0, 2**31),
    out=st.none() | st.just("out.csv"),
)


@settings(max_examples=80)
@given(configs)
def test_config_round_trip(cfg):
    once = parse_config(dump_config(cfg))
    assert once == cfg
    assert parse_config(dump_config(once)) == once


def test_mapping_rejects_unknown_key():
    with pytest.raises(ConfigError):
        config_from_mapping({"gain": 3})


# --- grid and scenarios ----------------------------------------------------


def test_grid_is_lexicographic():
    cfg = parse_config("m: [4, 16]\nk: [1, 2]\nq: [0.3, 1.0]\nsnr_db: {start: 0, stop: 10, step: 5}\n")
    pts = grid_points(cfg)
    assert len(pts) == 2 * 2 * 2 * 3
    keys = [(p.m, p.k, p.q_sd, p.snr_db) for p in pts]
    assert keys == sorted(keys)
    assert [p.index for p in pts] == list(range(len(pts)))


def test_snr_axis_drives_selected_links():
    cfg = parse_config("k: 1\nsnr_links: [rd]\npower_s: 2.0\nomega_rd: 3.0\nsnr_db: {start: 10, stop: 10, step: 1}\n")
    sc = build_scenario(cfg, grid_points(cfg)[0])
    assert sc.sd.gamma_bar == pytest.approx(2.0)
    assert sc.sr[0].gamma_bar == pytest.approx(2.0)
    assert sc.rd[0].gamma_bar == pytest.approx(30.0)


# --- running ---------------------------------------------------------------


def _curves(result):
    out = {}
    for row in result.rows:
        p = row.point
        out.setdefault((p.m, p.k, p.q_sd), []).append(row.ser_analytic)
    return {k: np.array(v) for k, v in out.items()}


def test_relay_count_family():
    cfg = parse_config("m: 4\nk: [1, 2, 3]\nq: [0.3, 1.0]\nsnr_db: {start: 0, stop: 30, step: 5}\n")
    curves = _curves(run_sweep(cfg))
    for key, c in curves.items():
        assert np.all(np.diff(c) < 0), key
    for q in (0.3, 1.0):
        assert np.all(curves[(4, 3, q)] < curves[(4, 1, q)])


def test_modulation_family():
    cfg = parse_config("m: [4, 16]\nk: 2\nq: [0.3, 1.0]\nsnr_db: {start: 0, stop: 30, step: 5}\n")
    curves = _curves(run_sweep(cfg))
    for q in (0.3, 1.0):
        assert np.all(curves[(16, 2, q)] > curves[(4, 2, q)])


def test_compare_mode_single_point_passes():
    cfg = parse_config("m: 4\nk: 1\nq: 0.5\nsnr_db: {start: 10, stop: 10, step: 1}\nmode: compare\nseed: 3\n")
    (row,) = run_sweep(cfg).rows
    assert row.passed is True
    assert row.rel_dev == pytest.approx((row.ser_sim - row.ser_analytic) / row.ser_analytic)
    assert abs(row.rel_dev) < 0.05


def test_simulate_needs_seed():
    with pytest.raises(ConfigError):
        run_sweep(SweepConfig(mode="simulate"))


def test_row_errors_do_not_abort(monkeypatch):
    real = sweep.total_ser

    def flaky(sc, *a, **kw):
        if sc.k == 2:
            raise NumericError("quadrature missed tolerance", 0.1, 1e-3)
        return real(sc, *a, **kw)

    monkeypatch.setattr(sweep, "total_ser", flaky)
    res = run_sweep(parse_config("k: [1, 2, 3]\nsnr_db: {start: 10, stop: 10, step: 1}\n"))
    assert [r.error is not None for r in res.rows] == [False, True, False]
    assert res.has_errors
    assert "NumericError" in res.rows[1].error


def test_workers_do_not_change_rows():
    text = "k: [1, 2]\nq: [0.5]\nsnr_db: {start: 0, stop: 10, step: 5}\nmode: compare\nseed: 5\ntrials: 20000\n"
    one = run_sweep(parse_config(text))
    many = run_sweep(parse_config(text + "workers: 3\n"))
    assert format_csv(one) == format_csv(many)


# --- CSV -------------------------------------------------------------------


def test_empty_sweep_is_header_only(tmp_path):
    path = tmp_path / "empty.csv"
    emit_csv(SweepResult("analytic", ()), str(path))
    assert path.read_text() == "snr_db,q_sd,q_sr,q_rd,K,M,ser_analytic,error\n"


def test_compare_columns_and_determinism(tmp_path):
    text = "m: 4\nk: 1\nq: 0.5\nsnr_db: {start: 5, stop: 10, step: 5}\nmode: compare\nseed: 11\ntrials: 50000\n"
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit_csv(run_sweep(parse_config(text)), str(a))
    emit_csv(run_sweep(parse_config(text)), str(b))
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().splitlines()[0].split(",")
    assert header == ["snr_db", "q_sd", "q_sr", "q_rd", "K", "M", "ser_analytic", "ser_sim", "stderr", "rel_dev", "pass", "error"]


def test_csv_round_trip(tmp_path):
    cfg = parse_config("m: 16\nk: 2\nq: 0.3\nq_rd: [0.123456789, 0.7]\nsnr_db: {start: 0, stop: 2.5, step: 1.25}\n")
    res = run_sweep(cfg)
    path = tmp_path / "r.csv"
    emit_csv(res, str(path))
    rows = read_csv(str(path))
    assert len(rows) == len(res.rows)
    for rec, row in zip(rows, res.rows):
        assert rec["snr_db"] == row.point.snr_db
        assert rec["q_rd"] == row.point.q_rd
        assert rec["K"] == 2 and rec["M"] == 16
        assert rec["error"] is None
        # nine significant digits in scientific notation
        assert math.isclose(rec["ser_analytic"], row.ser_analytic, rel_tol=5e-9)


def test_ser_cells_use_nine_significant_digits():
    res = run_sweep(parse_config("snr_db: {start: 7, stop: 7, step: 1}\n"))
    cell = format_csv(res).splitlines()[1].split(",")[6]
    mantissa, exp = cell.split("e")
    assert len(mantissa.replace(".", "").lstrip("-")) == 9


def test_emit_csv_reports_path(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="x.csv"):
        emit_csv(SweepResult("analytic", ()), str(bad))
