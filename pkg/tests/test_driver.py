import numpy as np
import pytest

from hystkit import (MU0, Protocol, SolverSettings, bench_quotients,
                     read_trace, run_benchmark, run_protocol, write_bench,
                     write_trace, zero_crossings)


class TestProtocolValidation:
    def test_bad_kind(self):
        with pytest.raises(ValueError):
            Protocol(kind="triangle")

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            Protocol(direction="backward")

    def test_too_few_steps(self):
        with pytest.raises(ValueError):
            Protocol(steps_per_period=4)

    def test_bad_amplitude(self):
        with pytest.raises(ValueError):
            Protocol(amplitudes=(-10.0,))

    def test_replay_needs_path(self):
        with pytest.raises(ValueError):
            Protocol(kind="csv-replay")


def test_trace_row_identity(fig1_material, settings):
    proto = Protocol(amplitudes=(180.0,), steps_per_period=64, periods=1)
    rows = run_protocol(fig1_material, proto, settings)[0].rows
    for r in rows:
        assert np.allclose(r.b, MU0 * r.h + r.j_total, atol=1e-12)
    assert [r.step for r in rows] == list(range(1, 65))


def test_coercive_crossings(fig1_material, settings):
    proto = Protocol(amplitudes=(600.0,), steps_per_period=500, periods=2)
    rows = run_protocol(fig1_material, proto, settings)[0].rows
    crossings = zero_crossings(rows)
    asc = [h for h, br in crossings if br == "ascending"]
    desc = [h for h, br in crossings if br == "descending"]
    assert asc and desc
    # major-loop coercive field equals the pinning strength
    assert all(abs(h - 71.0) <= 1.0 for h in asc)
    assert all(abs(h + 71.0) <= 1.0 for h in desc)


def test_peak_polarization_major_loop(fig1_material):
    # sharp-limit branch solution: (2 w Js/pi) atan(2 (600-71)/38); the
    # smoothing bias near the sine turning point scales with sqrt(eps)
    settings = SolverSettings(epsilon=1e-10)
    proto = Protocol(amplitudes=(600.0,), steps_per_period=500, periods=2)
    rows = run_protocol(fig1_material, proto, settings)[0].rows
    peak = max(abs(r.j_total[0]) for r in rows)
    assert peak == pytest.approx(1.5048024748629243, abs=1e-3)


def test_periodicity_after_first_period(fig1_material, settings):
    proto = Protocol(amplitudes=(180.0,), steps_per_period=200, periods=3)
    rows = run_protocol(fig1_material, proto, settings)[0].rows
    b = np.array([r.b for r in rows])
    assert np.abs(b[200:400] - b[400:600]).max() <= 1e-8


def test_inverse_direction_roundtrip(fig1_material, settings):
    fwd = Protocol(amplitudes=(180.0,), steps_per_period=100, periods=1)
    inv = Protocol(amplitudes=(180.0,), steps_per_period=100, periods=1,
                   direction="inverse")
    rows_f = run_protocol(fig1_material, fwd, settings)[0].rows
    rows_i = run_protocol(fig1_material, inv, settings)[0].rows
    hf = np.array([r.h for r in rows_f])
    hi = np.array([r.h for r in rows_i])
    assert np.abs(hf - hi).max() <= 1e-6 * 180.0


def test_multi_amplitude_independent_runs(fig3_material, settings):
    proto = Protocol(kind="multi-amplitude-sine", amplitudes=(100.0, 300.0),
                     steps_per_period=64, periods=1)
    runs = run_protocol(fig3_material, proto, settings)
    assert [r.label for r in runs] == ["Hm100", "Hm300"]
    single = Protocol(amplitudes=(300.0,), steps_per_period=64, periods=1)
    alone = run_protocol(fig3_material, single, settings)[0].rows
    paired = runs[1].rows
    assert np.array_equal(np.array([r.b for r in alone]),
                          np.array([r.b for r in paired]))


def test_rotational_ramp(fig1_material, settings):
    proto = Protocol(kind="rotational-ramp", amplitudes=(110.0,),
                     steps_per_period=100, periods=5, ramp_periods=3)
    rows = run_protocol(fig1_material, proto, settings)[0].rows
    jn = np.array([np.linalg.norm(r.j_total) for r in rows])
    # spirals outward, then closes onto a rotational loop strictly below
    # saturation
    assert jn[:100].max() < jn[150:250].max() < jn[-100:].max() + 1e-6
    assert jn[-100:].std() <= 1e-3 * jn[-100:].mean()
    assert jn.max() < fig1_material.saturation_total


def test_rotational_literal_flag(fig1_material, settings):
    lit = Protocol(kind="rotational-ramp", amplitudes=(110.0,),
                   steps_per_period=64, periods=1, literal_rotation=True)
    rows = run_protocol(fig1_material, lit, settings)[0].rows
    hy = np.array([r.h[1] for r in rows])
    # unit-amplitude cosine second component
    assert np.abs(hy).max() == pytest.approx(1.0, abs=1e-2)


class TestTraceCsv:
    def test_roundtrip_bit_exact(self, fig1_material, settings, tmp_path):
        proto = Protocol(amplitudes=(240.0,), steps_per_period=64, periods=1)
        rows = run_protocol(fig1_material, proto, settings)[0].rows
        p1 = tmp_path / "a.csv"
        p2 = tmp_path / "b.csv"
        write_trace(p1, rows)
        replay = Protocol(kind="csv-replay", replay_path=str(p1))
        rows2 = run_protocol(fig1_material, replay, settings)[0].rows
        write_trace(p2, rows2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_header_schema(self, fig1_material, settings, tmp_path):
        proto = Protocol(amplitudes=(240.0,), steps_per_period=64, periods=1)
        rows = run_protocol(fig1_material, proto, settings)[0].rows
        p = tmp_path / "t.csv"
        write_trace(p, rows)
        assert p.read_text().splitlines()[0] == "step,t,Hx,Hy,Bx,By,Jx,Jy"

    def test_inverse_replay_of_b(self, fig1_material, settings, tmp_path):
        proto = Protocol(amplitudes=(240.0,), steps_per_period=64, periods=1)
        rows = run_protocol(fig1_material, proto, settings)[0].rows
        p = tmp_path / "t.csv"
        write_trace(p, rows)
        replay = Protocol(kind="csv-replay", replay_path=str(p),
                          direction="inverse")
        rows2 = run_protocol(fig1_material, replay, settings)[0].rows
        h1 = np.array([r.h for r in rows])
        h2 = np.array([r.h for r in rows2])
        assert np.abs(h1 - h2).max() <= 1e-6 * 240.0

    def test_missing_column_reported(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("step,t,Hx,Hy,Bx,By\n1,0.1,0,0,0,0\n")
        with pytest.raises(ValueError, match="Jx"):
            read_trace(p)

    def test_empty_rejected(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text("step,t,Hx,Hy,Bx,By,Jx,Jy\n")
        with pytest.raises(ValueError, match="no rows"):
            read_trace(p)


def test_benchmark_smoke(tmp_path):
    rows = run_benchmark([2, 3], repetitions=1, steps=24, points=4)
    assert {r.nchi for r in rows} == {2, 3}
    assert {r.direction for r in rows} == {"forward", "inverse"}
    q = bench_quotients(rows)
    assert q[2] > 0 and q[3] > 0
    for r in rows:
        assert 1 <= r.iters <= 30
    out = tmp_path / "bench.csv"
    write_bench(out, rows)
    assert out.read_text().splitlines()[0] == "nchi,dir,time_ms,iters"
