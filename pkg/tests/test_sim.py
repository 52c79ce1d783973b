import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hybridpos.cli import main
from hybridpos.sim import (
    LEFT_BLIND_SPOT, InsufficientSpanError, ScenarioConfig, dump_config, evaluate, generate_input_program,
    GroundTruth, load_config, max_gap_us, read_csv, run_demo, write_ground_truth,
)
from hybridpos.sim.sources import in_blind_spot


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """The handful of full simulations the tests below share."""
    d = tmp_path_factory.mktemp("sim")
    noisy = ScenarioConfig(seed=42, blind_spots=[LEFT_BLIND_SPOT])
    out = {}
    for key, cfg, only in [
        ("noiseless_video", ScenarioConfig.noiseless(), "video"),
        ("blind_fused", noisy, None),
        ("blind_video", noisy, "video"),
    ]:
        path = d / f"{key}.csv"
        out[key] = (run_demo(cfg, path, only=only), path)
    return out


class TestProgram:
    def test_leg_lengths(self):
        cfg = ScenarioConfig()
        truth = GroundTruth(cfg)
        (x0, y0), (x1, y1), (x2, y2) = truth.points[:3]
        assert math.isclose(x1 - x0, 243.6, abs_tol=1e-6)
        assert math.isclose(y2 - y1, 185.6, abs_tol=1e-6)
        assert cfg.speed == 0.58

    def test_durations_and_turns(self):
        prog = generate_input_program(ScenarioConfig())
        assert [c.duration for c in prog[:4]] == [4200, 3200, 4032, 3072]
        assert [c.heading for c in prog[:5]] == [0, 90, 180, 270, 0]
        assert all(c.duration > 0 for c in prog)
        # ends at the first non-positive X duration: 4200 - 25 * 168 = 0
        assert len(prog) == 50

    def test_spiral_stays_in_area(self):
        cfg = ScenarioConfig()
        pts = np.array(GroundTruth(cfg).points)
        assert pts[:, 0].min() >= 0 and pts[:, 0].max() <= cfg.area_width
        assert pts[:, 1].min() >= 0 and pts[:, 1].max() <= cfg.area_height


class TestSources:
    def test_noiseless_video_matches_truth(self, runs):
        result, path = runs["noiseless_video"]
        rows = read_csv(path)
        assert len(rows) > 2500
        want = np.array([result.truth.position(int(t)) for t in rows[:, 0]])
        assert np.abs(rows[:, 1:] - want).max() <= 1e-6

    def test_no_video_inside_blind_spot(self, runs):
        result, path = runs["blind_video"]
        cfg = ScenarioConfig(blind_spots=[LEFT_BLIND_SPOT])
        rows = read_csv(path)
        inside = [t for t in rows[:, 0] if in_blind_spot(cfg, *result.truth.position(int(t)))]
        assert inside == []
        # the robot does spend time there
        assert max_gap_us(rows) > 1e6

    def test_seeded_runs_are_byte_identical(self, tmp_path):
        cfg = ScenarioConfig(seed=7, blind_spots=[LEFT_BLIND_SPOT])
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_demo(cfg, a, only="sphero_velocity")
        run_demo(cfg, b, only="sphero_velocity")
        assert a.read_bytes() == b.read_bytes()

    def test_disabling_a_source_leaves_others_unchanged(self, tmp_path):
        base = ScenarioConfig(seed=3)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_demo(base, a, only="input")
        run_demo(base.replace(disabled_sources=["video"]), b, only="input")
        assert a.read_bytes() == b.read_bytes()

    def test_unknown_only_source(self, tmp_path):
        with pytest.raises(ValueError):
            run_demo(ScenarioConfig(), tmp_path / "x.csv", only="radar")


class TestFusedRun:
    def test_csv_header_and_gaps(self, runs):
        _, path = runs["blind_fused"]
        assert path.read_text().splitlines()[0] == "timestamp,x,y"
        cfg = ScenarioConfig()
        assert max_gap_us(path) <= 2 * (1e6 / cfg.video_fps + cfg.merge_timeout * 1e3)

    def test_converges_to_video_after_blind_spot(self, runs):
        fused = read_csv(runs["blind_fused"][1])
        video = read_csv(runs["blind_video"][1])

        def dist(t):
            f = [np.interp(t, fused[:, 0], fused[:, i]) for i in (1, 2)]
            v = [np.interp(t, video[:, 0], video[:, i]) for i in (1, 2)]
            return math.hypot(f[0] - v[0], f[1] - v[1])

        exits = video[1:, 0][np.diff(video[:, 0]) > 100_000]
        assert len(exits) >= 4
        for t in exits:
            assert dist(t + 2e6) <= 0.25 * dist(t), t / 1e6


class TestEvaluate:
    def traj(self, n=200, dt=51_000, offset=(0, 0)):
        t = np.arange(n) * dt
        return np.column_stack([t, np.sin(t / 1e6) * 50 + offset[0], np.cos(t / 7e5) * 30 + offset[1]])

    def test_identical(self):
        a = self.traj()
        assert evaluate(a, a) == (0.0, 0.0)

    def test_constant_offset(self):
        avg, worst = evaluate(self.traj(), self.traj(offset=(1, 0)))
        assert avg == pytest.approx(1.0, abs=1e-12) and worst == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=4, max_size=12),
           st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)), min_size=4, max_size=12))
    def test_against_dense_resampling(self, pa, pb):
        span = 5_100_000
        a = np.column_stack([np.linspace(0, span, len(pa)).round(), pa])
        b = np.column_stack([np.linspace(0, span, len(pb)).round(), pb])
        dense = np.arange(0, span + 1, 1000, dtype=float)
        fa = np.column_stack([np.interp(dense, a[:, 0], a[:, i]) for i in (1, 2)])
        fb = np.column_stack([np.interp(dense, b[:, 0], b[:, i]) for i in (1, 2)])
        keys = np.arange(100) * 51  # key instants on the 1 ms grid
        d = np.hypot(*(fa[keys] - fb[keys]).T)
        avg, worst = evaluate(a, b)
        assert abs(avg - d.mean()) <= 0.01 and abs(worst - d.max()) <= 0.01

    def test_insufficient_span(self):
        with pytest.raises(InsufficientSpanError):
            evaluate(self.traj(n=50), self.traj(n=50))

    def test_duplicate_timestamps_keep_last(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("timestamp,x,y\n0,1,1\n0,2,2\n10,3,3\n")
        assert read_csv(p).tolist() == [[0, 2, 2], [10, 3, 3]]


class TestConfig:
    def test_dump_load_round_trip(self, tmp_path):
        cfg = ScenarioConfig(seed=5, blind_spots=[(1.0, 2.0, 3.0, 4.0)], disabled_sources=["video"])
        p = tmp_path / "c.cfg"
        p.write_text(dump_config(cfg))
        assert load_config(p) == cfg

    def test_comments_and_errors(self, tmp_path):
        p = tmp_path / "c.cfg"
        p.write_text("# scenario\nseed = 9  # inline\n\nvideo_fps=15\n")
        cfg = load_config(p)
        assert cfg.seed == 9 and cfg.video_fps == 15.0
        p.write_text("nonsense = 1\n")
        with pytest.raises(ValueError, match="nonsense"):
            load_config(p)


class TestCli:
    def test_run_and_evaluate(self, tmp_path, capsys):
        out, gt = tmp_path / "p.csv", tmp_path / "gt.csv"
        assert main(["run", "--noiseless", "--only", "input", "-o", str(out), "--ground-truth", str(gt)]) == 0
        assert main(["evaluate", str(out), str(gt)]) == 0
        avg, worst = evaluate(out, gt)
        assert capsys.readouterr().out.strip() == f"avg {avg:.2f} cm  max {worst:.2f} cm"
        # 20 Hz samples of an exact trace only cut the corners
        assert avg < 0.05 and worst < 1.0

    def test_blind_spot_outside_area(self, tmp_path, capsys):
        assert main(["run", "--blind-spot", "250,0,20,10", "-o", str(tmp_path / "x.csv")]) == 2
        assert "outside" in capsys.readouterr().err

    def test_bad_blind_spot_syntax(self):
        with pytest.raises(SystemExit):
            main(["run", "--blind-spot", "1,2,3"])

    def test_missing_config_file(self, tmp_path, capsys):
        assert main(["run", "--config", str(tmp_path / "nope.cfg"), "-o", str(tmp_path / "x.csv")]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_ground_truth_file(self, tmp_path):
        truth = GroundTruth(ScenarioConfig())
        p = tmp_path / "gt.csv"
        write_ground_truth(truth, p)
        rows = read_csv(p)
        assert len(rows) == len(truth.times) and rows[1].tolist() == [4_200_000, 243.6, 0.0]
