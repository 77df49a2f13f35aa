"""Tests for schedules, presets, the q-loop driver, and report/mesh export."""
import json
import os
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from corrugate.driver import (
    RunConfig,
    Schedule,
    alpha_limit,
    beta_exponent,
    estimate_holder,
    export_mesh,
    export_report,
    make_preset,
    read_config,
    read_mesh,
    run,
    run_batch,
)
from corrugate.errors import (
    DimensionError,
    DirectionError,
    DomainTooSmall,
    ParamError,
    ResolutionError,
    UnknownPreset,
)
from corrugate.fields import Field, GridDomain, induced_metric, sample


def small_config(**overrides):
    """One fast stage on a 257^2 grid: ladder [2, 8, 32], ~1 s."""
    kw = dict(
        preset="exact-deficit", n=2, grid=257, stages=1, delta0=0.1,
        growth_base=1048576.0, b_exponent=1.1, tau=0.5, J=1,
        K_factor=1.0, lambda0=1.0, margin0=0.3, moll_constant=4.0,
        freq_constant=0.0375,
    )
    kw.update(overrides)
    return RunConfig(**kw)


@pytest.fixture(scope="module")
def small_report():
    return run(small_config())


class TestExponents:
    def test_rational_values(self):
        assert beta_exponent(2, 10) == Fraction(5, 19)
        assert beta_exponent(3, 6) == Fraction(1, 9)
        assert beta_exponent(2, 3) == Fraction(3, 17)

    def test_limits(self):
        assert alpha_limit(2) == Fraction(1, 3)
        assert alpha_limit(3) == Fraction(1, 7)

    @settings(deadline=None, max_examples=60)
    @given(st.integers(2, 5), st.integers(1, 12))
    def test_beta_always_below_the_limit(self, n, J):
        assert beta_exponent(n, J) < alpha_limit(n)

    def test_beta_increases_with_depth_toward_the_limit(self):
        betas = [beta_exponent(2, J) for J in range(1, 30)]
        assert all(b2 > b1 for b1, b2 in zip(betas, betas[1:]))
        assert alpha_limit(2) - betas[-1] < Fraction(1, 10)

    def test_guards(self):
        with pytest.raises(DimensionError):
            beta_exponent(1, 3)
        with pytest.raises(ParamError):
            beta_exponent(2, 0)


class TestSchedule:
    def kwargs(self, **overrides):
        kw = dict(n=2, stages=3, delta0=0.1, lambda0=1.0,
                  growth_base=1048576.0, b_exponent=1.1, tau=0.5, J=1,
                  K_factor=1.0)
        kw.update(overrides)
        return kw

    def test_delta_ladder(self):
        s = Schedule(**self.kwargs())
        # a = 4^10, b = 1.1: one stage divides delta by exactly 4
        assert s.delta(0) == 0.1
        assert abs(s.delta(1) - 0.025) < 1e-15
        assert abs(s.delta(2) / s.delta(1) - 4.0 ** -1.1) < 1e-12

    def test_lambda_ladder(self):
        s = Schedule(**self.kwargs())
        # beta(2, 1) = 1/11, so the exponent per stage is (b-1)/(2 beta)
        assert s.lam(0) == 1.0
        assert abs(s.lam(1) - 1048576.0 ** (0.1 * 5.5)) < 1e-6

    def test_Lambda_from_deficit_ratio(self):
        s = Schedule(**self.kwargs())
        assert abs(s.Lambda(0) - (s.delta(0) / s.delta(1)) ** 1.0) < 1e-9
        s2 = Schedule(**self.kwargs(K_factor=2.0, J=2))
        assert abs(s2.Lambda(0) - 2.0 * 4.0 ** 0.5) < 1e-9

    def test_parameter_window(self):
        with pytest.raises(ParamError):
            Schedule(**self.kwargs(b_exponent=1.6))  # needs b < 1 + tau/2
        with pytest.raises(ParamError):
            Schedule(**self.kwargs(growth_base=1.0))
        with pytest.raises(ParamError):
            Schedule(**self.kwargs(tau=1.2))
        with pytest.raises(ParamError):
            Schedule(**self.kwargs(stages=-1))

    def test_alpha_target_must_sit_below_beta(self):
        # beta(2, 1) = 1/11 ~ 0.0909
        with pytest.raises(ParamError):
            Schedule(**self.kwargs(alpha_target=0.1))
        Schedule(**self.kwargs(alpha_target=0.05))  # fine


class TestPresets:
    def test_exact_deficit_is_exact(self):
        g, u0, seed = make_preset("exact-deficit", 2, 0.1, 65)
        from corrugate.basis import build_basis
        h0 = build_basis(2).h0_packed
        dev = g.values - induced_metric(u0).values - 0.1 * h0
        assert np.abs(dev).max() < 1e-10
        assert seed["preset"] == "exact-deficit" and seed["epsilon"] == 0.0

    def test_perturbed_deficit_stays_within_the_window(self):
        g, u0, seed = make_preset("perturbed-deficit", 2, 0.1, 65, epsilon=0.05)
        from corrugate.basis import build_basis
        h0 = build_basis(2).h0_packed
        dev = np.abs(g.values - induced_metric(u0).values - 0.1 * h0).max()
        assert 0.0 < dev <= 0.05 * 0.1 * 1.5 + 1e-9
        assert g.freq == 2.0 * np.pi

    def test_anisotropic_touches_only_the_leading_square(self):
        g, u0, _ = make_preset("anisotropic", 2, 0.1, 65, epsilon=0.05)
        ge, _, _ = make_preset("exact-deficit", 2, 0.1, 65)
        dev = g.values - ge.values
        assert np.abs(dev[..., 1:]).max() == 0.0
        assert np.abs(dev[..., 0]).max() > 1e-4

    def test_modulation_size_guard(self):
        with pytest.raises(ParamError):
            make_preset("perturbed-deficit", 2, 0.1, 65, epsilon=0.3,
                        r_threshold=0.5)

    def test_unknown_preset(self):
        with pytest.raises(UnknownPreset):
            make_preset("wobbly", 2, 0.1, 65)


class TestConfigFile:
    def test_round_trip_with_comments_and_types(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text(
            "# a comment\n"
            "\n"
            "preset = 'perturbed-deficit'\n"
            "grid = 129\n"
            "delta0 = 0.05\n"
            "deterministic = false\n"
            "out_dir = /tmp/somewhere\n"
        )
        cfg = read_config(p)
        assert cfg.preset == "perturbed-deficit"
        assert cfg.grid == 129 and isinstance(cfg.grid, int)
        assert cfg.delta0 == 0.05
        assert cfg.deterministic is False
        assert cfg.out_dir == "/tmp/somewhere"
        assert cfg.n == 2  # untouched default

    def test_unknown_key_is_an_error(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("gird = 129\n")
        with pytest.raises(ParamError):
            read_config(p)

    def test_duplicate_key_is_an_error(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("grid = 129\ngrid = 257\n")
        with pytest.raises(ParamError):
            read_config(p)

    def test_malformed_line_and_bad_types(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("just some words\n")
        with pytest.raises(ParamError):
            read_config(p)
        p.write_text("grid = many\n")
        with pytest.raises(ParamError):
            read_config(p)
        p.write_text("deterministic = maybe\n")
        with pytest.raises(ParamError):
            read_config(p)


class TestRun:
    def test_single_stage_completes_and_contracts(self, small_report):
        rep = small_report
        assert rep.failed_stage is None and rep.error is None
        assert len(rep.stage_reports) == 1
        t = rep.deficit_trajectory
        assert len(t) == 2 and t[1] < 0.65 * t[0]
        assert rep.closeness < 0.3
        assert len(rep.iterates) == 2
        # lambda floor: flat start has no curvature, schedule wins
        setting = rep.stage_settings[0]
        assert setting["lambda_used"] == setting["lambda_scheduled"] == 1.0
        assert abs(setting["Lambda"] - 4.0) < 1e-9

    def test_single_increment_never_claims_an_exponent(self, small_report):
        # one stage gives one increment; summability cannot be judged
        assert small_report.alpha_hat is None

    def test_stage_failure_is_captured_not_raised(self):
        # a factor-2 ladder cannot absorb its own remainder; the run must
        # return a partial report naming the stage instead of raising
        rep = run(small_config(K_factor=0.5, freq_constant=0.075))
        assert rep.failed_stage == 0
        assert "amplitude" in rep.error
        assert rep.stage_reports == []
        assert len(rep.deficit_trajectory) == 1

    def test_oversized_schedule_refused_up_front(self):
        with pytest.raises(ResolutionError):
            run(small_config(stages=2))

    def test_crop_budget_refused_up_front(self):
        with pytest.raises(DomainTooSmall):
            run(small_config(moll_constant=0.05))

    def test_direction_threshold_guard(self):
        # the mixed direction has |nu . e1| = 0.7071 < 0.8
        with pytest.raises(DirectionError):
            run(small_config(direction_threshold=0.8))


class TestBatch:
    def test_results_keep_input_order(self):
        os.environ["CORRUGATE_THREADS"] = "2"
        try:
            cfgs = [small_config(), small_config(delta0=0.08)]
            reps = run_batch(cfgs)
        finally:
            del os.environ["CORRUGATE_THREADS"]
        assert [r.config.delta0 for r in reps] == [0.1, 0.08]
        assert all(r.failed_stage is None for r in reps)

    def test_invalid_thread_cap_is_an_error(self):
        os.environ["CORRUGATE_THREADS"] = "zebra"
        try:
            with pytest.raises(ParamError):
                run_batch([small_config()])
        finally:
            del os.environ["CORRUGATE_THREADS"]

    def test_empty_batch(self):
        assert run_batch([]) == []


class TestHolderEstimate:
    def test_lacunary_series_pins_one_half(self):
        # iterates of a height series sum_k k^{-3/2} sin(k x), k = 2^q: the
        # C^{1,alpha} increments are 2^{q(alpha - 1/2)}, summable iff
        # alpha <= 1/2, so the estimator must land at 0.5
        dom = GridDomain.square(2, 1025, 0.0, 2.0 * np.pi)
        xy = np.stack(np.meshgrid(dom.axis(0), dom.axis(1), indexing="ij"),
                      axis=-1)
        vals = np.stack([xy[..., 0], xy[..., 1], np.zeros_like(xy[..., 0])],
                        axis=-1)
        iterates = [Field(dom, vals)]
        for q in range(1, 5):
            k = 2.0 ** q
            bump = k ** -1.5 * np.sin(k * xy[..., 0])
            vals = vals + np.stack(
                [np.zeros_like(bump), np.zeros_like(bump), bump], axis=-1)
            iterates.append(Field(dom, vals, freq=k))
        h = estimate_holder(iterates)
        assert 0.4 <= h["alpha_hat"] <= 0.6

    def test_identical_iterates_accept_every_exponent(self):
        dom = GridDomain.square(2, 65, 0.0, 1.0)
        u = sample(dom, lambda x: np.stack(
            [x[..., 0], x[..., 1], np.zeros_like(x[..., 0])], axis=-1))
        h = estimate_holder([u, u, u])
        assert h["alpha_hat"] == 0.9

    def test_two_iterates_prove_nothing(self):
        dom = GridDomain.square(2, 65, 0.0, 1.0)
        u = sample(dom, lambda x: np.stack(
            [x[..., 0], x[..., 1], np.sin(x[..., 0])], axis=-1))
        v = u.with_values(u.values + 0.1)
        assert estimate_holder([u, v])["alpha_hat"] is None

    def test_empty_is_an_error(self):
        with pytest.raises(ParamError):
            estimate_holder([])


class TestMeshExport:
    def test_obj_roundtrip_is_exact(self, tmp_path):
        dom = GridDomain.square(2, 9, 0.0, 1.0)
        u = sample(dom, lambda x: np.stack(
            [x[..., 0], x[..., 1], np.sin(3.0 * x[..., 0])], axis=-1))
        path = tmp_path / "m.obj"
        export_mesh(u, path)
        verts, faces = read_mesh(path)
        assert verts.shape == (81, 3)
        assert len(faces) == 8 * 8 * 2
        # 17 significant digits: float64 roundtrips bit-exactly
        assert np.array_equal(verts, u.values.reshape(-1, 3))

    def test_quads_split_with_row_major_indexing(self, tmp_path):
        dom = GridDomain.square(2, 9, 0.0, 1.0)
        u = sample(dom, lambda x: np.stack(
            [x[..., 0], x[..., 1], np.zeros_like(x[..., 0])], axis=-1))
        path = tmp_path / "m.obj"
        export_mesh(u, path)
        _, faces = read_mesh(path)
        # first quad: corner vertex 1, its x-neighbor lives one row (ny) on
        assert faces[0] == (1, 10, 11)
        assert faces[1] == (1, 11, 2)

    def test_wrong_shape_refused(self, tmp_path):
        dom = GridDomain.square(2, 9, 0.0, 1.0)
        f = sample(dom, lambda x: x[..., 0])
        with pytest.raises(DimensionError):
            export_mesh(f, tmp_path / "m.obj")


class TestReportExport:
    def test_deterministic_runs_are_byte_identical(self, small_report, tmp_path):
        c1, j1 = export_report(small_report, tmp_path / "a")
        rep2 = run(small_config())
        c2, j2 = export_report(rep2, tmp_path / "b")
        assert c1.read_bytes() == c2.read_bytes()
        assert j1.read_bytes() == j2.read_bytes()

    def test_csv_layout(self, small_report, tmp_path):
        c, _ = export_report(small_report, tmp_path / "r")
        lines = c.read_text().splitlines()
        assert lines[0].startswith("# ")
        assert lines[1] == ("q,delta_q,lambda_q,Lambda_q,deficit_before,"
                            "deficit_after,c1_increment,c2_estimate,wall_ms")
        assert len(lines) == 2 + 1  # note, header, one stage
        row = lines[2].split(",")
        assert row[0] == "0"
        assert float(row[4]) == small_report.stage_reports[0].total_deficit_before
        assert row[-1] == "0"  # deterministic mode zeroes wall time

    def test_json_floats_parse_back_exactly(self, small_report, tmp_path):
        _, j = export_report(small_report, tmp_path / "r")
        doc = json.loads(j.read_text())
        assert doc["deficit_trajectory"] == small_report.deficit_trajectory
        assert doc["closeness"] == small_report.closeness
        assert doc["header"]["schedule"]["beta"] == "1/11"
        assert doc["stages"][0]["deficit_after_total"] == (
            small_report.stage_reports[0].total_deficit_after)
        assert doc["failed_stage"] is None

    def test_wall_time_kept_when_not_deterministic(self, tmp_path):
        rep = run(small_config(deterministic=False))
        _, j = export_report(rep, tmp_path / "r")
        doc = json.loads(j.read_text())
        assert doc["wall_ms_total"] > 0.0
