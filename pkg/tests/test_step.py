"""Tests for single corrugation steps: frames, perturbation, error scaling."""
import numpy as np
import pytest

from corrugate.basis import build_basis
from corrugate.errors import DimensionError, NonImmersion, ResolutionError
from corrugate.fields import Field, GridDomain, induced_metric, sample
from corrugate.step import (
    flat_closed_form_residual,
    frame,
    perturb,
    predicted_metric_rhs,
    step_identity_tolerance,
    step_ordinary,
    step_sharper,
)

BASIS = build_basis(2)
NU_MIXED = BASIS.directions[1]
DELTA = 0.05


def cylinder(npts=513):
    dom = GridDomain.square(2, npts, 0.0, 2.0 * np.pi)
    return sample(dom, lambda x: np.stack(
        [np.cos(x[..., 0]), np.sin(x[..., 0]), x[..., 1]], axis=-1))


def wavy_amplitude(dom):
    return sample(dom, lambda x: 1.0 + 0.2 * np.sin(x[..., 0] + x[..., 1]))


class TestFrame:
    def test_cylinder_normal_and_conditioning(self):
        u = cylinder()
        fr = frame(u)
        # unit normal of the cylinder is radial; orientation is a convention
        xy = np.stack(np.meshgrid(u.domain.axis(0), u.domain.axis(1),
                                  indexing="ij"), axis=-1)
        radial = np.stack([np.cos(xy[..., 0]), np.sin(xy[..., 0]),
                           np.zeros_like(xy[..., 0])], axis=-1)
        mismatch = min(
            np.abs(fr.zeta.values - radial).max(),
            np.abs(fr.zeta.values + radial).max(),
        )
        assert mismatch < 1e-9
        assert fr.gram_condition < 1.0 + 1e-6

    def test_degenerate_map_refused(self):
        dom = GridDomain.square(2, 65, 0.0, 1.0)
        u = sample(dom, lambda x: np.stack(
            [x[..., 0], 1e-4 * x[..., 1], np.zeros_like(x[..., 0])], axis=-1))
        with pytest.raises(NonImmersion):
            frame(u)

    def test_wrong_codomain_refused(self):
        dom = GridDomain.square(2, 65, 0.0, 1.0)
        u = sample(dom, lambda x: x)  # map into R^2, not R^3
        with pytest.raises(DimensionError):
            frame(u)


class TestFlatClosedForm:
    def test_closed_form_matches_to_roundoff(self):
        assert flat_closed_form_residual(1.2, [1.0, 0.0], 8.0, 0.2) < 1e-10
        assert flat_closed_form_residual(0.7, [1.0, 1.0], 8.0, 0.2) < 1e-10

    def test_ordinary_step_error_is_the_quadratic_term(self):
        # flat base, constant amplitude, nu = e1: everything cancels except
        # delta^2 a^4 (g1')^2 nu nu, whose sup is delta^2 a^4 / 4
        dom = GridDomain.square(2, 257, 0.0, 2.0 * np.pi)
        u = sample(dom, lambda x: np.stack(
            [x[..., 0], x[..., 1], np.zeros_like(x[..., 0])], axis=-1))
        a = Field(dom, np.full((257, 257), 0.9))
        out = step_ordinary(u, a, np.array([1.0, 0.0]), 8.0, 0.2, basis=BASIS)
        expected = 0.2**2 * 0.9**4 * 0.25
        assert abs(out.diagnostics["error_sup"] - expected) < 5e-4


class TestPerturbation:
    def test_c0_closeness_scales_with_sqrt_delta_over_lambda(self):
        u = cylinder()
        a = wavy_amplitude(u.domain)
        fr = frame(u)
        v = perturb(u, fr, a, NU_MIXED, 16.0, DELTA)
        bound = (np.sqrt(DELTA) * 1.2 * 1.5 + DELTA * 1.2**2 * 0.3) / 16.0
        assert np.abs(v.values - u.values).max() <= bound

    def test_underresolved_corrugation_refused(self):
        u = cylinder(257)
        a = wavy_amplitude(u.domain)
        with pytest.raises(ResolutionError):
            step_ordinary(u, a, NU_MIXED, 64.0, DELTA, basis=BASIS)


class TestAssembledIdentity:
    def test_expansion_accounts_for_measured_increment(self):
        # every term of Gv - Gu is assembled analytically; the difference
        # from the end-to-end measurement must be FD truncation only
        u = cylinder()
        a = wavy_amplitude(u.domain)
        fr = frame(u)
        v = perturb(u, fr, a, NU_MIXED, 16.0, DELTA)
        rhs = predicted_metric_rhs(u, a, NU_MIXED, 16.0, DELTA, None, fr, BASIS)
        gu = induced_metric(u)
        gv = induced_metric(v)
        resid = np.abs(gv.values - gu.values - rhs.values).max()
        assert resid <= step_identity_tolerance(u, v, 16.0, 2.0)
        assert resid < 1e-3  # and the tolerance is not doing the work


class TestErrorScaling:
    def test_ordinary_error_halves_when_lambda_doubles(self):
        u = cylinder()
        a = wavy_amplitude(u.domain)
        e8 = step_ordinary(u, a, NU_MIXED, 8.0, DELTA, basis=BASIS)
        e16 = step_ordinary(u, a, NU_MIXED, 16.0, DELTA, basis=BASIS)
        ratio = e8.diagnostics["error_sup"] / e16.diagnostics["error_sup"]
        assert 1.4 < ratio < 2.6

    def test_sharper_step_beats_ordinary_by_lambda_over_mu(self):
        u = cylinder()
        a = wavy_amplitude(u.domain)
        lam, mu = 16.0, 2.0
        ordinary = step_ordinary(u, a, NU_MIXED, lam, DELTA, basis=BASIS)
        sharper = step_sharper(u, a, NU_MIXED, lam, mu, DELTA, 2, BASIS)
        gain = (
            ordinary.diagnostics["error_sup"] / sharper.diagnostics["error_sup"]
        )
        assert gain >= 0.5 * (lam / mu)

    def test_flat_constant_base_needs_no_displacement(self):
        # all four cross moduli vanish identically, so the cascade has
        # nothing to absorb: w must be exactly zero at every node
        dom = GridDomain.square(2, 257, 0.0, 2.0 * np.pi)
        u = sample(dom, lambda x: np.stack(
            [x[..., 0], x[..., 1], np.zeros_like(x[..., 0])], axis=-1))
        a = Field(dom, np.full((257, 257), 0.9))
        out = step_sharper(u, a, NU_MIXED, 8.0, 1.0, 0.2, 2, BASIS)
        assert out.diagnostics["w_sup"] == 0.0
        assert out.diagnostics["f_sup"] == 0.0
