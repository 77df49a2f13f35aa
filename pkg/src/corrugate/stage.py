"""One stage: trade a metric deficit of size delta for one of size delta_hat.

A stage takes an immersion u whose induced metric falls short of the target
g by roughly delta * h0 and returns v whose shortfall is delta_hat * h0 on a
slightly smaller domain, at the price of corrugations up to frequency
Lambda^(J(n_star - n) + n) * lambda_0.  Phases:

1. guards    -- parameter window, deficit-shape precondition, Nyquist budget
2. mollify   -- smooth u and g at scale ell = eta / (moll_constant * lambda_in)
3. split     -- Picard-decompose the normalized deficit into amplitudes
4. corrugate -- n sharper steps along the leading directions (the ones with
                a first component), collecting every absorbable remainder F
5. absorb    -- shrink the trailing amplitudes by the collected remainder,
                b_j = sqrt(a_j^2 - L_j(F)/delta), then run the trailing
                ordinary steps at frequencies past the sharper ladder

The report keeps both deficit flavors: relative to the expected shape
(g - Gv - delta_hat h0, what the next stage's precondition sees) and total
(g - Gv).
"""

import time
from dataclasses import dataclass, field as dc_field

import numpy as np

from .basis import build_basis
from .decompose import kaellen_decompose
from .errors import DeficitTooLarge, NegativeAmplitude, ParamError
from .fields import (
    Field,
    SAMPLES_PER_PERIOD,
    check_resolution,
    ck_norm,
    c1c0_ratio,
    induced_metric,
    jacobian,
    mollify,
    restrict,
    smooth,
    sup_norm,
)
from .step import step_ordinary, step_sharper

__all__ = ["StageParams", "StageReport", "run_stage"]


@dataclass(frozen=True)
class StageParams:
    """Knobs of one stage.

    delta, delta_hat : deficit sizes before and after (0 < delta_hat)
    lambda_in : frequency scale of the incoming immersion (sets ell)
    eta : domain-margin budget this stage may consume
    J : Picard sweeps and per-step cascade depth; also the frequency
        exponent between consecutive ordinary steps
    Lambda : frequency ratio of the sharper ladder
    moll_constant : ell = eta / (moll_constant * lambda_in)
    freq_constant : ladder seed lambda_0 = freq_constant / ell
    r_threshold : deficit-shape tolerance, |g - Gu - delta h0| <= r delta
    depth : cascade depth override (default: J)
    nearness_slack : additive slack for the near-h0 check of the split
    """

    delta: float
    delta_hat: float
    lambda_in: float
    eta: float
    J: int = 3
    Lambda: float = 4.0
    moll_constant: float = 4.0
    freq_constant: float = 1.0
    r_threshold: float = 0.5
    depth: int = None
    nearness_slack: float = 0.05
    positivity_floor: float = 1e-3
    amplitude_floor: float = 0.0
    immersion_floor: float = 1e-6
    spp: int = SAMPLES_PER_PERIOD


@dataclass(frozen=True)
class StageReport:
    """Everything a stage did, in sup-norm terms."""

    v: Field
    deficit_before: float          # |g - Gu - delta h0| / relative shape
    deficit_after: float           # |g - Gv - delta_hat h0|
    total_deficit_before: float    # |g - Gu|
    total_deficit_after: float     # |g - Gv|
    per_step: list
    frequencies_used: list
    c2_estimate: float
    c1_increment: float
    domain_out: object
    ell: float
    margin: float
    moll_floor: float              # the lambda^{-2} mollification error scale
    meets_continuation: bool
    f_span_leading: float
    f_cancel_residual: float
    kaellen_history: list
    kaellen_freq_scale: float
    amplitude_range: tuple
    wall_ms: float
    mu_values: list = dc_field(default_factory=list)


def _packed_metric(u, spp=SAMPLES_PER_PERIOD):
    return induced_metric(u, spp)


def run_stage(u, g, params, basis=None):
    """Run one full stage; see the module docstring for the phases."""
    t0 = time.perf_counter()
    n = u.domain.dim
    if basis is None:
        basis = build_basis(n)
    p = params
    delta, delta_hat = float(p.delta), float(p.delta_hat)
    h0p = basis.h0_packed
    h0_sup = float(np.abs(h0p).max())

    # ---- phase 1: guards --------------------------------------------------
    if not 0.0 < delta_hat < p.r_threshold * delta / h0_sup:
        raise ParamError(
            "need 0 < delta_hat < r delta / |h0| = %.6g, got %.6g"
            % (p.r_threshold * delta / h0_sup, delta_hat)
        )
    if p.lambda_in <= 0 or p.eta <= 0:
        raise ParamError("lambda_in and eta must be positive")
    if g.domain != u.domain or g.comp_shape != (basis.n_star,):
        raise ParamError("target metric must be packed symmetric on u's grid")

    deficit0 = g.values - _packed_metric(u, p.spp).values
    shape_err = float(np.abs(deficit0 - delta * h0p).max())
    if shape_err > p.r_threshold * delta:
        raise DeficitTooLarge(
            "deficit is %.6g away from delta h0 in sup norm, allowed %.6g"
            % (shape_err, p.r_threshold * delta)
        )
    deficit_before = shape_err
    total_before = float(np.abs(deficit0).max())

    ell = p.eta / (p.moll_constant * p.lambda_in)
    lam0 = p.freq_constant / ell
    depth = p.J if p.depth is None else p.depth
    sharper_ladder = [lam0 * p.Lambda ** i for i in range(1, n + 1)]
    ladder = list(sharper_ladder)
    for _ in range(basis.n_star - n):
        ladder.append(ladder[-1] * p.Lambda ** p.J)
    # the perturbation carries a second harmonic; budget the grid for it
    check_resolution(u.domain, 2.0 * ladder[-1], p.spp, "stage frequency ladder")

    # ---- phase 2: mollify -------------------------------------------------
    u_ell = mollify(u, ell)
    g_ell = mollify(g, ell)
    dom = u_ell.domain

    H_vals = (g_ell.values - _packed_metric(u_ell, p.spp).values) / delta - (
        delta_hat / delta
    ) * h0p
    H = Field(dom, H_vals, max(u_ell.freq, g.freq))

    # ---- phase 3: split ---------------------------------------------------
    nearness = p.r_threshold + (delta_hat / delta) * h0_sup + p.nearness_slack
    kres = kaellen_decompose(
        H,
        sharper_ladder,
        sweeps=p.J,
        basis=basis,
        nearness=nearness,
        positivity_floor=p.positivity_floor,
    )
    # the split is pointwise, so its output carries node-level roundoff; the
    # amplitudes are ell-scale quantities by construction, and the sharper
    # steps differentiate them repeatedly, so low-pass them back to scale ell
    amps = [smooth(a, ell) for a in kres.amplitudes]
    amp_range = (
        min(float(a.values.min()) for a in amps),
        max(float(a.values.max()) for a in amps),
    )

    # ---- phase 4: sharper steps -------------------------------------------
    v = u_ell
    per_step = []
    mu_values = []
    f_total = np.zeros(dom.npts + (basis.n_star,))
    for i in range(n):
        lam_i = sharper_ladder[i]
        mu_i = min(lam_i, max(1.0, v.freq, c1c0_ratio(amps[i])))
        mu_values.append(mu_i)
        out = step_sharper(
            v,
            amps[i],
            basis.directions[i],
            lam_i,
            mu_i,
            delta,
            depth,
            basis,
            spp=p.spp,
            immersion_floor=p.immersion_floor,
        )
        f_total += out.F.values
        v = out.v
        per_step.append(
            dict(out.diagnostics, kind="sharper", direction=i, lam=lam_i, mu=mu_i)
        )

    # ---- phase 5: absorb the remainder, trailing ordinary steps -----------
    f_coeffs = basis.decompose_L(f_total)
    f_span_leading = float(np.abs(f_coeffs[..., :n]).max()) if n < basis.n_star else 0.0
    f_cancel_residual = 0.0
    for j in range(n, basis.n_star):
        b_sq = amps[j].values ** 2 - f_coeffs[..., j] / delta
        worst = float(b_sq.min())
        if worst < p.amplitude_floor:
            node = np.unravel_index(np.argmin(b_sq), b_sq.shape)
            raise NegativeAmplitude(
                "absorbing the remainder drives amplitude %d below the floor "
                "%g (b^2 = %.6g at node %r; L_j(F)/delta = %.6g)"
                % (j + 1, p.amplitude_floor, worst, node,
                   float(f_coeffs[..., j][node] / delta))
            )
        # the cancellation mechanism: b^2 + L_j(F)/delta must reproduce a^2
        f_cancel_residual = max(
            f_cancel_residual,
            float(np.abs(b_sq + f_coeffs[..., j] / delta
                         - amps[j].values ** 2).max()),
        )
        b = Field(dom, np.sqrt(b_sq), amps[j].freq)
        out = step_ordinary(
            v,
            b,
            basis.directions[j],
            ladder[j],
            delta,
            basis,
            spp=p.spp,
            immersion_floor=p.immersion_floor,
        )
        v = out.v
        per_step.append(
            dict(out.diagnostics, kind="ordinary", direction=j, lam=ladder[j])
        )

    # ---- report -----------------------------------------------------------
    g_out = restrict(g, dom)
    u_out = restrict(u, dom)
    gv = _packed_metric(v, p.spp).values
    deficit_after = float(np.abs(g_out.values - gv - delta_hat * h0p).max())
    total_after = float(np.abs(g_out.values - gv).max())
    c1_increment = float(
        np.abs(jacobian(v, p.spp).values - jacobian(u_out, p.spp).values).max()
    )
    margin = min(
        min(a - b for a, b in zip(dom.lower, u.domain.lower)),
        min(b - a for a, b in zip(dom.upper, u.domain.upper)),
    )

    return StageReport(
        v=v,
        deficit_before=deficit_before,
        deficit_after=deficit_after,
        total_deficit_before=total_before,
        total_deficit_after=total_after,
        per_step=per_step,
        frequencies_used=ladder,
        c2_estimate=ck_norm(v, 2, p.spp),
        c1_increment=c1_increment,
        domain_out=dom,
        ell=ell,
        margin=margin,
        moll_floor=1.0 / p.lambda_in**2,
        meets_continuation=deficit_after <= p.r_threshold * delta_hat,
        f_span_leading=f_span_leading,
        f_cancel_residual=f_cancel_residual,
        kaellen_history=list(kres.residual_history),
        kaellen_freq_scale=kres.freq_scale,
        amplitude_range=amp_range,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        mu_values=mu_values,
    )
