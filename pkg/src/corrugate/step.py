"""One corrugation step: add a single high-frequency wrinkle to an immersion.

Given an immersion u of an n-rectangle into R^{n+1}, an amplitude field a, a
unit direction nu and a frequency lambda, the perturbed map is

    v = u + delta   * T( (a^2/lambda) g1(lambda x.nu) nu + w )
          + delta^{1/2} * (a/lambda) g2(lambda x.nu) zeta,

with T the tangential transfer Du (Du^T Du)^{-1}, zeta the unit normal, and
(g1, g2) the corrugation pair satisfying 2 g1' + (g2')^2 = 1.  The square of
that slope identity is what turns the oscillation into a metric gain of
delta a^2 nu (x) nu.

The *ordinary* step takes w = 0 and accepts the O(delta mu/lambda) error the
cross terms leave.  The *sharper* step builds w by integrating the four
oscillatory cross moduli by parts, leaving only a (mu/lambda)^depth tail, a
known gradient leftover, and an absorbable remainder F supported on the
trailing basis squares.
"""

from dataclasses import dataclass

import numpy as np

from .basis import pack_outer, sym_pack
from .corrugation import C_BAR, GAMMA1, GAMMA2, GAMMA3, GAMMA4
from .errors import DimensionError, NonImmersion, ParamError
from .fields import (
    Field,
    SAMPLES_PER_PERIOD,
    D1_ERROR_CONST,
    check_resolution,
    gradient,
    induced_metric,
    jacobian,
    phase_field,
    sup_norm,
)
from .ibp import integrate_by_parts

__all__ = [
    "ImmersionFrame",
    "StepOutcome",
    "frame",
    "perturb",
    "step_ordinary",
    "step_sharper",
    "predicted_metric_rhs",
    "step_identity_tolerance",
    "flat_closed_form_residual",
    "IMMERSION_FLOOR",
]

#: smallest admissible eigenvalue of Du^T Du
IMMERSION_FLOOR = 1e-6


@dataclass(frozen=True)
class ImmersionFrame:
    """Tangential transfer, unit normal, and conditioning of an immersion.

    T : Field of (n+1, n) matrices, Du (Du^T Du)^{-1}
    zeta : Field of unit normals with last component >= 0 where nonzero
    gram_condition : worst eigenvalue ratio of Du^T Du over the grid
    jac : the finite-difference jacobian the frame was built from
    """

    T: Field
    zeta: Field
    gram_condition: float
    jac: Field


def _gram_eig_range(G):
    """(min, max) eigenvalues of symmetric (..., n, n), vectorized."""
    n = G.shape[-1]
    if n == 2:
        half_tr = 0.5 * (G[..., 0, 0] + G[..., 1, 1])
        det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
        gap = np.sqrt(np.maximum(half_tr * half_tr - det, 0.0))
        return half_tr - gap, half_tr + gap
    w = np.linalg.eigvalsh(G)
    return w[..., 0], w[..., -1]


def _cofactor_normal(J):
    """Generalized cross product of the jacobian columns: the vector of
    signed n x n minors, orthogonal to every column of J by construction."""
    m = J.shape[-2]  # n + 1
    rows = np.arange(m)
    comps = []
    for c in range(m):
        keep = rows[rows != c]
        minor = J[..., keep, :]
        comps.append(((-1.0) ** c) * np.linalg.det(minor))
    return np.stack(comps, axis=-1)


def frame(u, immersion_floor=IMMERSION_FLOOR, spp=SAMPLES_PER_PERIOD):
    """Tangential transfer T = Du (Du^T Du)^{-1} and oriented unit normal."""
    n = u.domain.dim
    if u.comp_shape != (n + 1,):
        raise DimensionError(
            "frame needs a map into R^%d, got components %r" % (n + 1, u.comp_shape)
        )
    jac = jacobian(u, spp)
    J = jac.values
    G = np.einsum("...ai,...aj->...ij", J, J)
    lo, hi = _gram_eig_range(G)
    eigmin = float(lo.min())
    if eigmin < immersion_floor:
        node = np.unravel_index(np.argmin(lo), lo.shape)
        raise NonImmersion(
            "metric eigenvalue %.3g below floor %g at node %r"
            % (eigmin, immersion_floor, node)
        )
    gram_condition = float((hi / lo).max())
    T = np.einsum("...ai,...ij->...aj", J, np.linalg.inv(G))

    zeta = _cofactor_normal(J)
    zeta = zeta / np.linalg.norm(zeta, axis=-1, keepdims=True)
    # the cofactor field is smooth wherever u immerses, so the orientation is
    # fixed by a single global flip; a per-node rule would shatter the normal
    # (and every derivative of it) wherever the last component sits at
    # roundoff scale, as it does for any vertical surface patch
    last = zeta[..., -1]
    genuine = np.abs(last) > 1e-9
    if genuine.any() and last[genuine].mean() < 0.0:
        zeta = -zeta

    return ImmersionFrame(
        T=u.with_values(T),
        zeta=u.with_values(zeta),
        gram_condition=gram_condition,
        jac=jac,
    )


def _check_step_inputs(u, a, lam, delta):
    if a.domain != u.domain:
        raise DimensionError("amplitude and immersion live on different grids")
    if a.comp_shape != ():
        raise DimensionError("amplitude must be scalar")
    if lam <= 0 or delta <= 0:
        raise ParamError("lambda and delta must be positive")


def perturb(u, fr, a, nu, lam, delta, w=None, spp=SAMPLES_PER_PERIOD):
    """Apply the corrugation formula; w is an optional extra tangential
    displacement (in base coordinates) to be carried through T."""
    _check_step_inputs(u, a, lam, delta)
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    osc_freq = lam * 2.0  # g1 carries the second harmonic
    check_resolution(u.domain, osc_freq, spp, "corrugation")

    s = lam * phase_field(u.domain, nu)
    p = (a.values[..., None] ** 2 / lam) * GAMMA1(s)[..., None] * nu
    if w is not None:
        p = p + w.values
    tangential = np.einsum("...an,...n->...a", fr.T.values, p)
    normal = (a.values / lam * GAMMA2(s))[..., None] * fr.zeta.values
    vals = u.values + delta * tangential + np.sqrt(delta) * normal
    return Field(u.domain, vals, max(u.freq, osc_freq))


@dataclass(frozen=True)
class StepOutcome:
    """What one corrugation step did.

    v : the perturbed immersion
    predicted_increment : packed field the metric was supposed to gain
    measured_error : induced_metric(v) - induced_metric(u) - predicted - F
    F : absorbable remainder (sharper steps; None for ordinary)
    diagnostics : sup-norms of the individual pieces
    """

    v: Field
    predicted_increment: Field
    measured_error: Field
    F: object
    diagnostics: dict


def step_ordinary(u, a, nu, lam, delta, basis=None, spp=SAMPLES_PER_PERIOD,
                  immersion_floor=IMMERSION_FLOOR):
    """Single corrugation without integration by parts.

    Valid for any unit direction; the oscillatory cross terms remain in the
    measured error at size O(delta mu / lambda).
    """
    fr = frame(u, immersion_floor, spp)
    v = perturb(u, fr, a, nu, lam, delta, w=None, spp=spp)
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)

    predicted_vals = delta * a.values[..., None] ** 2 * pack_outer(nu, nu)
    predicted = Field(u.domain, predicted_vals, a.freq)

    gu = Field(u.domain, sym_pack(np.einsum("...ai,...aj->...ij", fr.jac.values, fr.jac.values)), u.freq)
    gv = induced_metric(v, spp)
    err = gv.values - gu.values - predicted.values
    error = Field(u.domain, err, v.freq)

    c1_inc = float(np.abs(jacobian(v, spp).values - fr.jac.values).max())
    diagnostics = {
        "c1_increment": c1_inc,
        "error_sup": sup_norm(error),
        "predicted_sup": sup_norm(predicted),
        "gram_condition": fr.gram_condition,
        "amplitude_sup": sup_norm(a),
        "normal_amp": float(np.sqrt(delta) * sup_norm(a) * GAMMA2.sup_bound() / lam),
    }
    return StepOutcome(v, predicted, error, None, diagnostics)


def _cross_moduli(u, fr, a, nu, lam, delta, spp=SAMPLES_PER_PERIOD):
    """The four oscillatory cross moduli M_1..M_4 paired with g1..g4."""
    J = fr.jac.values
    a_vals = a.values[..., None]
    t_nu = np.einsum("...an,n->...a", fr.T.values, nu)
    a2_t_nu = Field(u.domain, a_vals**2 * t_nu, max(u.freq, a.freq))
    d_a2_t_nu = jacobian(a2_t_nu, spp).values

    a_zeta = Field(u.domain, a_vals * fr.zeta.values, max(u.freq, a.freq))
    d_a_zeta = jacobian(a_zeta, spp).values

    def two_sym(A):
        return sym_pack(A + np.swapaxes(A, -1, -2))

    m1 = two_sym(np.einsum("...ai,...aj->...ij", J, d_a2_t_nu)) / lam
    m2 = two_sym(np.einsum("...ai,...aj->...ij", J, d_a_zeta)) / (np.sqrt(delta) * lam)
    r = np.einsum("...a,...aj->...j", fr.zeta.values, d_a_zeta)
    m3 = (2.0 * a_vals / lam) * pack_outer(
        np.broadcast_to(nu, r.shape), r
    )
    grad_a = gradient(a, spp).values
    m4 = sym_pack(np.einsum("...i,...j->...ij", grad_a, grad_a)) / lam**2
    content = max(u.freq, a.freq)
    fields = [Field(u.domain, m, content) for m in (m1, m2, m3, m4)]
    return fields, d_a_zeta, grad_a


def step_sharper(u, a, nu, lam, mu, delta, depth, basis, spp=SAMPLES_PER_PERIOD,
                 immersion_floor=IMMERSION_FLOOR):
    """Corrugation with the oscillatory cross terms integrated by parts.

    Requires nu with nonzero first component (the transfer condition) and
    mu >= the frequency scale of u and a.  The returned F collects the parts
    of the cross terms supported on the trailing squares; it is reported,
    not silently absorbed.
    """
    fr = frame(u, immersion_floor, spp)
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)

    moduli, d_a_zeta, grad_a = _cross_moduli(u, fr, a, nu, lam, delta, spp)
    profiles = (GAMMA1, GAMMA2, GAMMA3, GAMMA4)
    w_vals = np.zeros(u.domain.npts + (u.domain.dim,))
    f_vals = np.zeros(u.domain.npts + (basis.n_star,))
    tail_sups = []
    depths_used = []
    for gam, M in zip(profiles, moduli):
        res = integrate_by_parts(M, gam, nu, lam, mu, depth, basis, spp)
        w_vals -= res.w.values
        f_vals += res.remainder_field().values
        tail_sups.append(
            (mu / lam) ** res.depth * res.gamma_I.sup_bound() * sup_norm(res.E)
        )
        depths_used.append(res.depth)

    w = Field(u.domain, w_vals, max(u.freq, lam * 2.0))
    v = perturb(u, fr, a, nu, lam, delta, w=w, spp=spp)

    predicted_vals = (
        delta * a.values[..., None] ** 2 * pack_outer(nu, nu)
        + delta
        * C_BAR
        / lam**2
        * sym_pack(np.einsum("...i,...j->...ij", grad_a, grad_a))
    )
    predicted = Field(u.domain, predicted_vals, max(a.freq, u.freq))
    F = Field(u.domain, delta * f_vals, lam * 2.0)

    gu = Field(u.domain, sym_pack(np.einsum("...ai,...aj->...ij", fr.jac.values, fr.jac.values)), u.freq)
    gv = induced_metric(v, spp)
    err = gv.values - gu.values - predicted.values - F.values
    error = Field(u.domain, err, v.freq)

    c1_inc = float(np.abs(jacobian(v, spp).values - fr.jac.values).max())
    diagnostics = {
        "c1_increment": c1_inc,
        "error_sup": sup_norm(error),
        "predicted_sup": sup_norm(predicted),
        "gram_condition": fr.gram_condition,
        "amplitude_sup": sup_norm(a),
        "m_sups": [sup_norm(m) for m in moduli],
        "w_sup": sup_norm(w),
        "f_sup": sup_norm(F),
        "tail_sups": tail_sups,
        "depths_used": depths_used,
        "mu": float(mu),
        "normal_amp": float(np.sqrt(delta) * sup_norm(a) * GAMMA2.sup_bound() / lam),
    }
    return StepOutcome(v, predicted, error, F, diagnostics)


# ---------------------------------------------------------------------------
# the step identity: every term of Gv - Gu accounted for
# ---------------------------------------------------------------------------

def predicted_metric_rhs(u, a, nu, lam, delta, w, fr, basis, return_parts=False,
                         spp=SAMPLES_PER_PERIOD):
    """Assemble the full algebraic expansion of induced_metric(v) - (u) term
    by term: main gain, gradient leftover, the four oscillatory cross terms,
    the displacement cancellation, and the explicit quadratic remainders.

    The assembly uses exact profile evaluations for every oscillatory factor
    and finite differences only on slow fields, so the difference from the
    end-to-end measured increment is pure stencil truncation (see
    step_identity_tolerance).
    """
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    s = lam * phase_field(u.domain, nu)
    J = fr.jac.values
    a_vals = a.values[..., None]

    moduli, d_a_zeta, grad_a = _cross_moduli(u, fr, a, nu, lam, delta, spp)
    m1, m2, m3, m4 = (m.values for m in moduli)

    g1p = GAMMA1.derivative()(s)[..., None]
    g2v = GAMMA2(s)[..., None]
    g2p = GAMMA2.derivative()(s)[..., None]
    g1v = GAMMA1(s)[..., None]
    g4v = GAMMA4(s)[..., None]
    g3v = GAMMA3(s)[..., None]

    nu_sq = pack_outer(nu, nu)

    # main metric gain through the slope identity 2 g1' + (g2')^2 = 1
    main = delta * a_vals**2 * (2.0 * g1p + g2p**2) * nu_sq

    # full gradient leftover: cbar + fluctuation parts of g2^2, with the
    # complete square D(a zeta)^T D(a zeta), not just grad a (x) grad a
    Q = sym_pack(np.einsum("...ai,...aj->...ij", d_a_zeta, d_a_zeta))
    grad_leftover = delta * (C_BAR / lam**2) * Q
    g4_term = delta * g4v * Q / lam**2

    cross = delta * (g1v * m1 + g2v * m2 + g3v * m3)

    # tangential displacement pieces (exact finite-difference assembly)
    t_nu = np.einsum("...an,n->...a", fr.T.values, nu)
    p_slow = Field(u.domain, a_vals**2 * t_nu, max(u.freq, a.freq))
    d_p_slow = jacobian(p_slow).values  # D(a^2 T nu), matches m1

    # A = delta D(T p) split analytically: oscillatory rank-one part plus
    # the slow part that produced m1, plus the carried displacement w
    A = delta * (g1p[..., None] * np.einsum("...a,n->...an", t_nu * a_vals**2, nu)
                 + (g1v[..., None] / lam) * d_p_slow)
    parts = {
        "main": main,
        "grad_leftover": grad_leftover,
        "g4_term": g4_term,
        "cross": cross,
    }
    if w is not None:
        tw = Field(u.domain, np.einsum("...an,...n->...a", fr.T.values, w.values),
                   max(w.freq, u.freq))
        d_tw = jacobian(tw, spp).values
        A = A + delta * d_tw
        dw = jacobian(w, spp).values
        parts["w_cancel"] = delta * sym_pack(dw + np.swapaxes(dw, -1, -2))
        # Du^T D(Tw) = Dw + (Du^T DT) w; subtract Dw to isolate the
        # transfer-curvature contribution
        carried = np.einsum("...ai,...aj->...ij", J, d_tw) - dw
        parts["w_curvature"] = delta * sym_pack(carried + np.swapaxes(carried, -1, -2))

    # quadratic remainders assembled from the exact factors
    zeta = fr.zeta.values
    du_t_zeta = np.einsum("...ai,...a->...i", J, zeta)  # ~ 0, kept honest
    b_term = 2.0 * np.sqrt(delta) * (a_vals * g2p) * pack_outer(
        du_t_zeta, np.broadcast_to(nu, du_t_zeta.shape)
    )
    parts["normal_tangent_cross"] = b_term

    # A^T against the normal pieces and itself
    At_zeta = np.einsum("...ai,...a->...i", A, zeta)
    d_az_pack = np.einsum("...ai,...aj->...ij", A, d_a_zeta)
    parts["disp_normal_cross"] = (
        2.0 * (a_vals * g2p) * np.sqrt(delta) * pack_outer(
            At_zeta, np.broadcast_to(nu, At_zeta.shape))
        + np.sqrt(delta) * (g2v / lam) * sym_pack(
            d_az_pack + np.swapaxes(d_az_pack, -1, -2))
    )
    AtA = np.einsum("...ai,...aj->...ij", A, A)
    parts["disp_square"] = sym_pack(AtA)

    total = sum(parts.values())
    rhs = Field(u.domain, total, max(u.freq, lam * 2.0))
    if return_parts:
        return rhs, parts
    return rhs


def step_identity_tolerance(u, v, lam, mu, floor=1e-8, spp=SAMPLES_PER_PERIOD):
    """FD-truncation bound for comparing the assembled expansion with the
    end-to-end measured metric increment."""
    h = max(u.domain.spacing)
    osc = 2.0 * lam + mu
    piece_amp = float(np.abs(v.values - u.values).max())
    e1 = D1_ERROR_CONST * h**4 * osc**5 * piece_amp
    du_sup = sup_norm(jacobian(u, spp))
    dv_sup = sup_norm(jacobian(v, spp))
    return max(floor, 2.0 * e1 * (du_sup + dv_sup + 1.0) + e1 * e1)


def flat_closed_form_residual(a_const, nu, lam, delta, npts=257, dim=2):
    """Algebraic spot check with constant amplitude over a flat base: the
    analytic jacobian of the perturbed map must reproduce

        Dv^T Dv = Id + delta a^2 nu nu + delta^2 a^4 (g1')^2 nu nu

    exactly (float roundoff).  Returns the sup residual against that closed
    form, evaluating all profiles analytically (no finite differences)."""
    from .fields import GridDomain

    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    dom = GridDomain.square(dim, npts)
    s = lam * phase_field(dom, nu)
    g1p = GAMMA1.derivative()(s)[..., None, None]
    g2p = GAMMA2.derivative()(s)[..., None, None]

    # flat frame: T nu = (nu, 0), zeta = e_{dim+1}
    t_nu = np.concatenate([nu, [0.0]])
    zeta = np.zeros(dim + 1)
    zeta[-1] = 1.0
    base = np.zeros((dim + 1, dim))
    base[:dim, :dim] = np.eye(dim)

    dv = (
        base
        + delta * a_const**2 * g1p * np.einsum("a,j->aj", t_nu, nu)
        + np.sqrt(delta) * a_const * g2p * np.einsum("a,j->aj", zeta, nu)
    )
    gv = np.einsum("...ai,...aj->...ij", dv, dv)
    closed = (
        np.eye(dim)
        + (delta * a_const**2 + delta**2 * a_const**4 * g1p[..., 0, 0, None, None] ** 2)
        * np.einsum("i,j->ij", nu, nu)
    )
    return float(np.abs(gv - closed).max())
