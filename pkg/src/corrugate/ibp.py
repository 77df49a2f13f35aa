"""Oscillatory cancellation by repeated integration by parts.

A corrugation contributes metric terms of the form gamma(lambda x.nu) M with
zero-mean profile gamma and slowly varying symmetric M.  Such a term is not
small, but it is the derivative of something small: splitting M through the
basis transfer psi and absorbing the direction-aligned part into a gradient
leaves a remainder one antiderivative deeper and a factor mu/lambda smaller
(mu = frequency scale of M).  Unrolling this `depth` times yields

    gamma(lambda x.nu) M = 2 sym(Dw)
                         + gamma_I(lambda x.nu) (mu/lambda)^I E
                         + F,

with w a small displacement field, E a renormalized remainder of size
O(|M|), gamma_I the I-th antiderivative, and F a combination of the trailing
rank-one squares nu_j (x) nu_j (j > n) with explicit scalar coefficient
fields -- exactly the part a later amplitude correction can absorb.
"""

from dataclasses import dataclass

import numpy as np

from .basis import sym_pack
from .errors import DimensionError, MeanError, ParamError
from .fields import (
    Field,
    SAMPLES_PER_PERIOD,
    check_resolution,
    D1_ERROR_CONST,
    jacobian,
    phase_field,
    sup_norm,
)

__all__ = ["IbpResult", "integrate_by_parts", "identity_residual", "identity_tolerance", "MAX_DEPTH"]

#: deepest supported cascade; antiderivative chains stay well-conditioned here
MAX_DEPTH = 12


@dataclass(frozen=True)
class IbpResult:
    """Pieces of the integration-by-parts identity.

    w : vector Field, the absorbed displacement
    E : packed symmetric Field, the renormalized remainder (O(|M|) size;
        the explicit (mu/lambda)^depth factor is NOT folded in)
    F_coeffs : list of scalar Fields, coefficients of the trailing squares
        nu_j (x) nu_j (j > n) making up the absorbable remainder F
    gamma_I : the depth-th antiderivative profile
    depth : levels actually applied (may be less than requested when a level
        would not shrink the remainder; 0 means the term was left raw, with
        w = 0 and F = 0)
    level_residual_sups : sup of the remainder term after 1..depth levels
        (the actual gamma_i (mu/lambda)^i E_i product, useful for decay fits)
    """

    w: Field
    E: Field
    F_coeffs: list
    gamma_I: object
    depth: int
    nu: np.ndarray
    lam: float
    mu: float
    basis: object
    level_residual_sups: list

    def remainder_field(self):
        """Assemble F = sum_j F_coeffs[j] nu_{n+j} (x) nu_{n+j} (packed)."""
        b = self.basis
        out = np.zeros(self.w.domain.npts + (b.n_star,))
        for j, c in enumerate(self.F_coeffs):
            out += c.values[..., None] * b.squares[:, b.n + j]
        return Field(self.w.domain, out, max(f.freq for f in self.F_coeffs))


def integrate_by_parts(M, gamma, nu, lam, mu, depth, basis, spp=SAMPLES_PER_PERIOD):
    """Unroll the cancellation identity for gamma(lambda x.nu) M.

    M : packed symmetric Field; nu : unit direction with nu.e_1 != 0;
    lam >= mu >= 1; depth in 1..MAX_DEPTH.
    """
    if M.domain.dim != basis.n or M.comp_shape != (basis.n_star,):
        raise DimensionError(
            "M must be packed symmetric over a %d-d grid, got comp %r"
            % (basis.n, M.comp_shape)
        )
    if not (lam >= mu >= 1.0):
        raise ParamError("need lambda >= mu >= 1, got lambda=%g mu=%g" % (lam, mu))
    if not 1 <= depth <= MAX_DEPTH:
        raise ParamError("depth must be in 1..%d, got %r" % (MAX_DEPTH, depth))
    if abs(gamma.mean()) > 1e-12:
        raise MeanError("profile must have zero mean, got %.3g" % gamma.mean())
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    osc_freq = lam * gamma.max_freq
    check_resolution(M.domain, osc_freq, spp, "oscillation")

    phase = lam * phase_field(M.domain, nu)
    ratio = mu / lam
    content_freq = max(M.freq, mu)

    w_vals = np.zeros(M.domain.npts + (basis.n,))
    f_coeff_vals = np.zeros(M.domain.npts + (basis.n_star - basis.n,))
    level_sups = []
    g = gamma
    e_packed = M.values
    scale = 1.0
    used = 0
    # remainder sup if we stop at the current depth; depth 0 is the raw term
    current = float(np.abs(g(phase)[..., None] * e_packed).max())
    for i in range(1, depth + 1):
        alpha, beta = basis.psi(nu, e_packed)
        g_next = g.antiderivative()
        d_alpha = jacobian(Field(M.domain, alpha, content_freq)).values
        e_next = sym_pack(d_alpha + np.swapaxes(d_alpha, -1, -2)) / (-2.0 * mu)
        tail = float(
            np.abs(scale * ratio * g_next(phase)[..., None] * e_next).max()
        )
        # each level trades an antiderivative (factor mu/lambda) for one
        # derivative of the slow modulus, which only helps while the modulus
        # really is slower than the oscillation.  Stencil noise instead grows
        # ~1/(mu h) per differentiation, so a level that fails to shrink the
        # remainder is noise-dominated: refuse it (the identity stays exact
        # at whatever depth is realized, including depth 0 with w = F = 0).
        if tail >= current:
            break
        w_vals += (scale / (2.0 * lam)) * g_next(phase)[..., None] * alpha
        f_coeff_vals += scale * g(phase)[..., None] * beta
        g = g_next
        e_packed = e_next
        scale *= ratio
        level_sups.append(tail)
        current = tail
        used = i

    return IbpResult(
        w=Field(M.domain, w_vals, max(osc_freq, M.freq)),
        E=Field(M.domain, e_packed, content_freq),
        F_coeffs=[
            Field(M.domain, np.ascontiguousarray(f_coeff_vals[..., j]), max(osc_freq, M.freq))
            for j in range(basis.n_star - basis.n)
        ],
        gamma_I=g,
        depth=used,
        nu=nu,
        lam=float(lam),
        mu=float(mu),
        basis=basis,
        level_residual_sups=level_sups,
    )


def identity_residual(M, gamma, res):
    """Sup norm of gamma(lambda x.nu) M - [2 sym(Dw) + tail + F]."""
    phase = res.lam * phase_field(M.domain, res.nu)
    lhs = gamma(phase)[..., None] * M.values
    dw = jacobian(res.w).values
    two_sym_dw = sym_pack(dw + np.swapaxes(dw, -1, -2))
    tail = (res.mu / res.lam) ** res.depth * res.gamma_I(phase)[..., None] * res.E.values
    f_field = res.remainder_field().values
    return float(np.abs(lhs - two_sym_dw - tail - f_field).max())


def identity_tolerance(res, floor=1e-8):
    """Identity-check tolerance: the floor plus the finite-difference
    truncation bound for differentiating the oscillatory displacement."""
    h = max(res.w.domain.spacing)
    k = res.lam * res.gamma_I.max_freq + res.mu
    fd = 4.0 * D1_ERROR_CONST * h**4 * k**5 * sup_norm(res.w)
    return max(floor, fd)
