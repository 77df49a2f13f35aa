"""Amplitude extraction: split a metric-deficit field into primitive squares.

Given a packed symmetric field H close to the all-ones combination h0, we
want smooth nonnegative amplitudes a_1..a_{n_star} with

    H  =  sum_k a_k^2 nu_k (x) nu_k  +  sum_{l<=n} (cbar/lambda_l^2)
                                                   grad a_l (x) grad a_l

where the second sum is the known quadratic leftover each of the first n
oscillation directions will produce at its assigned frequency lambda_l.  The
fixed point is reached by Picard sweeps: start from the plain coefficient
split a_k = sqrt(L_k(H)), then repeatedly subtract the gradient correction
computed from the previous sweep and re-split.

Each sweep contracts the residual by roughly (freq(H)/lambda_1)^2, so a
handful of sweeps reaches the finite-difference noise floor.
"""

from dataclasses import dataclass

import numpy as np

from .basis import sym_pack
from .corrugation import C_BAR
from .errors import DimensionError, NearH0Violation, NegativeCoefficient, ParamError
from .fields import Field, c1c0_ratio, gradient, sup_norm

__all__ = [
    "KaellenResult",
    "kaellen_decompose",
    "kaellen_decay_bound",
    "NEARNESS_DEFAULT",
    "POSITIVITY_FLOOR",
]

#: largest allowed sup distance of H from h0 before the split is refused
NEARNESS_DEFAULT = 0.1

#: smallest coefficient value accepted under a square root
POSITIVITY_FLOOR = 1e-3


@dataclass(frozen=True)
class KaellenResult:
    """Outcome of the Picard amplitude iteration.

    amplitudes : list of scalar Fields, one per primitive direction
    residual : packed symmetric Field, the direct-substitution error
    iterations_used : sweeps actually run (early stop at the noise floor)
    residual_history : sup-norm of the residual after each sweep (len used+1)
    freq_scale : measured C^1/C^0 ratio of the deviation H - h0
    """

    amplitudes: list
    residual: Field
    iterations_used: int
    residual_history: list
    freq_scale: float


def kaellen_decay_bound(freq_scale, lambda1):
    """Guaranteed per-sweep residual contraction factor."""
    return 4.0 * (freq_scale / lambda1) ** 2


def _sqrt_split(basis, packed, sweep, floor):
    coeffs = basis.decompose_L(packed)
    low = coeffs.min(axis=-1)
    if low.min() < floor:
        node = np.unravel_index(np.argmin(low), low.shape)
        k = int(np.argmin(coeffs[node]))
        raise NegativeCoefficient(
            "coefficient L_%d = %.6g below floor %g at sweep %d, node %r"
            % (k + 1, coeffs[node][k], floor, sweep, node)
        )
    return np.sqrt(coeffs)


def _gradient_correction(basis, amps, dom_field, lambdas):
    """Packed field sum_{l<=n} (cbar/lambda_l^2) grad a_l (x) grad a_l."""
    n = basis.n
    out = np.zeros(dom_field.values.shape)
    for l in range(n):
        g = gradient(dom_field.with_values(amps[..., l])).values
        outer = np.einsum("...i,...j->...ij", g, g)
        out += (C_BAR / lambdas[l] ** 2) * sym_pack(outer)
    return out


def kaellen_decompose(
    H,
    lambdas,
    sweeps,
    basis,
    nearness=NEARNESS_DEFAULT,
    positivity_floor=POSITIVITY_FLOOR,
):
    """Picard iteration for the amplitude split of a near-h0 deficit field.

    H : packed symmetric Field over an n-dimensional grid
    lambdas : the n oscillation frequencies assigned to the leading
        directions (these set the size of the gradient correction)
    sweeps : number of Picard updates after the initial split (>= 0)
    """
    if sweeps < 0:
        raise ParamError("sweeps must be >= 0")
    n = basis.n
    if H.domain.dim != n or H.comp_shape != (basis.n_star,):
        raise DimensionError(
            "H must be packed symmetric over an %d-d grid, got comp %r"
            % (n, H.comp_shape)
        )
    lambdas = [float(l) for l in np.atleast_1d(lambdas)]
    if len(lambdas) != n:
        raise DimensionError("need %d frequencies, got %d" % (n, len(lambdas)))
    if any(l <= 0 for l in lambdas):
        raise ParamError("frequencies must be positive")

    deviation = H.values - basis.h0_packed
    dist = float(np.abs(deviation).max())
    if dist > nearness:
        raise NearH0Violation(
            "deficit is %.4g away from h0 in sup norm (allowed %.4g)"
            % (dist, nearness)
        )
    freq_scale = c1c0_ratio(H.with_values(deviation))

    def direct_residual(amps, correction):
        # substitute the amplitudes back rather than trusting the update
        # identity, so the history reports what the split actually leaves
        return H.values - (amps * amps) @ basis.squares.T - correction

    amps = _sqrt_split(basis, H.values, 0, positivity_floor)
    correction = _gradient_correction(basis, amps, H, lambdas)
    residual = direct_residual(amps, correction)
    history = [float(np.abs(residual).max())]
    noise_floor = 1e-15 * (1.0 + sup_norm(H))

    used = 0
    for j in range(1, sweeps + 1):
        amps = _sqrt_split(basis, H.values - correction, j, positivity_floor)
        correction = _gradient_correction(basis, amps, H, lambdas)
        residual = direct_residual(amps, correction)
        history.append(float(np.abs(residual).max()))
        used = j
        if history[-1] < noise_floor:
            break

    amplitudes = [
        H.with_values(np.ascontiguousarray(amps[..., k])) for k in range(basis.n_star)
    ]
    return KaellenResult(
        amplitudes=amplitudes,
        residual=H.with_values(residual),
        iterations_used=used,
        residual_history=history,
        freq_scale=freq_scale,
    )
