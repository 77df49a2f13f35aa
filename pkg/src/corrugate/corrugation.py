"""Corrugation profiles as exact trigonometric polynomials.

The corrugated perturbations added by each step are driven by fixed 2*pi
periodic profiles.  Working with sampled arrays would make "zero mean" and
"antiderivative" approximate; instead a profile is stored by its complex
Fourier coefficients ``{k: c_k}`` so that differentiation, antidifferentiation,
products and means are exact coefficient operations, and only the final
evaluation on a phase array touches floating point.

The four canonical profiles:

    gamma(1) = -sin(2t)/4        tangential profile
    gamma(2) = sqrt(2) sin t     normal profile
    gamma(3) = gamma(2)*gamma(2)' = sin 2t
    gamma(4) = gamma(2)^2 - c_bar = -cos 2t

``C_BAR`` is the period average of gamma(2)^2, which equals 1; subtracting it
is what makes gamma(4) admissible for the zero-mean antiderivative chain.
The slope identity

    2*gamma(1)' + (gamma(2)')^2 = 1

is what lets a step trade tangential slope for normal oscillation without
changing the induced metric at leading order.
"""

import math

import numpy as np

from .errors import MeanError

__all__ = ["TrigPoly", "gamma", "C_BAR", "GAMMA1", "GAMMA2", "GAMMA3", "GAMMA4"]

_ZERO_TOL = 1e-15


class TrigPoly:
    """A real trigonometric polynomial sum_k c_k e^{ikt} with c_{-k} = conj(c_k).

    Coefficients are held in a dict keyed by integer frequency.  Only
    nonnegative keys are stored; the negative-frequency half is implied by
    the reality condition.
    """

    def __init__(self, coeffs=None):
        # keep k >= 0 only; c_0 forced real
        clean = {}
        for k, c in (coeffs or {}).items():
            k = int(k)
            if k < 0:
                k, c = -k, np.conjugate(c)
            c = complex(c)
            if k == 0:
                c = complex(c.real, 0.0)
            if abs(c) > 0.0:
                clean[k] = clean.get(k, 0.0 + 0.0j) + c
        self.coeffs = {k: c for k, c in clean.items() if abs(c) > _ZERO_TOL}

    # ----- constructors -------------------------------------------------

    @classmethod
    def from_sin_cos(cls, sin=None, cos=None):
        """Build from real sin/cos amplitude dicts {k: a_k}."""
        coeffs = {}
        for k, a in (cos or {}).items():
            if k == 0:
                coeffs[0] = coeffs.get(0, 0j) + a
            else:
                coeffs[k] = coeffs.get(k, 0j) + a / 2.0
        for k, a in (sin or {}).items():
            if k == 0:
                continue
            coeffs[k] = coeffs.get(k, 0j) + a / 2j
        return cls(coeffs)

    # ----- exact coefficient algebra ------------------------------------

    def mean(self):
        """Period average (the k=0 coefficient)."""
        return self.coeffs.get(0, 0j).real

    def derivative(self):
        return TrigPoly({k: 1j * k * c for k, c in self.coeffs.items() if k != 0})

    def antiderivative(self):
        """The unique zero-mean antiderivative.

        Raises MeanError when the profile itself has nonzero mean, since then
        no periodic antiderivative exists.
        """
        if abs(self.mean()) > 1e-12:
            raise MeanError(
                "profile has mean %.3e; no periodic antiderivative" % self.mean()
            )
        return TrigPoly({k: c / (1j * k) for k, c in self.coeffs.items() if k != 0})

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = TrigPoly({0: other})
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0j) + c
        return TrigPoly(out)

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            other = TrigPoly({0: other})
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return TrigPoly({k: c * other for k, c in self.coeffs.items()})
        # convolution over the full symmetric coefficient sets
        full_a = self._full()
        full_b = other._full()
        out = {}
        for ka, ca in full_a.items():
            for kb, cb in full_b.items():
                k = ka + kb
                if k >= 0:
                    out[k] = out.get(k, 0j) + ca * cb
        return TrigPoly(out)

    __rmul__ = __mul__

    def _full(self):
        full = dict(self.coeffs)
        for k, c in self.coeffs.items():
            if k != 0:
                full[-k] = np.conjugate(c)
        return full

    # ----- evaluation and bounds ----------------------------------------

    def __call__(self, t):
        """Evaluate pointwise on a scalar or ndarray of phases."""
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.coeffs.get(0, 0j).real, dtype=float)
        for k, c in self.coeffs.items():
            if k == 0:
                continue
            # c e^{ikt} + conj pair = 2(Re c cos kt - Im c sin kt)
            out += 2.0 * (c.real * np.cos(k * t) - c.imag * np.sin(k * t))
        return out

    def derivative_sup_bound(self, order):
        """Sup-norm bound sum_k 2|c_k| k^order for the order-th derivative.

        Sharp for single-harmonic profiles; used to bound finite-difference
        truncation error of sampled corrugations.
        """
        return sum(
            2.0 * abs(c) * float(k) ** order for k, c in self.coeffs.items() if k != 0
        )

    def sup_bound(self):
        return self.derivative_sup_bound(0) + abs(self.mean())

    @property
    def max_freq(self):
        return max(self.coeffs.keys(), default=0)

    def __repr__(self):
        terms = ", ".join("%d: %s" % (k, c) for k, c in sorted(self.coeffs.items()))
        return "TrigPoly({%s})" % terms


# ---------------------------------------------------------------------------
# The canonical corrugation profiles.
# ---------------------------------------------------------------------------

GAMMA1 = TrigPoly.from_sin_cos(sin={2: -0.25})
GAMMA2 = TrigPoly.from_sin_cos(sin={1: math.sqrt(2.0)})

#: period average of gamma(2)^2 (exact: 2 sin^2 t has average 1)
C_BAR = (GAMMA2 * GAMMA2).mean()

GAMMA3 = GAMMA2 * GAMMA2.derivative()
GAMMA4 = (GAMMA2 * GAMMA2) - C_BAR

_PROFILES = {1: GAMMA1, 2: GAMMA2, 3: GAMMA3, 4: GAMMA4}


def gamma(k):
    """Return canonical profile k in {1, 2, 3, 4}."""
    try:
        return _PROFILES[k]
    except KeyError:
        raise IndexError("no corrugation profile with index %r" % (k,)) from None
