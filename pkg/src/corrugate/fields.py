"""Grid-sampled fields over rectangles: differentiation, mollification, norms.

Everything downstream works on uniform tensor-product grids. A Field couples
a GridDomain with a value array whose leading axes run over grid nodes and
whose trailing axes hold the component structure (empty for scalars, (m,) for
maps into R^m, (n(n+1)/2,) for packed symmetric matrices).

Differentiation is 4th-order finite differences: centered 5-point stencils in
the interior, one-sided 4th-order stencils within two cells of each boundary,
so accuracy is uniform up to the edge and degree-4 polynomials differentiate
exactly (to roundoff).

Mollification is a separable discrete convolution with the compactly
supported bump (1 - (t/ell)^2)^4, discretely normalized per axis.  The output
domain is shrunk by the kernel radius per side so every surviving node saw
only real data (no boundary padding enters the result).

Fields may carry an oscillation frequency tag (`freq`, radians per unit
length): the largest frequency deliberately inserted by a corrugation.  All
derivative operations enforce the Nyquist guard
    spacing <= 2*pi / (freq * samples_per_period)
with samples_per_period = 16 by default.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.ndimage import convolve1d

from .errors import (
    AlignmentError,
    DimensionError,
    DomainTooSmall,
    ParamError,
    ResolutionError,
)

__all__ = [
    "GridDomain",
    "Field",
    "NormReport",
    "sample",
    "grid_coordinates",
    "phase_field",
    "derivative",
    "gradient",
    "jacobian",
    "induced_metric",
    "mollify",
    "smooth",
    "restrict",
    "holder_seminorm",
    "ck_norm",
    "second_derivative_sup",
    "c1c0_ratio",
    "sup_norm",
    "norm_report",
    "max_resolved_freq",
    "check_resolution",
    "fd_gradient_error_bound",
    "SAMPLES_PER_PERIOD",
    "MIN_POINTS",
]

#: minimum sample points per oscillation period (Nyquist guard)
SAMPLES_PER_PERIOD = 16

#: minimum grid points per axis
MIN_POINTS = 9

#: sup-norm constant of the 4th-order first-derivative truncation error,
#: h^4 * f^(5) * C; 1/5 for the one-sided boundary rows (worst case), with
#: slack folded in by callers.
D1_ERROR_CONST = 0.25


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridDomain:
    """Axis-aligned box [lower, upper] sampled with npts nodes per axis."""

    lower: tuple
    upper: tuple
    npts: tuple

    def __post_init__(self):
        lower = tuple(float(x) for x in np.atleast_1d(self.lower))
        upper = tuple(float(x) for x in np.atleast_1d(self.upper))
        npts = tuple(int(k) for k in np.atleast_1d(self.npts))
        if not (len(lower) == len(upper) == len(npts)):
            raise DimensionError("lower/upper/npts lengths differ")
        if any(k < MIN_POINTS for k in npts):
            raise DomainTooSmall("need >= %d points per axis, got %r" % (MIN_POINTS, npts))
        if any(u <= l for l, u in zip(lower, upper)):
            raise ParamError("upper corner must exceed lower corner")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "npts", npts)

    @classmethod
    def square(cls, dim, points, lower=0.0, upper=1.0):
        return cls((lower,) * dim, (upper,) * dim, (points,) * dim)

    @property
    def dim(self):
        return len(self.npts)

    @property
    def spacing(self):
        return tuple(
            (u - l) / (k - 1) for l, u, k in zip(self.lower, self.upper, self.npts)
        )

    @property
    def extent(self):
        return tuple(u - l for l, u in zip(self.lower, self.upper))

    def axis(self, i):
        return np.linspace(self.lower[i], self.upper[i], self.npts[i])

    def __repr__(self):
        return "GridDomain(%r, %r, npts=%r)" % (self.lower, self.upper, self.npts)


def grid_coordinates(domain):
    """Node coordinates as an array of shape npts + (dim,)."""
    axes = np.meshgrid(*[domain.axis(i) for i in range(domain.dim)], indexing="ij")
    return np.stack(axes, axis=-1)


def phase_field(domain, nu):
    """The linear phase x . nu sampled on the grid (broadcasted, no meshgrid)."""
    nu = np.asarray(nu, dtype=float)
    out = np.zeros(domain.npts)
    for j in range(domain.dim):
        shape = [1] * domain.dim
        shape[j] = domain.npts[j]
        out = out + nu[j] * domain.axis(j).reshape(shape)
    return out


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Field:
    """Immutable sampled field: values over domain nodes plus component axes.

    freq tags the highest oscillation frequency (rad/unit) deliberately put
    into the field; 0 means "slow / untagged".
    """

    domain: GridDomain
    values: np.ndarray
    freq: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        nd = self.domain.dim
        if vals.shape[:nd] != self.domain.npts:
            raise DimensionError(
                "value leading shape %r does not match grid %r"
                % (vals.shape[:nd], self.domain.npts)
            )
        if not np.all(np.isfinite(vals)):
            raise ParamError("field contains non-finite values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "freq", float(self.freq))

    @property
    def comp_shape(self):
        return self.values.shape[self.domain.dim:]

    def with_values(self, values, freq=None):
        return Field(self.domain, values, self.freq if freq is None else freq)

    def __repr__(self):
        return "Field(%r, comp=%r, freq=%g)" % (self.domain, self.comp_shape, self.freq)


def sample(domain, fn, freq=0.0):
    """Field from a callable taking an npts + (dim,) coordinate array."""
    return Field(domain, np.asarray(fn(grid_coordinates(domain)), dtype=float), freq)


# ---------------------------------------------------------------------------
# Nyquist bookkeeping
# ---------------------------------------------------------------------------

def max_resolved_freq(domain, spp=SAMPLES_PER_PERIOD):
    """Largest oscillation frequency the grid resolves at spp samples/period."""
    return 2.0 * np.pi / (spp * max(domain.spacing))


def check_resolution(domain, freq, spp=SAMPLES_PER_PERIOD, what="field"):
    if freq <= 0.0:
        return
    limit = max_resolved_freq(domain, spp)
    if freq > limit:
        raise ResolutionError(
            "%s oscillates at %.6g rad/unit but the grid resolves only %.6g "
            "(spacing %.3g, %d samples/period)"
            % (what, freq, limit, max(domain.spacing), spp)
        )


def fd_gradient_error_bound(h, fifth_derivative_sup):
    """Sup-norm bound for the 4th-order first-derivative truncation error."""
    return D1_ERROR_CONST * h**4 * fifth_derivative_sup


# ---------------------------------------------------------------------------
# finite differences (order 4)
# ---------------------------------------------------------------------------

def _d1_axis0(v, h):
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    out[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2] - 6.0 * v[3] + v[4]) / (12.0 * h)
    out[-2] = (3.0 * v[-1] + 10.0 * v[-2] - 18.0 * v[-3] + 6.0 * v[-4] - v[-5]) / (12.0 * h)
    out[-1] = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3] - 16.0 * v[-4] + 3.0 * v[-5]) / (12.0 * h)
    return out


def _d2_axis0(v, h):
    h2 = 12.0 * h * h
    out = np.empty_like(v)
    out[2:-2] = (-v[:-4] + 16.0 * v[1:-3] - 30.0 * v[2:-2] + 16.0 * v[3:-1] - v[4:]) / h2
    out[0] = (45.0 * v[0] - 154.0 * v[1] + 214.0 * v[2] - 156.0 * v[3] + 61.0 * v[4] - 10.0 * v[5]) / h2
    out[1] = (10.0 * v[0] - 15.0 * v[1] - 4.0 * v[2] + 14.0 * v[3] - 6.0 * v[4] + v[5]) / h2
    out[-2] = (10.0 * v[-1] - 15.0 * v[-2] - 4.0 * v[-3] + 14.0 * v[-4] - 6.0 * v[-5] + v[-6]) / h2
    out[-1] = (45.0 * v[-1] - 154.0 * v[-2] + 214.0 * v[-3] - 156.0 * v[-4] + 61.0 * v[-5] - 10.0 * v[-6]) / h2
    return out


def derivative(f, axis, order=1, spp=SAMPLES_PER_PERIOD):
    """Partial derivative of given order (1 or 2) along a grid axis."""
    if not 0 <= axis < f.domain.dim:
        raise DimensionError("axis %d out of range for dim %d" % (axis, f.domain.dim))
    if order not in (1, 2):
        raise ParamError("order must be 1 or 2, got %r" % (order,))
    check_resolution(f.domain, f.freq, spp, "differentiated field")
    n_axis = f.domain.npts[axis]
    if n_axis < 6:
        raise ResolutionError("order-4 stencils need >= 6 nodes along the axis")
    h = f.domain.spacing[axis]
    v = np.moveaxis(f.values, axis, 0)
    out = _d1_axis0(v, h) if order == 1 else _d2_axis0(v, h)
    return f.with_values(np.moveaxis(out, 0, axis))


def gradient(f, spp=SAMPLES_PER_PERIOD):
    """Gradient of a scalar field as a vector field (trailing axis = dim)."""
    return f.with_values(
        np.stack([derivative(f, j, 1, spp).values for j in range(f.domain.dim)], axis=-1)
    )


def jacobian(u, spp=SAMPLES_PER_PERIOD):
    """Derivative along every axis, appended as the new trailing axis.

    For a map into R^m this is the (m, n) Jacobian per node with rows =
    components and columns = base directions.
    """
    return u.with_values(
        np.stack([derivative(u, j, 1, spp).values for j in range(u.domain.dim)], axis=-1)
    )


def induced_metric(u, spp=SAMPLES_PER_PERIOD):
    """Packed first fundamental form Du^T Du of a map into R^m."""
    from .basis import sym_pack  # local import to avoid cycle at module load

    if len(u.comp_shape) != 1:
        raise DimensionError("induced_metric expects a vector-valued field")
    J = jacobian(u, spp).values
    return u.with_values(sym_pack(np.einsum("...ai,...aj->...ij", J, J)))


# ---------------------------------------------------------------------------
# mollification
# ---------------------------------------------------------------------------

def _bump_weights(ell, h):
    """Discrete normalized samples of (1-(t/ell)^2)^4 at node offsets."""
    half = int(np.ceil(ell / h))
    t = np.arange(-half, half + 1) * h / ell
    w = np.maximum(0.0, 1.0 - t * t) ** 4
    return w / w.sum(), half


def mollify(f, ell):
    """Convolve with the compact bump of radius ell; shrink the domain by the
    kernel radius per side so no padded values survive.

    Constants are preserved exactly (normalization), affine fields to
    roundoff (even symmetry).
    """
    dom = f.domain
    if ell < 2.0 * max(dom.spacing):
        raise ResolutionError(
            "mollification scale %.3g below twice the grid spacing %.3g"
            % (ell, max(dom.spacing))
        )
    if min(dom.extent) <= 4.0 * ell:
        raise DomainTooSmall(
            "domain extent %r too small for mollification at ell=%.3g"
            % (dom.extent, ell)
        )
    vals = f.values
    halves = []
    for axis in range(dom.dim):
        w, half = _bump_weights(ell, dom.spacing[axis])
        halves.append(half)
        vals = convolve1d(vals, w, axis=axis, mode="nearest")
    slicer = tuple(slice(k, n - k) for k, n in zip(halves, dom.npts))
    slicer += (slice(None),) * len(f.comp_shape)
    new_npts = tuple(n - 2 * k for k, n in zip(halves, dom.npts))
    if any(k < MIN_POINTS for k in new_npts):
        raise DomainTooSmall("mollified grid %r below minimum size" % (new_npts,))
    new_dom = GridDomain(
        tuple(dom.axis(i)[halves[i]] for i in range(dom.dim)),
        tuple(dom.axis(i)[dom.npts[i] - 1 - halves[i]] for i in range(dom.dim)),
        new_npts,
    )
    return Field(new_dom, np.ascontiguousarray(vals[slicer]), f.freq)


def smooth(f, ell):
    """Same-domain companion to mollify: convolve with the ell-bump without
    cropping.  Constants pass through exactly; within ell of the boundary the
    kernel leans on nearest-value padding, so this is meant for fields whose
    genuine variation is already at scale ell or slower (amplitude and
    coefficient fields), where the padding bias is second order.
    """
    dom = f.domain
    if ell < 2.0 * max(dom.spacing):
        raise ResolutionError(
            "smoothing scale %.3g below twice the grid spacing %.3g"
            % (ell, max(dom.spacing))
        )
    vals = f.values
    for axis in range(dom.dim):
        w, _ = _bump_weights(ell, dom.spacing[axis])
        vals = convolve1d(vals, w, axis=axis, mode="nearest")
    return Field(dom, vals, f.freq)


# ---------------------------------------------------------------------------
# restriction
# ---------------------------------------------------------------------------

def restrict(f, sub):
    """Exact sample extraction onto a node-aligned subdomain."""
    dom = f.domain
    if sub.dim != dom.dim:
        raise DimensionError("subdomain dimension mismatch")
    slices = []
    for i in range(dom.dim):
        h = dom.spacing[i]
        if abs(sub.spacing[i] - h) > 1e-9 * h:
            raise AlignmentError(
                "axis %d spacing %.17g does not match parent %.17g"
                % (i, sub.spacing[i], h)
            )
        off = (sub.lower[i] - dom.lower[i]) / h
        i0 = int(round(off))
        if abs(off - i0) > 1e-6:
            raise AlignmentError("axis %d nodes misaligned (offset %.3g cells)" % (i, off))
        i1 = i0 + sub.npts[i]
        if i0 < 0 or i1 > dom.npts[i]:
            raise AlignmentError("axis %d subdomain outside parent" % i)
        slices.append(slice(i0, i1))
    slices += [slice(None)] * len(f.comp_shape)
    return Field(sub, f.values[tuple(slices)], f.freq)


# ---------------------------------------------------------------------------
# norms and seminorms
# ---------------------------------------------------------------------------

def sup_norm(f):
    vals = f.values if isinstance(f, Field) else np.asarray(f)
    return float(np.abs(vals).max()) if vals.size else 0.0


def holder_seminorm(f, alpha):
    """Dyadic-pair Hölder seminorm estimate (a lower bound of the true sup).

    Scans axis-aligned node pairs at separations 1, 2, 4, ... cells along
    every axis and maximizes |f(x)-f(y)| / |x-y|^alpha.
    """
    if not 0.0 < alpha <= 1.0:
        raise ParamError("alpha must lie in (0, 1], got %r" % (alpha,))
    nd = f.domain.dim
    best = 0.0
    vals = f.values
    for axis in range(nd):
        h = f.domain.spacing[axis]
        v = np.moveaxis(vals, axis, 0)
        s = 1
        while s < f.domain.npts[axis]:
            diff = np.abs(v[s:] - v[:-s]).max()
            best = max(best, float(diff) / (s * h) ** alpha)
            s *= 2
    return best


def second_derivative_sup(f, spp=SAMPLES_PER_PERIOD):
    """max over index pairs i <= j of sup |d_i d_j f| (mixed ones via
    repeated first-derivative stencils)."""
    worst = 0.0
    for i in range(f.domain.dim):
        for j in range(i, f.domain.dim):
            if i == j:
                d2 = derivative(f, i, 2, spp)
            else:
                d2 = derivative(derivative(f, i, 1, spp), j, 1, spp)
            worst = max(worst, sup_norm(d2))
    return worst


def ck_norm(f, k, spp=SAMPLES_PER_PERIOD):
    """Appendix-style norm sum_{j<=k} max_{|beta|=j} sup |d^beta f|, k <= 2."""
    if k < 0 or k > 2:
        raise ParamError("ck_norm supports k in {0, 1, 2}")
    total = sup_norm(f)
    if k >= 1:
        total += max(
            sup_norm(derivative(f, j, 1, spp)) for j in range(f.domain.dim)
        )
    if k >= 2:
        total += second_derivative_sup(f, spp)
    return total


def c1c0_ratio(f, spp=SAMPLES_PER_PERIOD, floor=1e-14):
    """Measured C^1/C^0 ratio — the effective frequency scale of a field."""
    c0 = sup_norm(f)
    if c0 < floor:
        return 0.0
    c1 = max(
        sup_norm(derivative(f, j, 1, spp)) for j in range(f.domain.dim)
    )
    return c1 / c0


@dataclass(frozen=True)
class NormReport:
    """Bundle of measured norms for one field."""

    sup_norm: float
    ck_norms: dict
    holder: dict = dc_field(default_factory=dict)


def norm_report(f, k_max=1, alphas=(), spp=SAMPLES_PER_PERIOD):
    """Sup norm, C^k estimates up to k_max, and Hölder seminorms per alpha."""
    cks = {k: ck_norm(f, k, spp) for k in range(1, k_max + 1)}
    hold = {a: holder_seminorm(f, a) for a in alphas}
    return NormReport(sup_norm(f), cks, hold)
