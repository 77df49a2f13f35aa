"""Primitive directions and the algebra of symmetric 2-tensors.

The engine decomposes symmetric positive matrices over a fixed family of
``n* = n(n+1)/2`` unit directions: the coordinate axes together with the
normalized diagonals (e_i + e_j)/sqrt(2), i < j.  Rank-one squares of these
directions span the symmetric matrices, and the anchor

    h0 = sum_k nu_k (x) nu_k

is the metric every stage works a bounded distance from.

Ordering matters: the first ``n`` directions are exactly the ones with a
nonzero first component (e_1 itself, then the diagonals through e_1).  Those
are the directions along which oscillation error can be transferred between
the base slot and the remaining rank-one squares (``phi_matrix`` below is
invertible precisely there), so steps along them get the sharper,
error-cancelling treatment while the trailing directions take ordinary steps.

Symmetric matrices travel through the engine in packed form: the entries
h[i, j] for i <= j in lexicographic order, a vector of length n(n+1)/2.
"""

from collections import namedtuple
from functools import lru_cache

import numpy as np

from .errors import DimensionError, DirectionError

__all__ = [
    "PrimitiveBasis",
    "PsiCoordinates",
    "primitive_basis",
    "build_basis",
    "decompose_L",
    "psi",
    "phi",
    "pack_index_pairs",
    "sym_pack",
    "sym_unpack",
    "pack_outer",
    "sym_product_pack",
    "DIRECTION_THRESHOLD",
]

#: smallest admissible |nu . e_1| for the oscillation-transfer split
DIRECTION_THRESHOLD = 1e-8


# ---------------------------------------------------------------------------
# packed symmetric coordinates
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def pack_index_pairs(n):
    """The (i, j), i <= j index pairs in packing order."""
    return tuple((i, j) for i in range(n) for j in range(i, n))


def sym_pack(mat):
    """Pack (..., n, n) symmetric matrices into (..., n(n+1)/2) vectors.

    The strict upper triangle is read; no symmetrization is performed, so
    feed genuinely symmetric data (or use sym_product_pack).
    """
    mat = np.asarray(mat)
    n = mat.shape[-1]
    if mat.shape[-2] != n:
        raise DimensionError("expected square trailing axes, got %r" % (mat.shape,))
    pairs = pack_index_pairs(n)
    return np.stack([mat[..., i, j] for i, j in pairs], axis=-1)


def sym_unpack(packed, n):
    """Inverse of sym_pack: (..., n(n+1)/2) -> full symmetric (..., n, n)."""
    packed = np.asarray(packed)
    pairs = pack_index_pairs(n)
    if packed.shape[-1] != len(pairs):
        raise DimensionError(
            "packed length %d does not match n=%d" % (packed.shape[-1], n)
        )
    out = np.zeros(packed.shape[:-1] + (n, n), dtype=packed.dtype)
    for k, (i, j) in enumerate(pairs):
        out[..., i, j] = packed[..., k]
        out[..., j, i] = packed[..., k]
    return out


def pack_outer(u, v):
    """Packed symmetrized outer product sym(u (x) v) of two (..., n) fields."""
    u = np.asarray(u)
    v = np.asarray(v)
    n = u.shape[-1]
    pairs = pack_index_pairs(n)
    return np.stack(
        [0.5 * (u[..., i] * v[..., j] + u[..., j] * v[..., i]) for i, j in pairs],
        axis=-1,
    )


def sym_product_pack(A, B):
    """Packed 2 sym(A^T B) for (..., m, n) arrays A, B (shared m axis)."""
    P = np.einsum("...ai,...aj->...ij", A, B)
    return sym_pack(P + np.swapaxes(P, -1, -2))


# ---------------------------------------------------------------------------
# the basis itself
# ---------------------------------------------------------------------------

class PrimitiveBasis:
    """Primitive directions in R^n plus the linear maps built on them.

    Attributes
    ----------
    n, n_star : int
        Base dimension and number of directions, n_star = n(n+1)/2.
    directions : (n_star, n) ndarray
        Unit directions; the first n have nonzero first component.
    h0 : (n, n) ndarray
        sum of the rank-one squares of all directions.
    squares : (n_star, n_star) ndarray
        Column k is the packed rank-one square of direction k.
    dual_coeffs : (n_star, n_star) ndarray
        Row j gives the coefficient functional L_j: decomposing a packed
        symmetric h as sum_j L_j(h) nu_j (x) nu_j.  L_j(h0) = 1 for all j.
    """

    def __init__(self, n):
        if n < 2:
            raise DimensionError("base dimension must be >= 2, got %d" % n)
        self.n = n
        self.n_star = n * (n + 1) // 2

        eye = np.eye(n)
        inv_sqrt2 = 1.0 / np.sqrt(2.0)
        dirs = [eye[0]]
        for j in range(1, n):
            dirs.append((eye[0] + eye[j]) * inv_sqrt2)
        for i in range(1, n):
            dirs.append(eye[i])
        for i in range(1, n):
            for j in range(i + 1, n):
                dirs.append((eye[i] + eye[j]) * inv_sqrt2)
        self.directions = np.array(dirs)
        assert self.directions.shape == (self.n_star, n)

        squares_full = np.einsum("ki,kj->kij", self.directions, self.directions)
        self.squares = sym_pack(squares_full).T  # columns = packed squares
        self.h0 = squares_full.sum(axis=0)
        self.h0_packed = sym_pack(self.h0)
        self.dual_coeffs = np.linalg.inv(self.squares)
        self._psi_cache = {}

    # ----- coefficient functionals ---------------------------------------

    def decompose_L(self, packed):
        """Coefficients c with sum_j c_j nu_j (x) nu_j = packed, as (..., n_star)."""
        packed = np.asarray(packed, dtype=float)
        if packed.shape[-1] != self.n_star:
            raise DimensionError(
                "packed length %d, expected %d" % (packed.shape[-1], self.n_star)
            )
        return packed @ self.dual_coeffs.T

    def reconstruct(self, coeffs):
        """Inverse of decompose_L: coefficients -> packed symmetric field."""
        coeffs = np.asarray(coeffs, dtype=float)
        return coeffs @ self.squares.T

    # ----- oscillation transfer (phi / psi) -------------------------------

    def phi_matrix(self, nu):
        """Matrix of (alpha, beta) -> sum_i alpha_i e_i (.) nu
        + sum_{j>n} beta_j nu_j (x) nu_j in packed coordinates.

        (.) is the symmetrized product a (.) b = (ab^T + ba^T)/2.  Columns:
        first the n base slots, then the n_star - n trailing squares.
        """
        nu = np.asarray(nu, dtype=float)
        if nu.shape != (self.n,):
            raise DimensionError("direction must be a length-%d vector" % self.n)
        eye = np.eye(self.n)
        cols = [pack_outer(eye[i], nu) for i in range(self.n)]
        cols.extend(self.squares[:, j] for j in range(self.n, self.n_star))
        return np.stack(cols, axis=-1)

    def psi_matrix(self, nu, direction_threshold=None):
        """Inverse of phi_matrix(nu).

        Exists iff the direction has first component exceeding the
        threshold (default DIRECTION_THRESHOLD); DirectionError otherwise.
        """
        nu = np.asarray(nu, dtype=float)
        if direction_threshold is None:
            direction_threshold = DIRECTION_THRESHOLD
        if abs(nu[0]) < direction_threshold:
            raise DirectionError(
                "oscillation transfer needs nu . e_1 != 0, got %r" % (nu,)
            )
        key = tuple(np.round(nu, 15))
        cached = self._psi_cache.get(key)
        if cached is not None:
            return cached
        phi = self.phi_matrix(nu)
        det = np.linalg.det(phi)
        if abs(det) < 1e-12:
            raise DirectionError("transfer matrix singular for direction %r" % (nu,))
        psi = np.linalg.inv(phi)
        self._psi_cache[key] = psi
        return psi

    def psi(self, nu, packed, direction_threshold=None):
        """Split packed symmetric data M into (alpha, beta) with
        M = sum alpha_i e_i (.) nu + sum beta_j nu_j (x) nu_j (trailing j)."""
        packed = np.asarray(packed, dtype=float)
        coeffs = packed @ self.psi_matrix(nu, direction_threshold).T
        return coeffs[..., : self.n], coeffs[..., self.n:]

    def phi(self, nu, alpha, beta):
        """Reassemble packed symmetric data from a (alpha, beta) split."""
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        coeffs = np.concatenate(
            [alpha, np.broadcast_to(beta, alpha.shape[:-1] + (self.n_star - self.n,))],
            axis=-1,
        )
        return coeffs @ self.phi_matrix(nu).T

    def __repr__(self):
        return "PrimitiveBasis(n=%d, n_star=%d)" % (self.n, self.n_star)


@lru_cache(maxsize=8)
def primitive_basis(n):
    """Shared PrimitiveBasis instance for dimension n."""
    return PrimitiveBasis(n)


def build_basis(n):
    """Construct (or fetch the shared) primitive basis for dimension n."""
    return primitive_basis(n)


# ---------------------------------------------------------------------------
# functional front end (accepts full or packed symmetric data)
# ---------------------------------------------------------------------------

PsiCoordinates = namedtuple("PsiCoordinates", ["alpha", "beta"])


def _as_packed(basis, h):
    h = np.asarray(h, dtype=float)
    if h.shape[-1:] == (basis.n_star,) and h.shape[-2:] != (basis.n, basis.n):
        return h
    if h.shape[-2:] == (basis.n, basis.n):
        return sym_pack(h)
    raise DimensionError(
        "expected trailing (%d, %d) matrix or length-%d packed vector, got %r"
        % (basis.n, basis.n, basis.n_star, h.shape)
    )


def decompose_L(basis, h):
    """Coefficients L_j(h) with h = sum_j L_j(h) nu_j (x) nu_j.

    Accepts full symmetric matrices (..., n, n) or packed (..., n_star).
    """
    return basis.decompose_L(_as_packed(basis, h))


def psi(basis, M, nu, direction_threshold=None):
    """Split M = sum_i alpha_i e_i (.) nu + sum_{j>n} beta_j nu_j (x) nu_j."""
    alpha, beta = basis.psi(nu, _as_packed(basis, M), direction_threshold)
    return PsiCoordinates(alpha, beta)


def phi(basis, coords, nu):
    """Reassemble the full symmetric matrix from a PsiCoordinates split."""
    alpha, beta = coords
    return sym_unpack(basis.phi(nu, alpha, beta), basis.n)
