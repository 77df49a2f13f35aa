# The two exact ingredients everything else leans on: the corrugation
# profiles (trigonometric polynomials with rational-ish coefficients) and
# the primitive decomposition of symmetric matrices.  Everything printed
# here should sit at machine precision -- these are identities, not
# approximations.

import numpy as np

from corrugate import (
    C_BAR,
    GAMMA1,
    GAMMA2,
    GAMMA3,
    GAMMA4,
    build_basis,
    gamma,
    phi,
    psi,
    sym_pack,
    sym_unpack,
)

t = np.linspace(0.0, 2.0 * np.pi, 4097)

print("profiles:")
print("  gamma1 = %r" % GAMMA1)
print("  gamma2 = %r" % GAMMA2)
print("  gamma3 = %r  (= gamma2 * gamma2')" % GAMMA3)
print("  gamma4 = %r  (= gamma2^2 - c_bar)" % GAMMA4)
print("  c_bar  = mean(gamma2^2) = %.17g" % C_BAR)

# The defining identity: the first profile's slope swallows the square of
# the second profile's slope, pointwise in t.
ident = 2.0 * GAMMA1.derivative()(t) + GAMMA2.derivative()(t) ** 2 - 1.0
print("\n|2 gamma1' + (gamma2')^2 - 1|_inf = %.3g" % np.abs(ident).max())

# gamma3 and gamma4 are stated as products; check against the profile algebra.
g3 = GAMMA2(t) * GAMMA2.derivative()(t)
g4 = GAMMA2(t) ** 2 - C_BAR
print("|gamma3 - gamma2 gamma2'|_inf     = %.3g" % np.abs(GAMMA3(t) - g3).max())
print("|gamma4 - (gamma2^2 - c_bar)|_inf = %.3g" % np.abs(GAMMA4(t) - g4).max())

# The cancellation cascade repeatedly antidifferentiates zero-mean profiles.
# Means stay exactly zero and derivative() inverts antiderivative() exactly
# (the coefficients just pick up factors of 1/ik).
chain = GAMMA4
print("\nantiderivative chain from gamma4:")
for depth in range(1, 5):
    chain = chain.antiderivative()
    back = chain
    for _ in range(depth):
        back = back.derivative()
    print(
        "  depth %d: mean = %.3g, |D^%d chain - gamma4|_inf = %.3g"
        % (depth, abs(chain.mean()), depth, np.abs(back(t) - GAMMA4(t)).max())
    )

# gamma(k) hands out the k-th profile by number.
assert gamma(2) is GAMMA2

# ---------------------------------------------------------------------------
# The matrix side.  Symmetric n x n matrices are spanned by squares of a
# fixed direction family; decompose_L gives the coefficients in that family.
for n in (2, 3):
    basis = build_basis(n)
    print("\nn = %d: %d primitive directions" % (n, basis.n_star))
    rng = np.random.default_rng(7)
    M = rng.normal(size=(n, n))
    M = 0.5 * (M + M.T)
    coeffs = basis.decompose_L(sym_pack(M))
    back = basis.reconstruct(coeffs)
    print("  L-decomposition roundtrip: |M - sum L_j(M) nu_j nu_j|_inf = %.3g"
          % np.abs(back - sym_pack(M)).max())

    # Phi/Psi: coordinates adapted to one corrugation direction.  psi splits a
    # metric-like matrix relative to nu, phi rebuilds it.
    nu = basis.directions[0]
    co = psi(basis, sym_pack(np.eye(n) + 0.1 * M), nu)
    rebuilt = phi(basis, co, nu)
    print("  psi/phi roundtrip through direction %s: %.3g"
          % (np.round(nu, 3), np.abs(sym_pack(rebuilt) - sym_pack(np.eye(n) + 0.1 * M)).max()))

print("\nall of the above are exact identities; anything above ~1e-12 is a bug")
