"""The polynomials P_n and their recurrence, in exact arithmetic.

With integer (or rational) exponents every quantity below is a Fraction,
so "zero" really means zero.
"""

from ginprod.biorth import a_coeff, a_leading_order, biorth_pairing, p_coeffs, recurrence_residual
from ginprod.specfun import ParamSet

params = ParamSet(2, [0, 1])
print(f"M = {params.M}, nu = {params.nu}")

# P_n are monic with integer coefficients here
for n in range(4):
    print(f"  P_{n} coefficients (low to high): {[int(c) for c in p_coeffs(params, n).coeffs]}")

# int P_j Q_k dx, built from exact moments
print("\nbiorthogonality matrix for j, k < 5:")
for j in range(5):
    print("  ", [int(biorth_pairing(params, j, k)) for k in range(5)])

# x P_n = P_{n+1} + a_0 P_n + a_1 P_{n-1} + a_2 P_{n-2}
print("\nrecurrence coefficients a_{k,n}:")
for n in range(6):
    row = [int(a_coeff(params, k, n)) for k in range(params.M + 1)]
    zero = recurrence_residual(params, n) == [0]
    print(f"  n={n}: {row}  residual is zero: {zero}")

# a_{k,n} grows like binom(M+1, k+1) n**((k+1)M)
for k in range(params.M + 1):
    degree, lead = a_leading_order(params, k)
    print(f"  a_{{{k},n}} has degree {degree} in n with leading coefficient {lead}")
