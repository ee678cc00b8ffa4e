"""The two-point toy model and its transcendental maximiser.

Data {0, x}, second mean pinned at 0, both variances 1/2.  The maximiser
solves (x - mu) e^{mu^2} - x + mu e^{-mu (2x - mu)} = 0, which has no
closed form, so we compute it to many digits instead.
"""

import mpmath

from gmmcrit import critical_residual, interior_threshold, recover_alpha, solve_mu
from gmmcrit.toy import boundary_supremum, edge_slope

res = solve_mu(2, 40)
print("mu_hat    =", mpmath.nstr(res.mu_hat, 40))
print("alpha_hat =", mpmath.nstr(res.alpha_hat, 40))
print("residual  =", mpmath.nstr(res.residual, 3))
print("loglik    =", res.loglik_at_max, " (best boundary value", boundary_supremum(2.0), ")")

# The critical equation has a second root, but its alpha is not a weight.
for m in res.candidates:
    try:
        print("root", mpmath.nstr(m, 12), "-> alpha", mpmath.nstr(recover_alpha(m, 2, 25), 12))
    except ArithmeticError as exc:
        print("root", mpmath.nstr(m, 12), "rejected:", exc)

# Constants printed with 18 digits elsewhere only carry ~12 correct ones:
# the residual at the printed mu is far from zero.
printed = mpmath.mpf("1.95742494230308167")
print("\nresidual at 1.95742494230308167:", mpmath.nstr(critical_residual(printed, 2, digits=30), 3))

# Below some x the maximum sits on the boundary alpha = 1, mu = x/2.
# The interior takes over once the edge point stops being a local maximum.
print("\nedge slope at x=1.5:", mpmath.nstr(edge_slope(1.5), 6))
print("edge slope at x=1.6:", mpmath.nstr(edge_slope(1.6), 6))
print("threshold:", interior_threshold(1e-4))
print("value-only threshold:", interior_threshold(1e-4, require_edge_descent=False))

# Far from the threshold the maximiser crowds against x.
far = solve_mu(10, 25)
print("\nx=10: x - mu_hat =", mpmath.nstr(10 - far.mu_hat, 5))
