"""Toy log-likelihood surface on a grid, written as CSV for plotting.

Usage: python3 demos/surface.py [out.csv]
"""

import sys

import mpmath

from gmmcrit import solve_mu, surface_grid

grid = surface_grid(2.0, 201, (-1.0, 4.0), 201)
a, m, v = grid.argmax()
res = solve_mu(2, 25)
print(f"grid peak alpha={a:.3f} mu={m:.3f} loglik={v:.6f}")
print(f"exact peak alpha={mpmath.nstr(res.alpha_hat, 8)} mu={mpmath.nstr(res.mu_hat, 8)} "
      f"loglik={res.loglik_at_max:.6f}")
print("grid never exceeds the exact maximum:", bool((grid.values <= res.loglik_at_max + 1e-9).all()))

if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(grid.to_csv())
    print("wrote", sys.argv[1])
