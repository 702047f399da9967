"""Weighted eigenvalues λ_j(κ) in one dimension next to their closed forms."""

import numpy as np

from schro import build_grid, solve_ground_state
from schro.spectrum import coupling_C, eigenvalues
from schro.verify import poschl_teller

gs = solve_ground_state(build_grid(1, 15.0, 20001))
print(" κ       C(κ)      j   λ_j numeric        λ_j exact")
for kappa in (-0.9, -0.6, 0.0, 0.5, 0.9):
    lam = eigenvalues(gs, kappa, 3)
    for j in range(1, 4):
        print(f"{kappa:+.2f}  {coupling_C(kappa):9.4f}  {j}  {lam[j - 1]:16.10f}  "
              f"{poschl_teller(j, kappa):16.10f}")
# every λ_j decreases as κ grows
grid = np.linspace(-0.9, 0.9, 19)
lam1 = [eigenvalues(gs, k, 1)[0] for k in grid]
print("λ₁ strictly decreasing on [-0.9, 0.9]:", bool(np.all(np.diff(lam1) < 0)))
