"""Bifurcation values κ_j(β) along the synchronized branch as β approaches -1."""

from schro.branches import (branch_l2_norm, count_bifurcations_in_unit_interval, f_of_beta,
                            find_bifurcation_kappas)
from schro.ground_state import default_grid, solve_ground_state

for dim in (1, 3):
    gs = solve_ground_state(default_grid(dim))
    print(f"N = {dim}")
    for beta in (0.5, 0.0, -0.5, -0.8, -0.9, -0.95):
        bps = find_bifurcation_kappas(gs, beta, 4)
        ks = ", ".join(f"κ_{bp.j}={bp.kappa_j:+.6f}" for bp in bps)
        norm = branch_l2_norm(bps[0]) if bps else float("nan")
        print(f"  β={beta:+.2f}  f={f_of_beta(beta):8.3f}  "
              f"roots in (-1,0]: {count_bifurcations_in_unit_interval(gs, beta)}  "
              f"‖u‖ at κ₁ = {norm:8.4f}  {ks}")
