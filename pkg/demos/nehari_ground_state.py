"""Nehari minimization for unequal self-couplings, compared with T⁺."""

from schro.branches import synchronized_plus
from schro.ground_state import default_grid, solve_ground_state
from schro.mesh import l2_norm
from schro.nehari import energy_I, minimize_ground_state, project
from schro.system import Params

gs = solve_ground_state(default_grid(3))
g = gs.grid
for p in (Params(-0.5, 1.0, dim=3), Params(-0.5, 1.0, 1.0, 2.0, 3), Params(-0.2, 0.3, dim=3)):
    st = minimize_ground_state(p, (gs.omega, gs.omega), max_iter=5000)
    u, v = st.pair
    line = (f"κ={p.kappa:+.2f} β={p.beta:.2f} μ=({p.mu1:g},{p.mu2:g})  I={st.energy:.8f}  "
            f"iterations {st.iterations:4d}  ‖u‖={l2_norm(g, u):.5f} ‖v‖={l2_norm(g, v):.5f}  "
            f"positive {st.positive}")
    if p.symmetric:
        tu, tv = project(p, *synchronized_plus(p.kappa, p.beta, gs, grid=g))
        line += f"  I(T⁺)-I = {energy_I(p, tu, tv) - st.energy:.2e}"
    print(line)
