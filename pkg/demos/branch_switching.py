"""Continue the asymmetric branch born at κ₁ for N=1, β=-0.5 and watch positivity."""

from schro.branches import find_bifurcation_kappas, sigma_action
from schro.continuation import trace_from_bifurcation
from schro.ground_state import default_grid, solve_ground_state
from schro.mesh import l2_norm
from schro.system import Params, residual_norm

gs = solve_ground_state(default_grid(1))
bp = find_bifurcation_kappas(gs, -0.5, 1)[0]
print(f"κ₁ = {bp.kappa_j:.10f}")
seg = trace_from_bifurcation(bp, step=0.02, max_points=400, cutoff=False,
                             kappa_window=(-1.0, 2.0), max_step=0.05)
print(f"{len(seg.points)} points, termination {seg.termination}")
first_sign_change = None
for q in seg.points[::10]:
    g = q.grid
    print(f"  s={q.arclength:7.3f}  κ={q.kappa:+.5f}  ‖u‖={l2_norm(g, q.pair[0]):.4f}  "
          f"‖v‖={l2_norm(g, q.pair[1]):.4f}  asym={q.asymmetry:.4f}  positive {q.positive}")
for q in seg.points:
    if not q.positive:
        first_sign_change = q
        break
if first_sign_change is not None:
    print(f"first non-positive point at κ = {first_sign_change.kappa:+.6f}")
q = seg.points[len(seg.points) // 2]
p, su, sv = sigma_action(Params(q.kappa, -0.5, dim=1), *q.pair)
print(f"σ-image of a midpoint solves the system at κ={p.kappa:+.4f}: "
      f"residual {residual_norm(p, su.grid, su, sv):.2e}")
