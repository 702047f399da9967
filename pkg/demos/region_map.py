"""Coarse text rendering of the existence verdicts on a (κ, β) grid."""

from schro.branches import classify_region
from schro.system import Params
from schro.verify import region_axis

SYMBOL = {"NoPositiveSolution": "x", "PositiveGroundState": "G", "ExistsSymmetric": "s",
          "Unknown": "."}

ks = region_axis(-2.0, 2.9, 50)
bs = region_axis(-2.0, 2.9, 50)
for mu2 in (1.0, 2.0):
    print(f"μ₁=1, μ₂={mu2:g}   rows: β from 2.9 down to -2, columns: κ from -2 to 2.9")
    for b in bs[::-2]:
        print("  " + "".join(SYMBOL[classify_region(Params(k, b, 1.0, mu2)).value] for k in ks))
    print("  x none  G positive ground state  s symmetric solution  . not covered")
