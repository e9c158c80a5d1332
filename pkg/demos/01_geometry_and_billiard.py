"""Channel geometry and the boundary billiard.

Builds the Gaussian-ridge channel, checks subcriticality, and iterates the
billiard map obtained by following +characteristics and -characteristics
alternately between the surface and the bottom.
"""

import numpy as np

from iwchannel import topography
from iwchannel.dynamics import BoundaryPoint, billiard_map, gamma
from iwchannel.geometry import ChannelSpec, c_slope, subcriticality_margin

chan = ChannelSpec(topography.gaussian(1.0, 10.0))
lam = 0.7

print(f"characteristic slope c_lambda = {c_slope(lam):.6f}")
print(f"max bottom slope             = {chan.max_slope():.6f}")
print(f"subcriticality margin        = {subcriticality_margin(chan, lam):.6f}")

# gamma maps a boundary point to the other end of the characteristic
# through it; applying it twice returns the starting point
p = BoundaryPoint("up", 0.3)
q = gamma(p, chan, lam, +1)
r = gamma(q, chan, lam, +1)
print(f"\ngamma involution: {p.theta:.6f} -> ({q.side}, {q.theta:.6f})"
      f" -> {r.theta:.6f}")

# over the flat ends the billiard is a rigid shift by 2 pi / c_lambda
print("\nbilliard orbit from theta = -8 (top):")
p = BoundaryPoint("up", -8.0)
for n in range(8):
    print(f"  step {n}: theta = {p.theta:+.4f}")
    p = billiard_map(p, chan, lam, 1)
shift = 2.0 * np.pi / c_slope(lam)
print(f"flat-end shift per step: {shift:.4f}")
