"""Limiting absorption: the eps -> 0 limit of omega = lambda - i eps.

Sweeps the absorption parameter downward and shows that consecutive
solutions converge in the weighted H^{1,beta} norm (beta < -1/2), i.e. the
resolvent solutions select a limit; also checks the omega-derivative
identity P(omega) du/domega = 2 omega Laplacian(u) by finite differences.
"""

import numpy as np

from iwchannel import topography
from iwchannel.chebyshev import TensorGrid, cheb_nodes
from iwchannel.endmodes import weighted_norm
from iwchannel.geometry import ChannelSpec
from iwchannel.solver import ScalingProfile, gaussian_forcing, lap_sweep

chan = ChannelSpec(topography.gaussian(1.0, 10.0))
lam, L = 0.7, 15.0
n1, n2 = 96, 40

tg = TensorGrid(cheb_nodes(n1), cheb_nodes(n2))
forcing = gaussian_forcing(tg, L, ScalingProfile(), 0.5, width=0.3,
                           wavenumbers=())

eps_values = [1e-2, 1e-3, 1e-4, 1e-5]
sols, diffs, pdu = lap_sweep(chan, lam, eps_values, L, n1=n1, n2=n2,
                             forcing=forcing)

print("eps sweep (decreasing):")
for k, sol in enumerate(sols):
    line = f"  eps = {-np.imag(sol.omega):.0e}"
    if k > 0:
        h1 = weighted_norm(sols[k], s=1, beta=-0.6,
                           field=sols[k].u - sols[k - 1].u)
        line += f"  H^(1,-0.6) diff from previous = {h1:.3e}"
    print(line)

print("\nd/domega residuals (relative):")
for eps, r in zip(sorted(eps_values, reverse=True), pdu):
    print(f"  eps = {eps:.0e}: {r:.2e}")
