"""Layer-potential cross-validation of the stationary solve.

Checks two independent identities satisfied by the solution and its
scaled Neumann data v:

  * reconstruction: chi_b u = E*[P, chi_b]u + E*f - S(chi_b v) at random
    interior probe points, with S the single-layer potential;
  * boundary equation: r + g = dC(chi_b v) on the cutoff plateau, with dC
    the boundary restriction of the layer operator.

Both compare quantities computed by entirely different quadratures, so
small residuals are strong evidence the solver, the Neumann trace, and
the kernels are mutually consistent.  Takes a few minutes.
"""

import numpy as np

from iwchannel import topography
from iwchannel.chebyshev import TensorGrid, cheb_nodes
from iwchannel.geometry import ChannelSpec
from iwchannel.layerpot import (boundary_equation_residual,
                                kernel_spectral_mass,
                                reconstruction_residual)
from iwchannel.solver import ScalingProfile, gaussian_forcing, solve_stationary

chan = ChannelSpec(topography.gaussian(1.0, 10.0))
lam, L = 0.7, 15.0
omega = lam - 1e-3j

# narrow forcing well inside the cutoff plateau |x1| <= 4.4
tg = TensorGrid(cheb_nodes(160), cheb_nodes(60))
forcing = gaussian_forcing(tg, L, ScalingProfile(), 0.5, center=(0.0, 0.0),
                           width=0.05, wavenumbers=(5.0,))
sol = solve_stationary(chan, omega, L, n1=160, n2=60, forcing=forcing)


def f_func(x1, x2):
    y1 = x1 / L
    y2 = 1.0 + 2.0 * x2 / (np.pi - chan.G(x1))
    return np.exp(-(y1 ** 2 + y2 ** 2) / 0.05 ** 2) * np.exp(5j * x1)


box = (-3.2, 3.2)
recon = reconstruction_residual(sol, 2.2, f_func, box, n_probe=50, seed=0)
print(f"reconstruction: max error {recon['max_rel_error']:.2%}, "
      f"mean {recon['mean_rel_error']:.2%} over 50 probes")

bdr = boundary_equation_residual(sol, 2.2, f_func, box)
print(f"boundary equation residual: {bdr['residual']:.2%}")

print("\nkernel single-sided spectral mass (cases 2 and 4):")
for case in (2, 4):
    for sign in (+1, -1):
        frac, side = kernel_spectral_mass(chan, omega, case, sign)
        print(f"  case {case}, sign {sign:+d}: {frac:.1%} on the "
              f"{'positive' if side > 0 else 'negative'} half-line")
