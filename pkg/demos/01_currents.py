"""Probability currents of a moving packet and of a vortex.

Run: python3 demos/01_currents.py
"""
import numpy as np

from slitlab.currents import density, n_field, n_field_current, normalized_current, schrodinger_current
from slitlab.fields import GridSpec, commensurate_momentum, gaussian_packet
from slitlab.topology import vortex_field

# the box is wide enough for the packet to reach roundoff at the seam, and k is
# periodic-commensurate, so spectral derivatives see a smooth periodic field
g = GridSpec(192, 192, 24.0, 24.0)
k = commensurate_momentum(g, 8, -5)
phi = gaussian_packet(g, (0.0, 0.0), 1.0, k)
rho = density(phi).values
J = schrodinger_current(phi, m=1.0).values
h2 = g.hx * g.hy
print(f"packet with k = ({k[0]:.4f}, {k[1]:.4f}), m = 1")
print(f"  integrated density      {rho.sum() * h2:.12f}")
print(f"  integrated current      ({J[0].sum() * h2:.6f}, {J[1].sum() * h2:.6f}) = k")

Jt = normalized_current(phi)
Jn = n_field_current(n_field(phi))
ok = Jt.mask
print(f"  phase-gradient forms agree to {np.abs(Jt.values[:, ok] - Jn.values[:, ok]).max():.1e} "
      f"where rho > eps0 ({ok.mean():.0%} of nodes)")

v = vortex_field(g, [(0.031, -0.017, 1)], envelope=1.5)
Jv = normalized_current(v)
X, Y = g.mesh()
r2 = (X - 0.031) ** 2 + (Y + 0.017) ** 2
ring = (r2 > 1.0) & (r2 < 4.0)
exact = np.stack([-(Y + 0.017), X - 0.031]) / r2
print("unit vortex: normalized current against (-y, x)/r^2 on 1 < r < 2")
print(f"  max deviation {np.abs(Jv.values[:, ring] - exact[:, ring]).max():.2e}")
