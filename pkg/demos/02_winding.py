"""Circulation of the normalized current is quantized in units of 2 pi.

Run: python3 demos/02_winding.py
"""
import numpy as np

from slitlab.fields import GridSpec
from slitlab.topology import circle_loop, plaquette_charges, vortex_field, winding_number

g = GridSpec(256, 256, 8.0, 8.0)
print(" m   circulation/2pi   unwrapped k")
for m in range(-3, 4):
    phi = vortex_field(g, [(0.013, 0.021, m)], envelope=0.7)
    r = winding_number(phi, circle_loop((0.0, 0.0), 1.0, 512, g), strict=False)
    print(f"{m:+d}   {r.integral / (2 * np.pi):+.6f}         {r.unwrapped_k:+d}")

pair = vortex_field(g, [(-1.0, 0.02, 1), (1.0, 0.02, -1)], envelope=1.2)
both = winding_number(pair, circle_loop((0.0, 0.0), 2.0, 512, g), strict=False)
left = winding_number(pair, circle_loop((-1.0, 0.0), 0.5, 256, g), strict=False)
print(f"vortex-antivortex pair: enclosing both k = {both.k}, enclosing the left core k = {left.k}")
print(f"plaquette charges sum to {int(plaquette_charges(pair).sum())}")
