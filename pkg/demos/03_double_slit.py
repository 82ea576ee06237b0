"""Split-step double-slit run and fringe fit against lambda L / d.

Run: python3 demos/03_double_slit.py [n]   (n = 256 takes ~10 s, 512 ~90 s)
"""
import math
import sys

from slitlab.propagator import default_setup, run_double_slit

n = int(sys.argv[1]) if len(sys.argv) > 1 else 256
grid, slits, cfg, packet = default_setup(n, cells_per_wavelength=8 if n >= 512 else 6)
print(f"grid {n}^2, lambda {packet.wavelength}, d {slits.separation}, L {cfg.screen_x - slits.barrier_x:.3f}, "
      f"{cfg.n_steps} steps of dt = {cfg.dt:.3e}")
for mode in ("double", "upper", "single"):
    fp = run_double_slit(grid, slits.with_mode(mode), cfg, packet)
    sp = f"{fp.spacing:.4f}" if math.isfinite(fp.spacing) else "n/a (unreliable)"
    print(f"{mode:>6}: spacing {sp} (predicted {fp.predicted_spacing:.4f}), visibility {fp.visibility:.3f}, "
          f"transmitted {fp.info['transmitted']:.4f}, peaks {fp.n_peaks}")
