"""
Fast and slow integrate-and-fire controllers
============================================

Both start from an empty vessel (x = r) and run for two seconds.
"""

import numpy as np

from neuropellet.config import load_config
from neuropellet.simulator import pellet_times, sample, simulate

runs = {}
for name in ("fig2_fast", "fig2_slow"):
    cfg = load_config(name)
    traj = simulate(cfg.params, cfg.x0, cfg.horizon)
    runs[name] = (cfg, traj, sample(traj, cfg.dt_sample))

for name, (cfg, traj, s) in runs.items():
    steady = (s.t >= 1.0) & (s.event == "flow")
    print(f"{name}: {len(pellet_times(traj))} pellets, "
          f"steady mean x = {s.x[steady].mean() / cfg.params.alpha:+.3f} alpha, "
          f"band [{s.x[steady].min():.3g}, {s.x[steady].max():.3g}]")

# the low threshold keeps x near -alpha, the high one lets it climb to +alpha
try:
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, axes = plt.subplots(2, 1, sharex=True, figsize=(8, 5))
    for ax, (name, (cfg, _, s)) in zip(axes, runs.items()):
        ax.plot(s.t, s.n_e, lw=0.8)
        ax.axhline(cfg.params.r, ls="--", c="k", lw=0.5)
        ax.set_ylabel("n_e [m^-3]")
        ax.set_title(f"delta = {cfg.params.delta:g}")
    axes[-1].set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig("fig2_runs.png", dpi=120)
    print("wrote fig2_runs.png")
