"""
Closed form against a fixed-step integrator
===========================================
"""

from neuropellet.oracle import OracleConfig, compare, simulate_numeric
from neuropellet.params import SystemParams
from neuropellet.simulator import simulate

p = SystemParams(tau=0.1, r=7e19, alpha=1e19, t_c=0.01, delta=1.0)
exact = simulate(p, p.r, 2.0)

for cfg in (OracleConfig(h=1e-5), OracleConfig(h=1e-4, scheme="euler")):
    numeric = simulate_numeric(p, p.r, 2.0, cfg)
    print(f"{cfg.scheme.value} h={cfg.h:g}")
    print(compare(exact, numeric, tol=1e-8 * p.r).to_text())
    print()
