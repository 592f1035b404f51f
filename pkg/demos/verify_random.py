"""
Checking the ultimate bound on random designs
=============================================
"""

import random
from dataclasses import replace

from neuropellet.params import SystemParams, delta_upper_bound, tc_upper_bound
from neuropellet.simulator import simulate
from neuropellet.verifier import BoundEnvelope, verify_all

rng = random.Random(7)
r = 7e19
for _ in range(5):
    base = SystemParams(tau=rng.uniform(0.01, 1.0), r=r, alpha=rng.uniform(0.05, 0.5) * r, t_c=1.0)
    p = replace(base, t_c=rng.uniform(0.1, 1.0) * tc_upper_bound(base))
    p = replace(p, delta=rng.random() * delta_upper_bound(p))
    x0 = rng.uniform(-0.9, 1.0) * r

    # long enough for the envelope to close onto the band, plus some slack
    horizon = BoundEnvelope(p, x0).settle_time(1e-3 * p.alpha) + 20 * tc_upper_bound(p)
    report = verify_all(simulate(p, x0, horizon))
    print(f"tau={p.tau:.3f} alpha/r={p.alpha / r:.2f} t_c={p.t_c:.4f} x0/r={x0 / r:+.2f}:",
          "PASS" if report.passed else "FAIL")

print()
print(report.to_text())
