"""
Design limits for a pellet-fuelled density loop
===============================================

How slow can the centrifuge be, and how large may the firing threshold get?
"""

from dataclasses import replace

from neuropellet.errors import ActuatorTooSlow
from neuropellet.params import SystemParams, derive_constants, tc_upper_bound

# confinement time 0.1 s, reference error 7e19 m^-3, one pellet removes 1e19
p = SystemParams(tau=0.1, r=7e19, alpha=1e19, t_c=0.01, delta=1.0)
c = derive_constants(p)
print(f"gamma     = {c.gamma:.6f}")
print(f"t_c_max   = {c.t_c_max:.6g} s")
print(f"delta_max = {c.delta_max:.5g}")

# the threshold budget shrinks as the slot period grows, and is gone at t_c_max
for t_c in (0.002, 0.005, 0.01, 0.015, tc_upper_bound(p)):
    print(f"t_c = {t_c:.4f}  ->  delta_max = {derive_constants(replace(p, t_c=t_c)).delta_max:.4g}")

# a 50 Hz centrifuge is too slow for this plant
try:
    derive_constants(SystemParams(tau=0.1, r=7e19, alpha=1e19, t_c=0.02))
except ActuatorTooSlow as err:
    print(err)
