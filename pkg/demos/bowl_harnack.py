"""Harnack expression on the bowl translator with the linear potential.

With V = -grad f the expression vanishes identically on a translating
soliton; a generic vector field gives a nonzero value for comparison.
"""

import numpy as np

from flowlab import build_scenario, builtin_spec
from flowlab.functionals import harnack_Z

scn = build_scenario(builtin_spec("bowl-harnack"))
state = scn.state(0.0)
for p in ([0.0, 0.0], [0.3, 0.2], [-0.5, 0.6], [0.7, -0.1]):
    p = np.array(p)
    z_sol = harnack_Z(scn.immersion, state, p)
    z_other = harnack_Z(scn.immersion, state, p, V=lambda pk: np.array([0.5, 0.0]))
    print(f"p = {p}:  Z(-grad f) = {z_sol: .3e}   Z(V = e_1 / 2) = {z_other: .3e}")
