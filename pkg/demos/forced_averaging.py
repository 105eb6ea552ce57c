"""
Forced systems on a constraint surface and their averages
=========================================================

A semi-explicit system pairs x' = gamma + lam*sigma with g(x, y) = 0.
Periodic forcing is summarised by its time average over one period;
the averaged wind is what the seed maps and the degree argument use.
"""

import numpy as np

from manideg import (
    REGISTRY, ForcedField, average_wind, implicit_solve_y,
    seed_map_F, seed_map_Phi, seed_points, tangency_residual,
)

# a forced cubic: x' = x + y + sin t on the curve y^3 + y = x^2
dae = REGISTRY["example-5-3"].build_dae()
print("differential vars:", dae.k, " algebraic vars:", dae.s,
      " period:", round(dae.period, 6))

# the completed field is tangent to the curve at every time
field = ForcedField(dae)
x = np.array([1.0])
point = np.concatenate([x, implicit_solve_y(dae.constraint, x)])
for t in (0.0, 1.3, 5.1):
    r = tangency_residual(field, point, t)
    print(f"tangency residual at t={t}: {r:.2e}")

# averaging the forcing over one period kills the sin t term,
# leaving the autonomous wind x + y
sigma_bar, completed = average_wind(dae)
for p in ([0.0, 0.0], [1.0, -0.5], [-0.7, 0.2]):
    print("averaged wind at", p, "->", sigma_bar(np.array(p)))

# seed maps stack a wind over the constraint; their zeros at lam = 0
# are where branches of periodic responses start
phi = seed_map_Phi(dae)
zeros = seed_points(phi, dae.constraint.domain)
for z in zeros:
    print("seed zero:", np.round(z.location, 10), " index", z.index)

# autonomous wind version for the damped oscillator
spring = REGISTRY["example-5-5"].build_dae()
F = seed_map_F(spring)
print("oscillator seed map at origin:", F(np.zeros(3)))
