"""
Stadium self-convergence
========================

No closed form exists for the stadium, so we compare h against h/2.
"""

from fembilliards.analysis import convergence_study, epsilon_series

indices = list(range(1, 17)) + [50, 100, 150]
rows = convergence_study("stadium r=1 a=1", 1e-3, indices)

#%%
# The error climbs with the state index: higher states have shorter
# wavelengths and see fewer elements per oscillation.

for n, eps in epsilon_series(rows):
    print(f"{n:4d}  {eps:.3e}")
