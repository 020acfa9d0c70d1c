"""
Looking for bouncing-ball states
================================

Rank the first 150 stadium states by how much probability sits in a
narrow vertical strip through the middle, then render the top few.
"""

import numpy as np

from fembilliards import MeshParams, run_pipeline
from fembilliards.field import (evaluate_eigenfunction, normalize_l2, rank_scar_candidates,
                                write_pgm)

res = run_pipeline("stadium r=1 a=1", MeshParams(1e-3), order=2, opts=156)
reports = rank_scar_candidates(res.mesh, res.dofs, res.spectrum, range(1, 151), "vstrip",
                               bbox=res.region.bbox())

v = np.array([r.vstrip_mass for r in reports])
print("median vstrip mass %.4f" % np.median(v))
for r in reports[:5]:
    print(f"n={r.n:3d}  k={r.k:.4f}  vstrip={r.vstrip_mass:.4f}  ipr={r.ipr:.3f}")

#%%
# Images go to ./scar_demo as 8-bit PGM, brightest where |psi|^2 peaks.

for r in reports[:3]:
    c = normalize_l2(res.M, res.spectrum.vectors[:, r.n - 1])
    grid = evaluate_eigenfunction(res.mesh, res.dofs, c, 400, 200, region=res.region)
    write_pgm(grid, f"scar_demo/state_{r.n}.pgm")
