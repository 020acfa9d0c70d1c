"""
Regular polygons closing in on the disk
=======================================
"""

import numpy as np

from fembilliards.analysis import polygon_limit_study
from fembilliards.oracle import circle_spectrum

sides = [5, 8, 16, 32, 64, 96]
rows = polygon_limit_study(sides)
j01 = circle_spectrum(1.0, 1)[0].k

#%%
# Each inscribed n-gon holds a disk of radius cos(pi/n), which brackets k1.

for r in rows:
    upper = j01 / np.cos(np.pi / r.sides)
    print(f"{r.sides:3d}  k1={r.k1:.5f}  gap={r.circle_gap_pct:.4f}%  bound={upper:.5f}")
