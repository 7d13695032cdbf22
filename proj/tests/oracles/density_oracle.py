# Copyright 2026 The dst-retrieval Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
"""Reference values for the kernel density tests in test_density.cpp."""
import numpy as np
from scipy import special

SAMPLE = np.array([0.12, 0.35, 0.4, 0.41, 0.58, 0.77, 0.8, -0.2])


def silverman(x):
    sd = x.std(ddof=1)
    q75, q25 = np.percentile(x, [75, 25])  # linear interpolation between order statistics
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    return 0.9 * spread * len(x) ** -0.2


def kde(x, grid):
    h = silverman(x)
    z = (grid[:, None] - x[None, :]) / h
    dens = np.exp(-0.5 * z * z).sum(axis=1) / (len(x) * h * np.sqrt(2 * np.pi))
    step = grid[1] - grid[0]
    mass = step * (dens.sum() - 0.5 * (dens[0] + dens[-1]))
    return h, dens / mass


if __name__ == "__main__":
    grid = np.linspace(-1.0, 1.0, 512)
    h, d = kde(SAMPLE, grid)
    print("bandwidth", repr(h))
    for i in (0, 128, 300, 384, 511):
        print("density[%d]" % i, repr(d[i]))
    print("two unit gaussians 2 sd apart overlap", repr(float(special.erfc(1 / np.sqrt(2)))))
