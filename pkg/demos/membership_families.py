#!/usr/bin/env python3
# Tour of the membership families and the grid initialiser.

import numpy as np

from neurofuzzy import Family, init_grid, mf_param_gradients

# three sets spread over a temperature-like range
lo, hi = 0.0, 40.0
x = np.linspace(lo, hi, 9)

for family in Family:
    mfs = init_grid((lo, hi), 3, family)
    print(f"{family.value:9s}", [tuple(round(p, 3) for p in m.params) for m in mfs])

# neighbours cross at 0.5 halfway between their centres
gauss = init_grid((lo, hi), 3, Family.GAUSSIAN)
print("\ngaussian degrees at x =", x)
for m in gauss:
    print(np.round(m(x), 3))
print("max degree across sets:", np.round(np.max([m(x) for m in gauss], axis=0), 3))

# gradients with respect to each parameter, the raw material for training
bell = init_grid((lo, hi), 3, Family.GENERALIZED_BELL)[1]
print("\ngbellmf", bell.params)
print("d mu / d(a, b, c) at x=14:", np.round(mf_param_gradients(bell, 14.0), 5))

# serialisable, toolbox-compatible names
print(bell.to_dict())
