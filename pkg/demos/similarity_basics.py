"""
Comparing nonnegative vectors as multisets
==========================================

A feature vector here is a bag of intensities: component k says how much
of "slot" k the vector holds. Two bags are compared by how much they
overlap, not by angles or distances.
"""

import numpy as np

from coinseg.similarity import coincidence, interiority, jaccard

# two bags that share some mass
x = np.array([1.0, 2.0, 0.5])
y = np.array([2.0, 1.0, 0.5])

print("x =", x)
print("y =", y)
print()

# ratio of shared mass to total mass: sum of minima over sum of maxima
print("jaccard     ", jaccard(x, y))

# how completely the lighter bag sits inside the heavier one
print("interiority ", interiority(x, y))

# the working index: jaccard ** selectivity * interiority
print("coincidence ", coincidence(x, y))
print()

# raising the selectivity exponent keeps perfect matches at 1 while
# pushing near-misses toward 0; that is the whole point of the knob
for s in (0.0, 1.0, 2.0, 4.0, 6.0):
    print(f"  selectivity {s:3.1f} -> {coincidence(x, y, s):.6f}")
print()

# identical bags always score 1, no matter the exponent
print("self comparison:", coincidence(x, x, 5.0))

# containment: y holds x entirely, so interiority saturates while the
# jaccard ratio still reports the size mismatch
x = np.array([1.0, 1.0])
y = np.array([3.0, 2.0])
print("containment: jaccard", jaccard(x, y), " interiority", interiority(x, y))

# zero conventions: two empty bags are indistinguishable (1); an empty
# bag against a full one shares nothing (0)
z = np.zeros(4)
print("empty vs empty:", coincidence(z, z))
print("empty vs full: ", coincidence(z, np.ones(4)))
