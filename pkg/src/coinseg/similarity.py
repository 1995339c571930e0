"""Real-valued multiset similarity indices.

A feature vector is treated as a multiset of nonnegative reals: component i
carries the multiplicity of "slot" i. Three indices compare two such vectors
of equal length:

* ``jaccard``      sum of componentwise minima over sum of componentwise maxima
* ``interiority``  sum of componentwise minima over the smaller of the two
                   component sums (how much the lighter vector sits inside the
                   heavier one)
* ``coincidence``  jaccard ** selectivity * interiority; the exponent sharpens
                   the index so that near-misses are punished harder

All three live in [0, 1], are commutative, and equal 1 when the inputs are
identical.

Zero conventions (the definitions only divide safely on positive input):
a pair of all-zero vectors is indistinguishable and every index returns 1;
a zero denominator with unequal inputs returns 0. Both conventions are the
continuous extension from the positive domain along the identity diagonal.

Powers are computed with ``np.power`` rather than the scalar ``**`` operator.
numpy's array power and Python's scalar power round differently by about one
ulp, and downstream code relies on scalar and vectorized scoring paths being
bit-identical. Summation order is pinned for the same reason: all sums here
run strictly left to right (see ``chain_sum``), because numpy's reduction
order differs between 1-D and axis sums and the vectorized scorer must
reproduce these values bit for bit.
"""

from __future__ import annotations

import numpy as np

__all__ = ["jaccard", "interiority", "coincidence", "chain_sum"]


def chain_sum(values) -> float:
    """Strict left-to-right sum of a 1-D array, one rounding per step.

    ``np.sum`` uses pairwise blocking whose grouping depends on array layout,
    so the same thirteen numbers can sum to different last-bit results as a
    1-D array and as a matrix row. Every summation in this package that has a
    vectorized twin goes through this fixed association instead; the twin
    accumulates columns in the same order and IEEE arithmetic does the rest.
    """
    total = 0.0
    for v in np.asarray(values, dtype=np.float64).tolist():
        total += v
    return total


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate and convert one comparison pair to float64 arrays."""
    xa = np.asarray(x, dtype=np.float64).ravel()
    ya = np.asarray(y, dtype=np.float64).ravel()
    if xa.size == 0 or ya.size == 0:
        raise ValueError("feature vectors must have at least one component")
    if xa.shape != ya.shape:
        raise ValueError(
            f"feature vectors differ in length: {xa.size} vs {ya.size}"
        )
    if not (np.isfinite(xa).all() and np.isfinite(ya).all()):
        raise ValueError("feature vectors must be finite")
    if (xa < 0).any() or (ya < 0).any():
        raise ValueError("feature vectors must be nonnegative")
    return xa, ya


def jaccard(x, y) -> float:
    """Jaccard index of two nonnegative vectors of equal length.

    Returns sum(min(x_i, y_i)) / sum(max(x_i, y_i)), in [0, 1]. Two all-zero
    vectors compare as identical and return 1.

    Components are compared in the order given; callers that want
    permutation invariance sort beforehand.
    """
    xa, ya = _pair(x, y)
    mins = chain_sum(np.minimum(xa, ya))
    maxs = chain_sum(np.maximum(xa, ya))
    if maxs == 0.0:
        return 1.0
    return mins / maxs


def interiority(x, y) -> float:
    """Containment degree of the lighter vector in the heavier one.

    Returns sum(min(x_i, y_i)) / min(sum(x), sum(y)), in [0, 1]. Equals 1
    whenever one vector is componentwise below the other. Two all-zero
    vectors return 1; a single all-zero vector against anything else
    returns 0.
    """
    xa, ya = _pair(x, y)
    mins = chain_sum(np.minimum(xa, ya))
    denom = min(chain_sum(xa), chain_sum(ya))
    if denom == 0.0:
        return 1.0 if chain_sum(np.maximum(xa, ya)) == 0.0 else 0.0
    return mins / denom


def coincidence(x, y, selectivity: float = 1.0) -> float:
    """Sharpened product of ``jaccard`` and ``interiority``.

    Returns jaccard(x, y) ** selectivity * interiority(x, y). At
    selectivity 1 this is the plain product; raising it drives the value of
    imperfect matches toward 0 while exact matches stay at 1; at 0 the
    jaccard factor drops out and the interiority is returned unchanged.

    Parameters
    ----------
    x, y : array-like
        Nonnegative vectors of equal length.
    selectivity : float
        Exponent on the jaccard factor, >= 0.
    """
    s = float(selectivity)
    if not np.isfinite(s) or s < 0.0:
        raise ValueError(f"selectivity must be >= 0, got {selectivity!r}")
    j = jaccard(x, y)
    i = interiority(x, y)
    # np.power on a numpy scalar matches the vectorized array path bitwise;
    # Python's ** does not.
    return float(np.power(np.float64(j), s) * np.float64(i))
