"""Independent reference computations used to freeze expected values.

None of this imports the package's product tables: blades are tuples of
basis indices, multiplied by bubble-sorting and cancelling repeats.
"""
import math

import numpy as np

# our coefficient order, each as (sign, sorted index tuple)
BASIS = [
    (1, ()), (1, (1,)), (1, (2,)), (1, (3,)),
    (1, (2, 3)), (-1, (1, 3)), (1, (1, 2)), (1, (1, 2, 3)),
]


def blade_mul(x, y):
    """Product of two sorted index tuples in Cl(3,0): returns (sign, tuple)."""
    seq = list(x) + list(y)
    sign = 1
    changed = True
    while changed:
        changed = False
        for i in range(len(seq) - 1):
            if seq[i] > seq[i + 1]:
                seq[i], seq[i + 1] = seq[i + 1], seq[i]
                sign = -sign
                changed = True
    out = []
    for k in seq:
        if out and out[-1] == k:
            out.pop()  # e_k e_k = +1
        else:
            out.append(k)
    return sign, tuple(out)


def to_dict(coeffs):
    d = {}
    for c, (s, blade) in zip(coeffs, BASIS):
        if c:
            d[blade] = d.get(blade, 0.0) + s * c
    return d


def from_dict(d):
    out = np.zeros(8)
    for i, (s, blade) in enumerate(BASIS):
        out[i] = s * d.get(blade, 0.0)
    return out


def product(x, y):
    """Geometric product of two 8-coefficient arrays via the blade oracle."""
    dx, dy = to_dict(np.asarray(x, float)), to_dict(np.asarray(y, float))
    out = {}
    for bx, cx in dx.items():
        for by, cy in dy.items():
            s, b = blade_mul(bx, by)
            out[b] = out.get(b, 0.0) + s * cx * cy
    return from_dict(out)


def dual(v):
    """Coefficients of I*v computed through the oracle product."""
    vec = np.zeros(8)
    vec[1:4] = v
    pss = np.zeros(8)
    pss[7] = 1.0
    return product(pss, vec)


def random_units(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def hemisphere_overlap(theta_deg):
    """E[sign(s.a) sign(-s.b)] for s uniform on the sphere: -1 + 2 theta / pi."""
    return -1.0 + 2.0 * math.radians(theta_deg) / math.pi


def brute_force_sign_correlation(theta_deg, n, seed):
    """Monte Carlo of the same quantity using Gaussian-normalised directions."""
    rng = np.random.default_rng(seed)
    s = random_units(rng, n)
    t = math.radians(theta_deg)
    a = np.array([1.0, 0.0, 0.0])
    b = np.array([math.cos(t), math.sin(t), 0.0])
    return float(np.mean(np.sign(s @ a) * np.sign(-(s @ b))))
