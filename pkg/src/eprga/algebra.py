"""Exact Cl(3,0) kernel with an orientation-aware product.

Blades are stored in the fixed order ``1, e1, e2, e3, e23, e31, e12, e123``
so that ``I*e1 = e23``, ``I*e2 = e31`` and ``I*e3 = e12``: dualising a vector
is a coefficient copy into the bivector slots.

The left-handed algebra is never given its own coefficient convention.  It is
realised only by reversing the order of factors in the right-handed product
(see :func:`oriented_product`).
"""
from __future__ import annotations

from numbers import Real

import numpy as np

BLADE_NAMES = ("1", "e1", "e2", "e3", "e23", "e31", "e12", "e123")
GRADES = (0, 1, 1, 1, 2, 2, 2, 3)

EXACT_TOL = 1e-12
CHAINED_TOL = 1e-10

# (bitmask of canonical sorted blade, sign of our blade relative to it)
_BLADES = ((0, 1), (1, 1), (2, 1), (4, 1), (6, 1), (5, -1), (3, 1), (7, 1))
_INDEX_OF_MASK = {mask: i for i, (mask, _) in enumerate(_BLADES)}


def _reorder_sign(a: int, b: int) -> int:
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def _build_table():
    table = np.zeros((8, 8, 8))
    terms = []
    for i, (mi, si) in enumerate(_BLADES):
        for j, (mj, sj) in enumerate(_BLADES):
            k = _INDEX_OF_MASK[mi ^ mj]
            sign = si * sj * _reorder_sign(mi, mj) * _BLADES[k][1]
            table[i, j, k] = sign
            terms.append((i, j, k, float(sign)))
    return table, tuple(terms)


CAYLEY, _TERMS = _build_table()
_REVERSE_SIGNS = np.array([1.0, 1, 1, 1, -1, -1, -1, -1])


class NormalizationError(ValueError):
    """A direction was required to be unit length and was not."""


class GradeError(ValueError):
    """A multivector carried grades an operation does not accept."""


class Multivector:
    """Immutable element of Cl(3,0) held as eight real coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coefficients=None):
        c = np.zeros(8) if coefficients is None else np.array(coefficients, dtype=float)
        if c.shape != (8,):
            raise ValueError(f"expected 8 coefficients, got shape {c.shape}")
        c.flags.writeable = False
        self._c = c

    @classmethod
    def scalar(cls, value: float) -> Multivector:
        c = np.zeros(8)
        c[0] = value
        return cls(c)

    @classmethod
    def vector(cls, v) -> Multivector:
        c = np.zeros(8)
        c[1:4] = v
        return cls(c)

    @classmethod
    def bivector(cls, v) -> Multivector:
        """Bivector with coefficients ``(e23, e31, e12)``, i.e. ``I*v``."""
        c = np.zeros(8)
        c[4:7] = v
        return cls(c)

    @classmethod
    def blade(cls, name: str, value: float = 1.0) -> Multivector:
        c = np.zeros(8)
        c[BLADE_NAMES.index(name)] = value
        return cls(c)

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    @property
    def scalar_part(self) -> float:
        return float(self._c[0])

    @property
    def vector_part(self) -> np.ndarray:
        return self._c[1:4]

    @property
    def bivector_part(self) -> np.ndarray:
        return self._c[4:7]

    @property
    def pseudoscalar_part(self) -> float:
        return float(self._c[7])

    def grade(self, k: int) -> Multivector:
        if k not in (0, 1, 2, 3):
            raise ValueError(f"grade must be 0..3, got {k}")
        mask = np.array([g == k for g in GRADES])
        return Multivector(np.where(mask, self._c, 0.0))

    def norm(self) -> float:
        # For Cl(3,0), <x ~x>_0 is the plain sum of squared coefficients.
        return float(np.sqrt(np.dot(self._c, self._c)))

    def max_norm(self) -> float:
        return float(np.max(np.abs(self._c)))

    def reverse(self) -> Multivector:
        return Multivector(self._c * _REVERSE_SIGNS)

    def isclose(self, other, atol: float = EXACT_TOL) -> bool:
        return (self - _coerce(other)).max_norm() <= atol

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Multivector(self._c + other._c)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Multivector(self._c - other._c)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return Multivector(other._c - self._c)

    def __neg__(self):
        return Multivector(-self._c)

    def __pos__(self):
        return self

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return geometric_product(self, other)
        if isinstance(other, Real):
            return Multivector(self._c * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Real):
            return Multivector(self._c * float(other))
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, Real):
            return Multivector(self._c / float(other))
        return NotImplemented

    def __repr__(self):
        terms = []
        for name, value in zip(BLADE_NAMES, self._c.tolist()):
            if value != 0.0:
                terms.append(f"{value!r}" if name == "1" else f"{value!r}*{name}")
        return f"Multivector({' + '.join(terms) or '0'})"


def _coerce(x):
    if isinstance(x, Multivector):
        return x
    if isinstance(x, Real):
        return Multivector.scalar(float(x))
    return NotImplemented


ZERO = Multivector()
ONE = Multivector.scalar(1.0)
E1 = Multivector.blade("e1")
E2 = Multivector.blade("e2")
E3 = Multivector.blade("e3")
I = Multivector.blade("e123")


def geometric_product(x: Multivector, y: Multivector) -> Multivector:
    return Multivector(np.einsum("i,j,ijk->k", x.coefficients, y.coefficients, CAYLEY))


def reverse(x: Multivector) -> Multivector:
    return x.reverse()


def oriented_product(orientation: int, x: Multivector, y: Multivector) -> Multivector:
    """Product of ``x`` and ``y`` in the algebra of the given handedness.

    ``+1`` is the ordinary right-handed product ``x*y``.  ``-1`` is evaluated in
    the same right-handed coefficient basis by swapping the factors, ``y*x``.
    """
    if orientation == 1:
        return geometric_product(x, y)
    if orientation == -1:
        return geometric_product(y, x)
    raise ValueError(f"orientation must be +1 or -1, got {orientation!r}")


def oriented_chain(orientation: int, *factors: Multivector) -> Multivector:
    """Left-to-right product of several factors under :func:`oriented_product`."""
    if orientation not in (1, -1):
        raise ValueError(f"orientation must be +1 or -1, got {orientation!r}")
    seq = factors if orientation == 1 else factors[::-1]
    out = ONE
    for f in seq:
        out = geometric_product(out, f)
    return out


def as_direction(v, normalize: bool = False) -> np.ndarray:
    """Return ``v`` as a float64 unit 3-vector.

    With ``normalize=False`` a vector whose norm differs from 1 by more than
    1e-12 raises :class:`NormalizationError`.
    """
    arr = np.array(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"a direction needs 3 components, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NormalizationError(f"non-finite direction {arr.tolist()}")
    n = float(np.linalg.norm(arr))
    if normalize:
        if n == 0.0:
            raise NormalizationError("cannot normalize the zero vector")
        arr = arr / n
    elif abs(n - 1.0) > EXACT_TOL:
        raise NormalizationError(f"direction {arr.tolist()} has norm {n!r}, expected 1")
    arr.flags.writeable = False
    return arr


def unit_bivector(n) -> Multivector:
    """``I*n`` for a unit vector ``n``: pure grade 2, squares to -1."""
    return Multivector.bivector(as_direction(n))


def levi_civita(mu: int, nu: int, rho: int) -> int:
    """Totally antisymmetric symbol on indices 1..3."""
    return (mu - nu) * (nu - rho) * (rho - mu) // 2


def kronecker(mu: int, nu: int) -> int:
    return int(mu == nu)


def basis_bivector(mu: int, orientation: int) -> Multivector:
    """``L_mu(orientation) = orientation * I * e_mu`` for ``mu`` in 1..3."""
    if mu not in (1, 2, 3):
        raise IndexError(f"basis index must be 1, 2 or 3, got {mu!r}")
    if orientation not in (1, -1):
        raise ValueError(f"orientation must be +1 or -1, got {orientation!r}")
    c = np.zeros(8)
    c[3 + mu] = float(orientation)
    return Multivector(c)


def even_decompose(x: Multivector, tol: float = EXACT_TOL):
    """Split an even multivector into ``(scalar, bivector part)``.

    Raises :class:`GradeError` if the grade-1 or grade-3 parts exceed ``tol``.
    """
    c = x.coefficients
    odd = max(float(np.max(np.abs(c[1:4]))), abs(float(c[7])))
    if odd > tol:
        raise GradeError(f"odd-grade contamination {odd!r} exceeds {tol!r}")
    return float(c[0]), x.grade(2)


# -- batched helpers: rows of an (N, 8) array are multivectors ---------------

def batch_product(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row-wise geometric product of two ``(N, 8)`` coefficient arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros(np.broadcast_shapes(x.shape, y.shape))
    xs = np.flatnonzero(np.any(x.reshape(-1, 8) != 0.0, axis=0))
    ys = set(np.flatnonzero(np.any(y.reshape(-1, 8) != 0.0, axis=0)).tolist())
    xs = set(xs.tolist())
    for i, j, k, sign in _TERMS:
        if i in xs and j in ys:
            out[..., k] += sign * (x[..., i] * y[..., j])
    return out


def bivector_rows(v: np.ndarray) -> np.ndarray:
    """``(N, 3)`` vectors to the ``(N, 8)`` coefficients of ``I*v``."""
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (8,))
    out[..., 4:7] = v
    return out
