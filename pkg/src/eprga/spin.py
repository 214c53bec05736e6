"""Hidden-variable states, spin and detector bivectors, and measurement maps.

Randomness comes from a counter-based generator: trial ``k`` of a stream is a
pure function of ``(seed, stream, k)``, so any partition of the trial range
reproduces the same records.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    EXACT_TOL,
    Multivector,
    as_direction,
    geometric_product,
    oriented_chain,
    oriented_product,
    unit_bivector,
)

ORIENTATIONS = (1, -1)
WORDS_PER_TRIAL = 4
_U53 = 2.0 ** -53


def check_orientation(lam) -> int:
    if lam not in ORIENTATIONS:
        raise ValueError(f"orientation must be +1 or -1, got {lam!r}")
    return int(lam)


@dataclass(frozen=True)
class TrialStream:
    """Deterministic source of trials keyed by ``(seed, stream)``.

    Each trial consumes one Philox counter value (four 64-bit words): word 0
    gives the orientation coin, words 1 and 2 the fragment axis.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not 0 <= self.stream < 2 ** 64:
            raise ValueError(f"stream must be an unsigned 64-bit integer, got {self.stream!r}")

    def words(self, start: int, count: int) -> np.ndarray:
        if start < 0 or count < 0:
            raise ValueError("start and count must be non-negative")
        gen = np.random.Philox(key=self.seed | (self.stream << 64), counter=start)
        return gen.random_raw(WORDS_PER_TRIAL * count).reshape(count, WORDS_PER_TRIAL)

    def trials(self, start: int, count: int):
        """Orientations (int8) and unit axes ``(count, 3)`` for trials ``start..start+count-1``."""
        w = self.words(start, count)
        return _orientations_from(w[:, 0]), _directions_from(w[:, 1], w[:, 2])


def _uniform(words: np.ndarray) -> np.ndarray:
    return (words >> np.uint64(11)).astype(np.float64) * _U53


def _orientations_from(words: np.ndarray) -> np.ndarray:
    top = (words >> np.uint64(63)).astype(np.int8)
    return (1 - 2 * top).astype(np.int8)


def _directions_from(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    # Archimedes: z uniform on [-1, 1] and azimuth uniform gives uniform S^2.
    z = 2.0 * _uniform(w1) - 1.0
    phi = 2.0 * np.pi * _uniform(w2)
    r = np.sqrt(1.0 - z * z)
    return np.column_stack((r * np.cos(phi), r * np.sin(phi), z))


def sample_orientations(stream: TrialStream, start: int, count: int) -> np.ndarray:
    return _orientations_from(stream.words(start, count)[:, 0])


def sample_directions(stream: TrialStream, start: int, count: int) -> np.ndarray:
    w = stream.words(start, count)
    return _directions_from(w[:, 1], w[:, 2])


def sample_orientation(stream: TrialStream, k: int) -> int:
    return int(sample_orientations(stream, k, 1)[0])


def sample_direction(stream: TrialStream, k: int) -> np.ndarray:
    return sample_directions(stream, k, 1)[0]


@dataclass(frozen=True)
class TrialRecord:
    index: int
    orientation: int
    s: np.ndarray = field(compare=False)

    def __post_init__(self):
        check_orientation(self.orientation)
        object.__setattr__(self, "s", as_direction(self.s))


def detector_bivector(n) -> Multivector:
    """D(n) = I*n, independent of the orientation."""
    return unit_bivector(n)


def spin_bivector(n, lam: int) -> Multivector:
    """L(n, lam) = lam * D(n)."""
    return check_orientation(lam) * unit_bivector(n)


def measure_A(a, lam: int) -> int:
    """Limit outcome at the first station, read off ``-D(a) L(a, lam)``."""
    value = geometric_product(-detector_bivector(a), spin_bivector(a, lam))
    return _scalar_outcome(value)


def measure_B(b, lam: int) -> int:
    """Limit outcome at the second station, read off ``+D(b) L(b, lam)``."""
    value = geometric_product(detector_bivector(b), spin_bivector(b, lam))
    return _scalar_outcome(value)


def _scalar_outcome(value: Multivector) -> int:
    rest = (value - value.scalar_part).max_norm()
    if rest > EXACT_TOL:
        raise ArithmeticError(f"outcome carries a non-scalar remainder of {rest!r}")
    return int(round(value.scalar_part))


class TieCounter:
    """Counts zero dot products that were tie-broken to +1."""

    def __init__(self):
        self.count = 0


def _sign(x: float, ties: TieCounter | None) -> int:
    if x > 0.0:
        return 1
    if x < 0.0:
        return -1
    if ties is not None:
        ties.count += 1
    return 1


def raw_sign_A(s, a, ties: TieCounter | None = None) -> int:
    """sign(+s.a); an exact zero scores +1 and is counted in ``ties``."""
    return _sign(float(np.dot(s, a)), ties)


def raw_sign_B(s, b, ties: TieCounter | None = None) -> int:
    """sign(-s.b); an exact zero scores +1 and is counted in ``ties``."""
    return _sign(-float(np.dot(s, b)), ties)


def sign_scores(s: np.ndarray, n, polarity: int):
    """Vectorised ``sign(polarity * s.n)`` over rows of ``s``.

    Returns ``(scores as int8, number of exact-zero ties)``.
    """
    d = polarity * (np.asarray(s) @ np.asarray(n, dtype=float))
    ties = int(np.count_nonzero(d == 0.0))
    return np.where(d < 0.0, -1, 1).astype(np.int8), ties


def oriented_spin_product(lam: int, a, b) -> Multivector:
    """L(a, lam) L(b, lam) evaluated with the orientation-aware product.

    Scalar part ``-a.b``; bivector part ``-lam * I(a x b)``.
    """
    lam = check_orientation(lam)
    return oriented_product(lam, spin_bivector(a, lam), spin_bivector(b, lam))


def trial_quaternion(a, b, s, lam: int) -> Multivector:
    """-D(a) L(s, lam) L(s, lam) D(b) in the fixed right-handed product."""
    ls = spin_bivector(s, lam)
    q = geometric_product(-detector_bivector(a), ls)
    q = geometric_product(q, ls)
    return geometric_product(q, detector_bivector(b))


CHAIN_STEPS = (
    "limit_product",
    "spin_basis",
    "scalar_commutation",
    "unit_square",
    "bivector_identity",
)


class ChainVerificationError(AssertionError):
    pass


@dataclass(frozen=True)
class ChainReport:
    """Residuals between successive forms of the single-trial product.

    ``separate_limit_gap`` is not part of the chain.  It is the distance
    between the product of the two station outcomes taken at their own limit
    points (``s -> a`` and ``s -> b`` separately) and the joint integrand.
    """

    residuals: tuple
    separate_limit_gap: float
    tol: float = EXACT_TOL

    @property
    def failed_step(self) -> str | None:
        for name, r in zip(CHAIN_STEPS, self.residuals):
            if r > self.tol:
                return name
        return None

    @property
    def passed(self) -> bool:
        return self.failed_step is None

    def check(self) -> ChainReport:
        step = self.failed_step
        if step is not None:
            r = dict(zip(CHAIN_STEPS, self.residuals))[step]
            raise ChainVerificationError(f"step {step!r} residual {r!r} exceeds {self.tol!r}")
        return self


def verify_singlet_chain(a, b, lam: int, s=None, oriented: bool = True) -> ChainReport:
    """Evaluate every form of the single-trial expectation integrand.

    Each step is computed directly as a multivector and compared with the
    previous one.  ``s`` is the common limit point of the spin axis; it does
    not affect any value because ``L(s)^2 = -1``.  With ``oriented=False`` all
    products use the plain right-handed order regardless of ``lam``.
    """
    lam = check_orientation(lam)
    a = as_direction(a)
    b = as_direction(b)
    s = a if s is None else as_direction(s)
    mode = lam if oriented else 1

    def chain(*factors):
        return oriented_chain(mode, *factors)

    da, db = detector_bivector(a), detector_bivector(b)
    la, lb, ls = spin_bivector(a, lam), spin_bivector(b, lam), spin_bivector(s, lam)
    cross = np.cross(a, b)

    forms = [
        chain(chain(-da, ls), chain(ls, db)),
        chain(-da, ls, ls, db),
        chain(-lam * la, ls, ls, lam * lb),
        -chain(la, ls, ls, lb),
        chain(la, lb),
        -float(np.dot(a, b)) - lam * Multivector.bivector(cross),
    ]
    residuals = tuple((x - y).max_norm() for x, y in zip(forms, forms[1:]))

    at_a = chain(-da, la)
    at_b = chain(lb, db)
    gap = (chain(at_a, at_b) - forms[1]).norm()
    return ChainReport(residuals=residuals, separate_limit_gap=gap)
