"""Streaming correlation estimators.

Accumulators are mergeable: combining partial accumulators in trial order
gives the same result as one sequential pass, which is what the parallel
driver relies on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    EXACT_TOL,
    Multivector,
    as_direction,
    batch_product,
    bivector_rows,
    geometric_product,
)
from .spin import check_orientation, detector_bivector, oriented_spin_product


class EmptyAccumulatorError(ValueError):
    pass


class UndefinedCorrelationError(ZeroDivisionError):
    """A score had zero variance, so the product-moment coefficient is undefined."""


class DegenerateSigmaError(ZeroDivisionError):
    pass


def _two_sum(a: np.ndarray, b: np.ndarray):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@dataclass(eq=False)
class CorrelationAccumulator:
    """Compensated running sum of per-trial multivector products.

    ``total + compensation`` carries the sum to roughly twice double precision.
    ``lambda_sum`` is the exact integer sum of the orientations seen.
    """

    total: np.ndarray = field(default_factory=lambda: np.zeros(8))
    compensation: np.ndarray = field(default_factory=lambda: np.zeros(8))
    count: int = 0
    lambda_sum: int = 0

    def _add_sum(self, block_sum: np.ndarray):
        self.total, err = _two_sum(self.total, block_sum)
        self.compensation = self.compensation + err

    def add(self, product: Multivector, lam: int):
        self._add_sum(product.coefficients)
        self.count += 1
        self.lambda_sum += check_orientation(lam)
        return self

    def add_batch(self, products: np.ndarray, lams: np.ndarray):
        """Add ``(N, 8)`` products; each column is summed exactly with ``math.fsum``."""
        products = np.asarray(products, dtype=float)
        lams = np.asarray(lams)
        if products.shape[0] != lams.shape[0]:
            raise ValueError("products and orientations differ in length")
        if lams.size and not np.all(np.abs(lams) == 1):
            raise ValueError("orientations must all be +1 or -1")
        block = np.array([math.fsum(col) if col.any() else 0.0 for col in products.T])
        self._add_sum(block)
        self.count += int(products.shape[0])
        self.lambda_sum += int(np.sum(lams, dtype=np.int64))
        return self

    def merge(self, other: CorrelationAccumulator) -> CorrelationAccumulator:
        out = CorrelationAccumulator(self.total.copy(), self.compensation.copy(),
                                     self.count, self.lambda_sum)
        out._add_sum(other.total)
        out.compensation = out.compensation + other.compensation
        out.count += other.count
        out.lambda_sum += other.lambda_sum
        return out

    @property
    def sum(self) -> Multivector:
        return Multivector(self.total + self.compensation)

    def mean(self) -> Multivector:
        if self.count == 0:
            raise EmptyAccumulatorError("no trials accumulated")
        return Multivector((self.total + self.compensation) / self.count)

    @property
    def mean_lambda(self) -> float:
        if self.count == 0:
            raise EmptyAccumulatorError("no trials accumulated")
        return self.lambda_sum / self.count


def accumulate_standard(acc: CorrelationAccumulator, lam, a, b) -> CorrelationAccumulator:
    """Add ``L(a, lam) L(b, lam)`` under the oriented product.

    ``lam`` may be a single orientation or an array of them.
    """
    if np.ndim(lam) == 0:
        return acc.add(oriented_spin_product(int(lam), a, b), int(lam))
    return acc.add_batch(oriented_spin_products(np.asarray(lam), a, b), lam)


def oriented_spin_products(lams: np.ndarray, a, b) -> np.ndarray:
    """Batched :func:`~eprga.spin.oriented_spin_product`, one row per trial.

    Rows with ``lam = +1`` are ``(I a)(I b)``; rows with ``lam = -1`` are the
    swapped product ``(I b)(I a)``.
    """
    ia = bivector_rows(as_direction(a))
    ib = bivector_rows(as_direction(b))
    right = (np.asarray(lams) > 0)[:, None]
    # the orientation sign squares away inside each product
    first = np.where(right, ia, ib)
    second = np.where(right, ib, ia)
    return batch_product(first, second)


@dataclass(frozen=True)
class CorrelationEstimate:
    scalar: float
    bivector: Multivector
    stderr: float | None
    count: int

    @property
    def value(self) -> Multivector:
        return self.bivector + self.scalar


def finalize_standard(acc: CorrelationAccumulator, a, b) -> CorrelationEstimate:
    """Scalar and bivector parts of the mean product, with a standard error.

    The standard error is ``|a x b| * std(lam) / sqrt(n)``; it is ``None`` for
    a single trial.
    """
    mean = acc.mean()
    n = acc.count
    cross = float(np.linalg.norm(np.cross(as_direction(a), as_direction(b))))
    if n >= 2:
        var = (n - acc.lambda_sum ** 2 / n) / (n - 1)
        stderr = cross * math.sqrt(max(var, 0.0)) / math.sqrt(n)
    else:
        stderr = None
    return CorrelationEstimate(scalar=mean.scalar_part, bivector=mean.grade(2),
                               stderr=stderr, count=n)


@dataclass
class PearsonStats:
    """Exact integer sums for two streams of +-1 scores."""

    sum_a: int = 0
    sum_b: int = 0
    sum_ab: int = 0
    sum_a2: int = 0
    sum_b2: int = 0
    count: int = 0

    def add(self, a, b):
        a = np.atleast_1d(np.asarray(a, dtype=np.int64))
        b = np.atleast_1d(np.asarray(b, dtype=np.int64))
        if a.shape != b.shape:
            raise ValueError("score streams differ in length")
        self.sum_a += int(a.sum())
        self.sum_b += int(b.sum())
        self.sum_ab += int((a * b).sum())
        self.sum_a2 += int((a * a).sum())
        self.sum_b2 += int((b * b).sum())
        self.count += int(a.size)
        return self

    def merge(self, other: PearsonStats) -> PearsonStats:
        return PearsonStats(*(x + y for x, y in zip(self._fields(), other._fields())))

    def _fields(self):
        return (self.sum_a, self.sum_b, self.sum_ab, self.sum_a2, self.sum_b2, self.count)

    @property
    def mean_product(self) -> float:
        if self.count == 0:
            raise EmptyAccumulatorError("no scores accumulated")
        return self.sum_ab / self.count

    @property
    def product_stderr(self) -> float | None:
        """Standard error of the mean product, or ``None`` below two samples."""
        if self.count < 2:
            return None
        # products of +-1 scores are +-1, so their sum of squares is the count
        return _stderr_from_sums(self.count, self.sum_ab, self.count)


def pearson_raw(stats: PearsonStats) -> float:
    """Product-moment correlation of the two score streams.

    Computed from the exact integer sums, so it is exact whenever the
    variance product is a perfect square (e.g. ``B = -A``).
    """
    n = stats.count
    if n < 2:
        raise UndefinedCorrelationError(f"need at least 2 samples, got {n}")
    cov = n * stats.sum_ab - stats.sum_a * stats.sum_b
    var_a = n * stats.sum_a2 - stats.sum_a ** 2
    var_b = n * stats.sum_b2 - stats.sum_b ** 2
    if var_a == 0 or var_b == 0:
        raise UndefinedCorrelationError("a score stream has zero variance")
    p = var_a * var_b
    root = math.isqrt(p)
    return cov / root if root * root == p else cov / math.sqrt(p)


@dataclass(frozen=True)
class SigmaEstimate:
    """Bivector standard deviation ``detector * spread``."""

    detector: Multivector
    spread: float

    @property
    def value(self) -> Multivector:
        return self.detector * self.spread


def bivector_sigma(samples, sign: int, n_dir) -> SigmaEstimate:
    """Spread of unit-bivector samples about their mean, attached to ``sign * D(n_dir)``.

    ``samples`` is a sequence of multivectors or an ``(N, 8)`` array; all must
    be spin bivectors about ``n_dir``.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    rows = np.array([s.coefficients if isinstance(s, Multivector) else s for s in samples],
                    dtype=float).reshape(-1, 8)
    if rows.shape[0] == 0:
        raise EmptyAccumulatorError("no samples")
    detector = detector_bivector(n_dir)
    d = detector.coefficients
    # each sample must be +-D(n_dir)
    along = rows @ d
    if np.max(np.abs(rows - np.outer(along, d))) > EXACT_TOL:
        raise ValueError("samples are not all bivectors about n_dir")
    mean = rows.mean(axis=0)
    spread = math.sqrt(float(np.mean(np.sum((rows - mean) ** 2, axis=1))))
    return SigmaEstimate(detector=sign * detector, spread=spread)


def standardize(raw_product: Multivector, sigma: SigmaEstimate) -> Multivector:
    """Divide by the bivector sigma on the left: ``sigma^-1 * raw_product``.

    The inverse of ``c * B`` for a unit bivector ``B`` is ``-B / c``.
    """
    if not sigma.spread > 0.0:
        raise DegenerateSigmaError("sigma has zero spread")
    b = sigma.detector
    if abs(b.norm() - 1.0) > EXACT_TOL or (b - b.grade(2)).max_norm() > EXACT_TOL:
        raise ValueError("sigma detector factor must be a unit bivector")
    return geometric_product(-b / sigma.spread, raw_product)


def _stderr_from_sums(n: int, total: float, total_sq: float) -> float:
    var = (total_sq - total * total / n) / (n - 1)
    return math.sqrt(max(var, 0.0) / n)


class ScalarStream:
    """Running count, sum and sum of squares of scalar samples."""

    def __init__(self):
        self.count = 0
        self._sum = 0.0
        self._sum_sq = 0.0

    def add(self, values):
        v = np.atleast_1d(np.asarray(values, dtype=float))
        self.count += int(v.size)
        self._sum += math.fsum(v)
        self._sum_sq += math.fsum(v * v)
        return self

    def stderr(self) -> float:
        if self.count < 2:
            raise ValueError(f"standard error needs at least 2 samples, got {self.count}")
        return _stderr_from_sums(self.count, self._sum, self._sum_sq)


def stderr_scalar(values) -> float:
    """Sample standard deviation over ``sqrt(n)``."""
    return ScalarStream().add(values).stderr()
