"""CHSH strings, torsion commutators, the variance bound and the dispute evaluator."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .algebra import (
    EXACT_TOL,
    Multivector,
    as_direction,
    basis_bivector,
    geometric_product,
    levi_civita,
    oriented_product,
)
from .spin import check_orientation, spin_bivector

TSIRELSON = 2.0 * math.sqrt(2.0)


def planar(deg: float) -> np.ndarray:
    """Unit vector in the xy-plane at ``deg`` degrees from +x."""
    t = math.radians(deg)
    return as_direction((math.cos(t), math.sin(t), 0.0), normalize=True)


@dataclass(frozen=True)
class ChshConfig:
    a: np.ndarray
    a_prime: np.ndarray
    b: np.ndarray
    b_prime: np.ndarray

    def __post_init__(self):
        for name in ("a", "a_prime", "b", "b_prime"):
            object.__setattr__(self, name, as_direction(getattr(self, name)))

    @classmethod
    def from_angles(cls, a: float, a_prime: float, b: float, b_prime: float) -> ChshConfig:
        return cls(planar(a), planar(a_prime), planar(b), planar(b_prime))

    def pairs(self):
        """The four setting pairs in CHSH order: (a,b), (a,b'), (a',b), (a',b')."""
        return ((self.a, self.b), (self.a, self.b_prime),
                (self.a_prime, self.b), (self.a_prime, self.b_prime))


def singlet_correlation(a, b) -> float:
    return -float(np.dot(a, b))


def chsh_separate(e_ab: float, e_abp: float, e_apb: float, e_apbp: float) -> float:
    return e_ab + e_abp + e_apb - e_apbp


def chsh_single_average(trials) -> float:
    """Mean of ``A_a (B_b + B_b') + A_a' (B_b - B_b')`` over same-trial quadruples.

    ``trials`` is ``(N, 4)`` with columns ``(A_a, A_a', B_b, B_b')``, every entry +-1.
    """
    t = np.asarray(trials)
    if t.ndim != 2 or t.shape[1] != 4 or t.shape[0] == 0:
        raise ValueError(f"expected a non-empty (N, 4) array, got shape {t.shape}")
    if not np.all((t == 1) | (t == -1)):
        raise ValueError("every score must be +1 or -1")
    t = t.astype(np.int64)
    per_trial = t[:, 0] * (t[:, 2] + t[:, 3]) + t[:, 1] * (t[:, 2] - t[:, 3])
    assert np.all(np.abs(per_trial) == 2)
    return int(per_trial.sum()) / t.shape[0]


@dataclass(frozen=True)
class TorsionBivector:
    value: Multivector
    pair: tuple


def torsion(lam: int, n, n_prime) -> TorsionBivector:
    """Half the oriented commutator of ``L(n, lam)`` and ``L(n', lam)``."""
    lam = check_orientation(lam)
    ln, lnp = spin_bivector(n, lam), spin_bivector(n_prime, lam)
    value = (oriented_product(lam, ln, lnp) - oriented_product(lam, lnp, ln)) / 2
    return TorsionBivector(value=value, pair=(as_direction(n), as_direction(n_prime)))


@dataclass(frozen=True)
class VarianceBound:
    """Both sides of the CHSH variance inequality.

    ``rhs`` is the scalar part of the principal square root of the finite-n
    radicand ``4 - 4 c - 4 mean(lam) D(z)``; its bivector part is kept in
    ``remainder``.  ``rhs_limit`` is ``2 sqrt(1 - c)``, the value with the
    orientation average set to zero.
    """

    lhs: float
    rhs: float
    rhs_limit: float
    remainder: Multivector
    cross_term: float
    mean_lambda: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def variance_bound(config: ChshConfig, lambdas) -> VarianceBound:
    lam = np.asarray(lambdas)
    if lam.size == 0:
        raise ValueError("need at least one orientation sample")
    if not np.all(np.abs(lam) == 1):
        raise ValueError("orientations must be +1 or -1")
    u = np.cross(config.a, config.a_prime)
    v = np.cross(config.b_prime, config.b)
    c = float(np.dot(u, v))
    if abs(c) > 1.0 + EXACT_TOL:
        raise ArithmeticError(f"cross-product term {c!r} outside [-1, 1]")
    z = np.cross(u, v)
    z_len = float(np.linalg.norm(z))
    mean_lam = int(lam.sum(dtype=np.int64)) / lam.size

    lhs = abs(chsh_separate(*(singlet_correlation(x, y) for x, y in config.pairs())))
    # span{1, D(z_hat)} is a copy of the complex numbers, D(z_hat) playing i
    root = 2.0 * cmath.sqrt(complex(1.0 - c, -mean_lam * z_len))
    remainder = Multivector.bivector(z / z_len * root.imag) if z_len > 0.0 else Multivector()
    return VarianceBound(lhs=lhs, rhs=root.real, rhs_limit=2.0 * math.sqrt(max(1.0 - c, 0.0)),
                         remainder=remainder, cross_term=c, mean_lambda=mean_lam)


@dataclass(frozen=True)
class DisputeReport:
    """Residual norms for the basis-bivector algebra under two representations.

    ``naive_residual``: the difference identity evaluated with one fixed
    right-handed product for both orientations.  ``oriented_residual``: the
    same with the orientation-aware product.  ``zero_claim_norm``: the norm
    of ``-2 sum_rho eps L_rho(+1)``.  ``contraction_residual``: worst
    deviation of ``L(a)L(b) + a.b + L(a x b)`` over random pairs and both
    orientations.
    """

    mu: int
    nu: int
    naive_residual: float
    oriented_residual: float
    zero_claim_norm: float
    contraction_residual: float


def _eps_sum(mu: int, nu: int, lam: int) -> Multivector:
    out = Multivector()
    for rho in (1, 2, 3):
        e = levi_civita(mu, nu, rho)
        if e:
            out = out + e * basis_bivector(rho, lam)
    return out


def dispute_eval(mu: int, nu: int, samples: int = 100, seed: int = 0) -> DisputeReport:
    if mu == nu:
        raise ValueError("the dispute concerns distinct indices; got mu == nu")
    lp = (basis_bivector(mu, 1), basis_bivector(nu, 1))
    lm = (basis_bivector(mu, -1), basis_bivector(nu, -1))
    rhs = -_eps_sum(mu, nu, 1) + _eps_sum(mu, nu, -1)

    naive = geometric_product(*lp) - geometric_product(*lm)
    oriented = oriented_product(1, *lp) - oriented_product(-1, *lm)
    zero_claim = -2 * _eps_sum(mu, nu, 1)

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a, b = (as_direction(v, normalize=True) for v in rng.normal(size=(2, 3)))
        for lam in (1, -1):
            r = (oriented_product(lam, spin_bivector(a, lam), spin_bivector(b, lam))
                 + float(np.dot(a, b)) + _spin_of(np.cross(a, b), lam))
            worst = max(worst, r.norm())
    return DisputeReport(mu=mu, nu=nu,
                         naive_residual=(naive - rhs).norm(),
                         oriented_residual=(oriented - rhs).norm(),
                         zero_claim_norm=zero_claim.norm(),
                         contraction_residual=worst)


def _spin_of(v, lam: int) -> Multivector:
    # L(v, lam) for a vector that need not be unit (e.g. a cross product)
    return lam * Multivector.bivector(v)


def third_spin_average(a, b, lambdas) -> Multivector:
    """Mean of ``L(a x b, lam_k)`` over the orientation samples."""
    lam = np.asarray(lambdas)
    if lam.size == 0:
        raise ValueError("need at least one orientation sample")
    if not np.all(np.abs(lam) == 1):
        raise ValueError("orientations must be +1 or -1")
    mean_lam = int(lam.sum(dtype=np.int64)) / lam.size
    return mean_lam * Multivector.bivector(np.cross(as_direction(a), as_direction(b)))
