"""Named invariant suites with machine-readable failure detail."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    EXACT_TOL,
    Multivector,
    as_direction,
    basis_bivector,
    kronecker,
    levi_civita,
    oriented_product,
)
from .chsh import dispute_eval, torsion
from .estimators import bivector_sigma, standardize
from .spin import CHAIN_STEPS, detector_bivector, spin_bivector, trial_quaternion, verify_singlet_chain

SUITES = ("subalgebra", "bivector-identity", "torsion", "appendix-c", "gill-claims", "sigma")


@dataclass
class VerifyReport:
    suite: str
    seed: int
    cases: int = 0
    max_residual: float = 0.0
    failures: list = field(default_factory=list)
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def check(self, case: dict, residual: float, tol: float = EXACT_TOL):
        self.cases += 1
        self.max_residual = max(self.max_residual, residual)
        if not residual <= tol:
            self.failures.append({**case, "residual": residual, "tol": tol})

    def as_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "passed": self.passed,
                "cases": self.cases, "max_residual": self.max_residual,
                "failures": self.failures, **self.values}


def _units(rng, count):
    v = rng.normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _subalgebra(report, samples, rng):
    for mu in (1, 2, 3):
        for nu in (1, 2, 3):
            for lam in (1, -1):
                lhs = oriented_product(lam, basis_bivector(mu, lam), basis_bivector(nu, lam))
                rhs = Multivector.scalar(-kronecker(mu, nu))
                for rho in (1, 2, 3):
                    rhs = rhs - levi_civita(mu, nu, rho) * basis_bivector(rho, lam)
                report.check({"mu": mu, "nu": nu, "lambda": lam}, (lhs - rhs).max_norm())


def _bivector_identity(report, samples, rng):
    a_s, b_s = _units(rng, samples), _units(rng, samples)
    for k, (a, b) in enumerate(zip(a_s, b_s)):
        a, b = as_direction(a, normalize=True), as_direction(b, normalize=True)
        for lam in (1, -1):
            lhs = oriented_product(lam, spin_bivector(a, lam), spin_bivector(b, lam))
            rhs = -float(np.dot(a, b)) - lam * Multivector.bivector(np.cross(a, b))
            report.check({"sample": k, "lambda": lam}, (lhs - rhs).max_norm())


def _torsion(report, samples, rng):
    a_s, b_s = _units(rng, samples), _units(rng, samples)
    for k, (n, m) in enumerate(zip(a_s, b_s)):
        n, m = as_direction(n, normalize=True), as_direction(m, normalize=True)
        for lam in (1, -1):
            t = torsion(lam, n, m).value
            expected = -lam * Multivector.bivector(np.cross(n, m))
            report.check({"sample": k, "lambda": lam}, (t - expected).max_norm())


def _singlet_chain(report, samples, rng):
    a_s, b_s, s_s = _units(rng, samples), _units(rng, samples), _units(rng, samples)
    lams = rng.choice((1, -1), size=samples)
    worst_gap = 0.0
    for k in range(samples):
        a, b, s = (as_direction(v[k], normalize=True) for v in (a_s, b_s, s_s))
        lam = int(lams[k])
        chain = verify_singlet_chain(a, b, lam, s=s)
        for step, r in zip(CHAIN_STEPS, chain.residuals):
            report.check({"sample": k, "lambda": lam, "step": step}, r)
        q = trial_quaternion(a, b, s, lam)
        report.check({"sample": k, "lambda": lam, "step": "quaternion_unit_norm"},
                     abs(q.norm() - 1.0))
        worst_gap = max(worst_gap, chain.separate_limit_gap)
    report.values["max_separate_limit_gap"] = worst_gap


def _dispute(report, samples, rng):
    rows = []
    for mu in (1, 2, 3):
        for nu in (1, 2, 3):
            if mu == nu:
                continue
            d = dispute_eval(mu, nu, samples=max(1, samples // 10),
                             seed=int(rng.integers(2 ** 32)))
            case = {"mu": mu, "nu": nu}
            report.check({**case, "quantity": "naive_residual"}, abs(d.naive_residual - 2.0))
            report.check({**case, "quantity": "oriented_residual"}, d.oriented_residual)
            report.check({**case, "quantity": "zero_claim_norm"}, abs(d.zero_claim_norm - 2.0))
            report.check({**case, "quantity": "contraction_residual"}, d.contraction_residual)
            rows.append({"mu": mu, "nu": nu, "naive_residual": d.naive_residual,
                         "oriented_residual": d.oriented_residual,
                         "zero_claim_norm": d.zero_claim_norm,
                         "contraction_residual": d.contraction_residual})
    report.values["dispute"] = rows


def _sigma(report, samples, rng):
    dirs = _units(rng, samples)
    for k, n in enumerate(dirs):
        n = as_direction(n, normalize=True)
        size = int(rng.integers(1, 200))
        lams = rng.choice((1, -1), size=size)
        sig = bivector_sigma([spin_bivector(n, int(x)) for x in lams], -1, n)
        lam_bar = float(lams.mean())
        report.check({"sample": k, "check": "spread"},
                     abs(sig.spread - math.sqrt(max(1.0 - lam_bar ** 2, 0.0))))
        for lam in (1, -1):
            raw = -detector_bivector(n) * spin_bivector(n, lam)
            unit_sigma = type(sig)(detector=-detector_bivector(n), spread=1.0)
            back = standardize(raw, unit_sigma)
            report.check({"sample": k, "lambda": lam, "check": "standardize"},
                         (back - spin_bivector(n, lam)).max_norm())


_RUNNERS = {
    "subalgebra": _subalgebra,
    "bivector-identity": _bivector_identity,
    "torsion": _torsion,
    "appendix-c": _singlet_chain,
    "gill-claims": _dispute,
    "sigma": _sigma,
}


def verify(suite: str, samples: int = 1000, seed: int = 0) -> VerifyReport:
    if suite not in _RUNNERS:
        raise KeyError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    if samples < 1:
        raise ValueError("samples must be positive")
    report = VerifyReport(suite=suite, seed=seed)
    _RUNNERS[suite](report, samples, np.random.default_rng(seed))
    return report
