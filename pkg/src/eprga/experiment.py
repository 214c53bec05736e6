"""Deterministic experiment driver.

Trials are processed in fixed blocks of ``BLOCK`` indices.  Every block is a
pure function of ``(seed, stream, start, count)`` (or of a slice of a trial
log), and block results are merged strictly in block order, so the output
does not depend on how many worker processes computed the blocks.
"""
from __future__ import annotations

import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from .algebra import as_direction
from .chsh import ChshConfig, chsh_separate, variance_bound
from .estimators import (
    CorrelationAccumulator,
    PearsonStats,
    finalize_standard,
    oriented_spin_products,
)
from .spin import TrialStream, sign_scores
from .trial_log import TrialLog, write_log

BLOCK = 1 << 16
PIPELINES = ("standard", "raw-sign", "raw-lambda")
FORMATS = ("csv", "json")
REPORT_FORMAT_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int = 100_000
    seed: int = 0
    angles: tuple | None = (0.0, 180.0, 5.0)
    pair: tuple | None = None
    quadruple: ChshConfig | None = None
    pipelines: tuple = PIPELINES
    fmt: str = "csv"
    workers: int = 1
    strict: bool = False

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.angles is not None:
            if len(self.angles) != 3:
                raise ConfigError("angles must be (start, stop, step)")
            start, stop, step = (float(x) for x in self.angles)
            if not all(math.isfinite(x) for x in (start, stop, step)):
                raise ConfigError("angle sweep values must be finite")
            if step <= 0:
                raise ConfigError(f"angle step must be > 0, got {step!r}")
            if stop < start:
                raise ConfigError(f"angle stop {stop!r} is below start {start!r}")
            object.__setattr__(self, "angles", (start, stop, step))
        if self.pair is not None:
            try:
                pair = tuple(as_direction(v, normalize=True) for v in self.pair)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
            if len(pair) != 2:
                raise ConfigError("pair must hold two directions")
            object.__setattr__(self, "pair", pair)
        unknown = set(self.pipelines) - set(PIPELINES)
        if unknown or not self.pipelines:
            raise ConfigError(f"pipelines must be a non-empty subset of {PIPELINES}, "
                              f"got {tuple(self.pipelines)}")
        object.__setattr__(self, "pipelines", tuple(p for p in PIPELINES if p in self.pipelines))
        if self.fmt not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.fmt!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError(f"workers must be a positive integer, got {self.workers!r}")

    def setting_pairs(self):
        """``(theta_deg, a, b)`` for every requested setting pair."""
        if self.pair is not None:
            a, b = self.pair
            theta = math.degrees(math.atan2(np.linalg.norm(np.cross(a, b)), float(np.dot(a, b))))
            return [(theta, a, b)]
        if self.angles is None:
            raise ConfigError("either an angle sweep or an explicit pair is required")
        start, stop, step = self.angles
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        a = np.array([1.0, 0.0, 0.0])
        out = []
        for i in range(count):
            theta = start + i * step
            t = math.radians(theta)
            out.append((theta, a, np.array([math.cos(t), math.sin(t), 0.0])))
        return out


@dataclass(eq=False)
class PairTally:
    standard: CorrelationAccumulator = field(default_factory=CorrelationAccumulator)
    sign: PearsonStats = field(default_factory=PearsonStats)
    lam: PearsonStats = field(default_factory=PearsonStats)
    ties: int = 0

    def merge(self, other: PairTally) -> PairTally:
        return PairTally(self.standard.merge(other.standard), self.sign.merge(other.sign),
                         self.lam.merge(other.lam), self.ties + other.ties)


def score_trials(lam: np.ndarray, s: np.ndarray, pairs, pipelines) -> list:
    """Score one block of recorded trials against every ``(a, b)`` pair."""
    out = []
    for a, b in pairs:
        t = PairTally()
        if "standard" in pipelines:
            t.standard.add_batch(oriented_spin_products(lam, a, b), lam)
        if "raw-sign" in pipelines:
            sa, ta = sign_scores(s, a, 1)
            sb, tb = sign_scores(s, b, -1)
            t.sign.add(sa, sb)
            t.ties += ta + tb
        if "raw-lambda" in pipelines:
            t.lam.add(lam, -lam.astype(np.int64))
        out.append(t)
    return out


def _simulate_block(task):
    seed, stream, start, count, pairs, pipelines = task
    lam, s = TrialStream(seed, stream).trials(start, count)
    return score_trials(lam, s, pairs, pipelines)


def _log_block(task):
    lam, s, pairs, pipelines = task
    return score_trials(lam, s, pairs, pipelines)


def _blocks(n: int):
    return [(start, min(BLOCK, n - start)) for start in range(0, n, BLOCK)]


def _run(fn, tasks, workers: int):
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def _reduce(block_results, npairs: int) -> list:
    totals = [PairTally() for _ in range(npairs)]
    for block in block_results:
        totals = [t.merge(b) for t, b in zip(totals, block)]
    return totals


def _stream_for(pair_index: int, strict: bool) -> int:
    # strict sampling: every setting pair draws its own independent trials
    return pair_index + 1 if strict else 0


def tally_stream(seed: int, n: int, pairs, pipelines, strict: bool = False, workers: int = 1):
    """Score ``n`` generated trials against each pair; returns one tally per pair."""
    groups: dict[int, list] = {}
    for i, pair in enumerate(pairs):
        groups.setdefault(_stream_for(i, strict), []).append((i, pair))
    tallies = [None] * len(pairs)
    for stream, members in groups.items():
        sub = [p for _, p in members]
        tasks = [(seed, stream, start, count, sub, pipelines) for start, count in _blocks(n)]
        merged = _reduce(_run(_simulate_block, tasks, workers), len(sub))
        for (i, _), t in zip(members, merged):
            tallies[i] = t
    return tallies


def tally_log(log: TrialLog, pairs, pipelines, workers: int = 1):
    tasks = [(log.lam[start:start + count], log.s[start:start + count], list(pairs), pipelines)
             for start, count in _blocks(log.count)]
    return _reduce(_run(_log_block, tasks, workers), len(pairs))


@dataclass(frozen=True)
class ReportRow:
    """One line of a correlation report; ``None`` marks a pipeline not run."""

    theta_deg: float
    n: int
    standard_scalar: float | None = None
    standard_bivector_norm: float | None = None
    standard_stderr: float | None = None
    raw_sign: float | None = None
    raw_sign_stderr: float | None = None
    raw_lambda: float | None = None
    raw_lambda_stderr: float | None = None
    sign_ties: int | None = None


REPORT_COLUMNS = tuple(f.name for f in fields(ReportRow))


def _row(theta, a, b, tally: PairTally, n: int, pipelines) -> ReportRow:
    values = {"theta_deg": float(theta), "n": n}
    if "standard" in pipelines:
        est = finalize_standard(tally.standard, a, b)
        values.update(standard_scalar=est.scalar,
                      standard_bivector_norm=est.bivector.norm(),
                      standard_stderr=est.stderr)
    if "raw-sign" in pipelines:
        values.update(raw_sign=tally.sign.mean_product,
                      raw_sign_stderr=tally.sign.product_stderr,
                      sign_ties=tally.ties)
    if "raw-lambda" in pipelines:
        values.update(raw_lambda=tally.lam.mean_product,
                      raw_lambda_stderr=tally.lam.product_stderr)
    return ReportRow(**values)


def simulate(config: ExperimentConfig) -> list:
    settings = config.setting_pairs()
    pairs = [(a, b) for _, a, b in settings]
    tallies = tally_stream(config.seed, config.trials, pairs, config.pipelines,
                           config.strict, config.workers)
    return [_row(theta, a, b, t, config.trials, config.pipelines)
            for (theta, a, b), t in zip(settings, tallies)]


def record(config: ExperimentConfig, path) -> TrialLog:
    """Generate the trial records of stream 0 and write them as a trial log."""
    stream = TrialStream(config.seed)
    lam = np.empty(config.trials, dtype=np.int8)
    s = np.empty((config.trials, 3))
    for start, count in _blocks(config.trials):
        lam[start:start + count], s[start:start + count] = stream.trials(start, count)
    write_log(path, config.seed, lam, s)
    return TrialLog(seed=config.seed, lam=lam, s=s)


def analyze(log: TrialLog, config: ExperimentConfig) -> list:
    """Score a recorded log; identical to :func:`simulate` on the same seed."""
    if config.strict:
        raise ConfigError("strict sampling needs fresh trials per pair; a log holds one stream")
    settings = config.setting_pairs()
    pairs = [(a, b) for _, a, b in settings]
    tallies = tally_log(log, pairs, config.pipelines, config.workers)
    return [_row(theta, a, b, t, log.count, config.pipelines)
            for (theta, a, b), t in zip(settings, tallies)]


def _quadruple_sum(scores: np.ndarray) -> int:
    aa, aap, bb, bbp = (scores[:, i].astype(np.int64) for i in range(4))
    per_trial = aa * (bb + bbp) + aap * (bb - bbp)
    return int(per_trial.sum())


def _chsh_block(task):
    seed, start, count, config = task
    lam, s = TrialStream(seed).trials(start, count)
    signs = np.column_stack([
        sign_scores(s, config.a, 1)[0], sign_scores(s, config.a_prime, 1)[0],
        sign_scores(s, config.b, -1)[0], sign_scores(s, config.b_prime, -1)[0],
    ])
    lam64 = lam.astype(np.int64)
    lams = np.column_stack([lam64, lam64, -lam64, -lam64])
    return _quadruple_sum(signs), _quadruple_sum(lams), lam


def chsh_run(config: ExperimentConfig) -> dict:
    """Both CHSH strings and the variance bound for one setting quadruple."""
    q = config.quadruple
    if q is None:
        raise ConfigError("chsh needs all four directions a, a', b, b'")
    n = config.trials
    pipelines = ("standard", "raw-sign")
    tallies = tally_stream(config.seed, n, q.pairs(), pipelines, config.strict, config.workers)

    tasks = [(config.seed, start, count, q) for start, count in _blocks(n)]
    blocks = _run(_chsh_block, tasks, config.workers)
    single_sign = sum(b[0] for b in blocks) / n
    single_lambda = sum(b[1] for b in blocks) / n
    lam = np.concatenate([b[2] for b in blocks])

    labels = ("ab", "ab_prime", "a_prime_b", "a_prime_b_prime")
    report = {"n": n, "seed": config.seed, "strict": config.strict}
    for name in ("a", "a_prime", "b", "b_prime"):
        report[name] = [float(x) for x in getattr(q, name)]
    std = [finalize_standard(t.standard, a, b) for t, (a, b) in zip(tallies, q.pairs())]
    for label, est, t in zip(labels, std, tallies):
        report[f"standard_{label}"] = est.scalar
        report[f"standard_bivector_norm_{label}"] = est.bivector.norm()
        report[f"raw_sign_{label}"] = t.sign.mean_product
    report["chsh_separate_standard"] = chsh_separate(*(e.scalar for e in std))
    report["chsh_separate_raw_sign"] = chsh_separate(*(t.sign.mean_product for t in tallies))
    report["chsh_single_average_raw_sign"] = single_sign
    report["chsh_single_average_raw_lambda"] = single_lambda
    vb = variance_bound(q, lam)
    report.update(variance_lhs=vb.lhs, variance_rhs=vb.rhs, variance_rhs_limit=vb.rhs_limit,
                  variance_remainder_norm=vb.remainder.norm(), variance_holds=vb.holds,
                  cross_term=vb.cross_term, mean_lambda=vb.mean_lambda,
                  sign_ties=sum(t.ties for t in tallies))
    return report


# -- output -------------------------------------------------------------------

def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(k)}: {_json(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json(x) for x in v) + "]"
    if isinstance(v, (float, np.floating)) and not math.isfinite(float(v)):
        raise ValueError(f"cannot serialise non-finite value {v!r}")
    return _num(v)


def format_rows(rows, fmt: str, meta: dict | None = None) -> str:
    """Serialise report rows; CSV columns follow :data:`REPORT_COLUMNS`."""
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(",".join(REPORT_COLUMNS) + "\n")
        for r in rows:
            buf.write(",".join(_num(getattr(r, c)) for c in REPORT_COLUMNS) + "\n")
        return buf.getvalue()
    if fmt == "json":
        head = {"format_version": REPORT_FORMAT_VERSION, **(meta or {})}
        lines = [_json({c: getattr(r, c) for c in REPORT_COLUMNS}) for r in rows]
        body = ",\n    ".join(lines)
        inner = ", ".join(f"{json.dumps(k)}: {_json(v)}" for k, v in head.items())
        return "{" + inner + ",\n  \"rows\": [\n    " + body + "\n  ]\n}\n"
    raise ConfigError(f"unknown format {fmt!r}")


def format_record(record: dict, fmt: str) -> str:
    """Serialise a flat report (e.g. from :func:`chsh_run`) as one CSV row or a JSON object."""
    if fmt == "csv":
        flat = {}
        for k, v in record.items():
            if isinstance(v, list):
                for axis, x in zip("xyz", v):
                    flat[f"{k}_{axis}"] = x
            else:
                flat[k] = v
        return ",".join(flat) + "\n" + ",".join(_num(v) for v in flat.values()) + "\n"
    if fmt == "json":
        return _json({"format_version": REPORT_FORMAT_VERSION, **record}) + "\n"
    raise ConfigError(f"unknown format {fmt!r}")
