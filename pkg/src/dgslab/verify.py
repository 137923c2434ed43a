"""Statistical verification of samplers against exactly computed
distributions.

Samplers here promise multiplicative closeness: every point probability is
within a factor gamma of the ideal, up to eps of leaked mass.  The checks
below test both the aggregate statistical distance (with a Monte Carlo
allowance) and per-point ratios on points heavy enough to estimate, and
treat any sample that the exact enumeration proves impossible as a hard
failure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Vec, format_vec, norm_sq, parse_vec, rat
from .oracles import ExactDistribution


@dataclass
class EmpiricalHistogram:
    """Counts of exact rational sample vectors, keyed by their canonical
    string form ("p/q,p/q,...")."""

    counts: dict[str, int] = field(default_factory=dict)
    total: int = 0

    @staticmethod
    def key(v: Vec) -> str:
        return format_vec(v)

    def add(self, v: Vec, k: int = 1) -> None:
        key = self.key(v)
        self.counts[key] = self.counts.get(key, 0) + k
        self.total += k

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalHistogram":
        h = cls()
        for v in samples:
            h.add(v)
        return h

    def frequency(self, v: Vec) -> float:
        return self.counts.get(self.key(v), 0) / self.total

    def to_json(self) -> str:
        return json.dumps({"total": self.total, "counts": self.counts},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EmpiricalHistogram":
        obj = json.loads(text)
        return cls(counts=dict(obj["counts"]), total=int(obj["total"]))

    def to_csv(self) -> str:
        lines = ["key,count"]
        lines += [f"\"{k}\",{c}" for k, c in sorted(self.counts.items())]
        return "\n".join(lines) + "\n"


def collect(sample_batch, n: int, rng: np.random.Generator,
            chunk: int = 50_000) -> EmpiricalHistogram:
    """Histogram of n draws from sample_batch(size, rng)."""
    h = EmpiricalHistogram()
    remaining = n
    while remaining > 0:
        k = min(chunk, remaining)
        for v in sample_batch(k, rng):
            h.add(v)
        remaining -= k
    return h


@dataclass
class ClosenessReport:
    """Outcome of comparing an empirical histogram to an exact distribution.

    passed requires all three: statistical distance within budget, every
    heavy point's frequency ratio within its band, and no impossible
    samples (out of the ideal support yet inside the truncation radius)."""

    total: int
    support_size: int
    statistical_distance: float
    sd_budget: float
    heavy_points: int
    worst_ratio_high: float  # max over heavy points of freq/(gamma*p)
    worst_ratio_low: float   # max over heavy points of p/(gamma*freq)
    impossible_keys: list[str]
    out_of_support_mass: float
    passed: bool

    def to_json(self) -> str:
        d = dict(self.__dict__)
        return json.dumps(d, sort_keys=True)


def closeness_check(hist: EmpiricalHistogram, ideal: ExactDistribution,
                    gamma: float, eps: float, radius_sq=None,
                    se_slack: float = 3.0) -> ClosenessReport:
    """Check that hist is consistent with a (gamma, eps)-close sampler.

    - Statistical distance must not exceed eps + (1 - 1/gamma) + the Monte
      Carlo allowance (se_slack/2) * sum_i min(p_i, sqrt(p_i / total)),
      the expected-deviation bound for a multinomial with these cell
      probabilities.
    - Points with ideal probability >= 10/total must have frequency within
      [p / gamma * (1 - band), p * gamma * (1 + band)] for the binomial
      band se_slack * sqrt((1-p)/(p*total)).
    - Any observed key outside the ideal support whose norm is within
      radius_sq (the enumeration's truncation radius) is impossible and
      fails outright; mass beyond the radius only enters the distance.
    """
    total = hist.total
    k = len(ideal.support)
    support_keys = {}
    sd = 0.0
    mc_allowance = 0.0
    heavy = 0
    worst_hi = 0.0
    worst_lo = 0.0
    ratios_ok = True
    for v, p in zip(ideal.support, ideal.probs):
        key = EmpiricalHistogram.key(v)
        support_keys[key] = True
        freq = hist.counts.get(key, 0) / total
        p = float(p)
        sd += abs(freq - p)
        mc_allowance += min(p, math.sqrt(p / total))
        if p >= 10.0 / total:
            heavy += 1
            band = se_slack * math.sqrt((1.0 - p) / (p * total))
            hi = freq / (gamma * p * (1.0 + band)) if p > 0 else math.inf
            lo = (p / (gamma * freq * (1.0 + band))) if freq > 0 else math.inf
            worst_hi = max(worst_hi, hi)
            worst_lo = max(worst_lo, lo)
            if hi > 1.0 or lo > 1.0:
                ratios_ok = False
    impossible = []
    out_mass = 0.0
    for key, c in hist.counts.items():
        if key in support_keys:
            continue
        out_mass += c / total
        if radius_sq is not None and norm_sq(parse_vec(key)) <= rat(radius_sq):
            impossible.append(key)
    sd = 0.5 * (sd + out_mass)
    budget = eps + (1.0 - 1.0 / gamma) + 0.5 * se_slack * mc_allowance
    passed = (sd <= budget) and ratios_ok and not impossible
    return ClosenessReport(
        total=total,
        support_size=k,
        statistical_distance=sd,
        sd_budget=budget,
        heavy_points=heavy,
        worst_ratio_high=worst_hi,
        worst_ratio_low=worst_lo,
        impossible_keys=sorted(impossible),
        out_of_support_mass=out_mass,
        passed=passed,
    )
