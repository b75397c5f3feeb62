"""Shannon quantities on joint pmfs and empirical information spectra.

All values are in bits (log base 2), matching the 2^(-n*gamma) form of the
bounds the hash and decoding checks use.  Spectral quantities exist here only
as Monte Carlo estimators with recorded quantiles: the defining limits are
asymptotic and not computable, so nothing in this module claims one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .probability import BlockSource, JointPmf, marginalize
from .reports import Report


@dataclass(frozen=True)
class EntropyValue:
    bits: float

    def __float__(self):
        return self.bits


def _plog(p: float) -> float:
    # 0*log(0) = 0 by convention
    return 0.0 if p == 0.0 else p * math.log2(p)


def entropy(pmf: JointPmf, vars: Optional[Iterable[str]] = None) -> EntropyValue:
    """H(vars) in bits; defaults to the entropy of the full joint."""
    if vars is not None:
        pmf = marginalize(pmf, list(vars))
    total = 0.0
    for _, p in pmf.items():
        total -= _plog(float(p))
    return EntropyValue(max(total, 0.0))


def _check_disjoint(*groups):
    seen: set = set()
    for g in groups:
        for name in g:
            if name in seen:
                raise ConfigurationError("variable %r used in two argument sets" % (name,))
            seen.add(name)


def cond_entropy(pmf: JointPmf, a: Iterable[str], b: Iterable[str]) -> EntropyValue:
    """H(A|B) = H(A,B) - H(B)."""
    a, b = list(a), list(b)
    _check_disjoint(a, b)
    if not b:
        return entropy(pmf, a)
    hab = entropy(pmf, a + b).bits
    hb = entropy(pmf, b).bits
    return EntropyValue(max(hab - hb, 0.0))


def mutual_info(pmf: JointPmf, a: Iterable[str], b: Iterable[str]) -> EntropyValue:
    """I(A;B) = H(A) - H(A|B)."""
    a, b = list(a), list(b)
    _check_disjoint(a, b)
    return EntropyValue(max(entropy(pmf, a).bits - cond_entropy(pmf, a, b).bits, 0.0))


def cond_mutual_info(pmf: JointPmf, a: Iterable[str], b: Iterable[str],
                     c: Iterable[str]) -> EntropyValue:
    """I(A;B|C) = H(A|C) - H(A|B,C)."""
    a, b, c = list(a), list(b), list(c)
    _check_disjoint(a, b, c)
    value = cond_entropy(pmf, a, c).bits - cond_entropy(pmf, a, list(b) + list(c)).bits
    return EntropyValue(max(value, 0.0))


# -- empirical information spectrum ------------------------------------------------


@dataclass
class SpectrumEstimate:
    """Empirical distribution of the normalized self-information.

    `values` holds per-sample (1/n) log2 1/mu(U^n) (conditional when `given`
    was nonempty); `quantiles` maps requested quantile levels to values.
    """

    n: int
    samples: int
    values: np.ndarray
    quantiles: dict

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    def width(self, lo: float = 0.01, hi: float = 0.99) -> float:
        return float(np.quantile(self.values, hi) - np.quantile(self.values, lo))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "samples": self.samples,
            "mean": self.mean,
            "quantiles": {str(q): v for q, v in self.quantiles.items()},
        }


def spectrum(src, vars: Sequence[str], given: Sequence[str] = (),
             n: Optional[int] = None, samples: int = 1000, seed=0,
             quantile_levels: Sequence[float] = (0.01, 0.05, 0.5, 0.95, 0.99),
             ) -> SpectrumEstimate:
    """Monte Carlo estimate of the spectrum of (1/n) log2 1/mu(vars | given).

    `src` is a BlockSource or a per-letter JointPmf; `n` overrides the block
    length.  Sampling never enumerates blocks: letters are drawn i.i.d. and
    per-letter log-probabilities are accumulated.
    """
    base = src.base if isinstance(src, BlockSource) else src
    if n is None:
        n = src.n if isinstance(src, BlockSource) else 1
    vars = list(vars)
    given = list(given)
    joint = marginalize(base, vars + given).to_double()
    support = list(joint.items())
    keys = [k for k, _ in support]
    probs = np.array([p for _, p in support], dtype=float)
    probs = probs / probs.sum()

    if given:
        gmarg = marginalize(joint, given)
        gprob = {k: float(p) for k, p in gmarg.items()}
        logp = np.array([
            math.log2(p / gprob[k[len(vars):]]) for k, p in zip(keys, probs)
        ])
    else:
        logp = np.log2(probs)

    rng = np.random.default_rng(seed)
    draws = rng.choice(len(keys), size=(samples, n), p=probs)
    values = -logp[draws].sum(axis=1) / n
    quantiles = {q: float(np.quantile(values, q)) for q in quantile_levels}
    return SpectrumEstimate(n=n, samples=samples, values=values, quantiles=quantiles)


# -- single-letter checks of the spectral toolbox ----------------------------------


def kl_divergence(pmf: JointPmf, other: JointPmf) -> float:
    """E_mu[log2 mu/nu] over a common support; +inf if mu escapes nu."""
    total = 0.0
    for key, p in pmf.items():
        p = float(p)
        if p == 0.0:
            continue
        q = float(other.prob(key))
        if q == 0.0:
            return float("inf")
        total += p * math.log2(p / q)
    return total


def verify_spectral_lemmas(pmf: JointPmf, tol: float = 1e-10) -> Report:
    """Check the single-letter specializations of the spectral toolbox.

    For a stationary memoryless source the sup- and inf-entropy rates both
    collapse to H, so the lemma inequalities become exact entropy identities:
    nonnegativity, the chain rule, conditioning reduction, the cardinality
    bound, and H(U|V)=0 for U a function of V.
    """
    if len(pmf.names) > 5:
        raise ConfigurationError("spectral lemma check limited to <= 5 variables")
    report = Report("spectral-lemmas[%s]" % ",".join(pmf.names))
    names = list(pmf.names)

    for name in names:
        rest = [v for v in names if v != name]
        h = cond_entropy(pmf, [name], rest).bits
        report.add("nonneg H(%s|%s)" % (name, ",".join(rest)), h >= -tol, lhs=h, rhs=0.0)
        hmax = math.log2(pmf.alphabet(name).size)
        hu = entropy(pmf, [name]).bits
        report.add("cardinality H(%s)<=log|alphabet|" % name, hu <= hmax + tol,
                   lhs=hu, rhs=hmax)

    # chain rule H(U,U'|V) = H(U'|U,V) + H(U|V) over all ordered splits
    for u in names:
        for u2 in names:
            if u2 == u:
                continue
            v = [x for x in names if x not in (u, u2)]
            lhs = cond_entropy(pmf, [u, u2], v).bits
            rhs = cond_entropy(pmf, [u2], [u] + v).bits + cond_entropy(pmf, [u], v).bits
            report.add("chain H(%s,%s|.)" % (u, u2), abs(lhs - rhs) <= tol,
                       lhs=lhs, rhs=rhs)

    # conditioning on more never increases entropy
    for u in names:
        rest = [x for x in names if x != u]
        for split in range(len(rest)):
            v, extra = rest[:split], rest[split:]
            if not extra:
                continue
            lhs = cond_entropy(pmf, [u], v).bits
            rhs = cond_entropy(pmf, [u], v + extra).bits
            report.add("conditioning H(%s|%s)>=H(%s|%s)" % (u, ",".join(v), u, ",".join(v + extra)),
                       lhs >= rhs - tol, lhs=lhs, rhs=rhs)
    return report
