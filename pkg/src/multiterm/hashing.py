"""Function ensembles with the collision (alpha, beta) property.

Three kinds: independent random binning (optionally with skewed bin
probabilities), uniform linear maps over a prime field, and sparse linear
maps with fixed column weight.  Binning and uniform linear ensembles are
2-universal, hence carry stored parameters (1, 0); sparse ensembles get
their beta measured exactly at construction rather than assumed.

Domain elements are integers 0..domain_size-1; linear kinds interpret them
as base-q digit vectors of length n.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import gfq
from .errors import BudgetExceededError, ConfigurationError
from .reports import Report

_ENUM_BUDGET = 1 << 20
_PAIRWISE_BUDGET = 1 << 22


@dataclass(frozen=True)
class HashFunction:
    """One realized map w -> c, with its parent ensemble kind."""

    kind: str
    domain_size: int
    image_size: int
    table: Optional[tuple] = None          # binning: bin index per element
    matrix: Optional[tuple] = None         # linear kinds: rows over GF(q)
    q: Optional[int] = None
    n: Optional[int] = None
    parts: Optional[tuple] = None          # composed: inner functions

    def __call__(self, w: int):
        if self.kind == "binning":
            return self.table[w]
        if self.kind in ("linear", "sparse-linear"):
            vec = gfq.decode(w, self.q, self.n)
            return gfq.encode(gfq.matvec(self.matrix, vec, self.q), self.q)
        if self.kind == "compose":
            return tuple(part(w) for part in self.parts)
        raise ConfigurationError("unknown hash kind %r" % (self.kind,))

    def dump(self) -> str:
        if self.matrix is None:
            raise ConfigurationError("only matrix-backed functions serialize")
        return gfq.dump_matrix(self.matrix, self.q)


class HashEnsemble:
    """Base class; subclasses fill in collision probabilities and sampling."""

    kind: str
    domain_size: int
    image_size: int
    alpha: Fraction
    beta: Fraction

    # pair_constant: collision probability identical for every w != w'
    pair_constant = False
    # shift_invariant: collision probability depends only on the difference
    shift_invariant = False

    def collision_prob(self, w: int, w2: int) -> Fraction:
        raise NotImplementedError

    def sample_function(self, seed) -> HashFunction:
        raise NotImplementedError

    def enumerate_functions(self):
        """Yield (function, probability) over the whole ensemble."""
        raise NotImplementedError

    def function_count(self) -> int:
        raise NotImplementedError

    def describe(self) -> str:
        return "%s(domain=%d, image=%d)" % (self.kind, self.domain_size, self.image_size)


class BinningEnsemble(HashEnsemble):
    """Each domain element gets an independent bin; uniform unless skewed."""

    kind = "binning"
    pair_constant = True

    def __init__(self, domain_size: int, bins: int, weights=None):
        if domain_size < 1 or bins < 1:
            raise ConfigurationError("binning needs positive domain and bin count")
        self.domain_size = domain_size
        self.image_size = bins
        if weights is None:
            self.weights = tuple(Fraction(1, bins) for _ in range(bins))
        else:
            self.weights = tuple(Fraction(w) for w in weights)
            if len(self.weights) != bins or sum(self.weights) != 1:
                raise ConfigurationError("bin weights must be a pmf over the bins")
        self._pair = sum(w * w for w in self.weights)
        self.alpha = Fraction(1)
        self.beta = Fraction(0)
        if self._pair > Fraction(1, bins):
            # skewed bins are not 2-universal; record the exact measured pair
            self.alpha = self._pair * bins
        self._float_weights = np.array([float(w) for w in self.weights])

    def collision_prob(self, w, w2):
        if w == w2:
            return Fraction(1)
        return self._pair

    def sample_function(self, seed) -> HashFunction:
        rng = np.random.default_rng(seed)
        table = tuple(int(c) for c in rng.choice(
            self.image_size, size=self.domain_size, p=self._float_weights))
        return HashFunction("binning", self.domain_size, self.image_size, table=table)

    def function_count(self) -> int:
        return self.image_size ** self.domain_size

    def enumerate_functions(self):
        if self.function_count() > _ENUM_BUDGET:
            raise BudgetExceededError("too large to exhaust: %d functions" % self.function_count())
        for table in itertools.product(range(self.image_size), repeat=self.domain_size):
            p = Fraction(1)
            for c in table:
                p *= self.weights[c]
            yield HashFunction("binning", self.domain_size, self.image_size, table=table), p


class LinearEnsemble(HashEnsemble):
    """All m x n matrices over GF(q), uniformly distributed."""

    kind = "linear"
    shift_invariant = True

    def __init__(self, q: int, n: int, m: int):
        gfq.require_prime(q)
        if n < 1 or m < 0:
            raise ConfigurationError("linear ensemble needs n >= 1, m >= 0")
        self.q, self.n, self.m = q, n, m
        self.domain_size = q ** n
        self.image_size = q ** m
        self.alpha = Fraction(1)
        self.beta = Fraction(0)

    def collision_prob(self, w, w2):
        if w == w2:
            return Fraction(1)
        return Fraction(1, self.image_size)

    def sample_function(self, seed) -> HashFunction:
        rng = np.random.default_rng(seed)
        rows = tuple(tuple(int(v) for v in row)
                     for row in rng.integers(0, self.q, size=(self.m, self.n)))
        return HashFunction("linear", self.domain_size, self.image_size,
                            matrix=rows, q=self.q, n=self.n)

    def function_count(self) -> int:
        return self.q ** (self.m * self.n)

    def enumerate_functions(self):
        if self.function_count() > _ENUM_BUDGET:
            raise BudgetExceededError("too large to exhaust: %d matrices" % self.function_count())
        p = Fraction(1, self.function_count())
        for flat in itertools.product(range(self.q), repeat=self.m * self.n):
            rows = tuple(tuple(flat[r * self.n:(r + 1) * self.n]) for r in range(self.m))
            yield HashFunction("linear", self.domain_size, self.image_size,
                               matrix=rows, q=self.q, n=self.n), p


class SparseLinearEnsemble(HashEnsemble):
    """Matrices whose every column has exactly `column_weight` nonzeros.

    The support of each column is uniform over the weight-sized row subsets
    and the nonzero values are uniform; columns are independent.  beta is
    measured exactly at alpha=1 during construction (the collision
    probability depends only on how many difference coordinates are active,
    so the profile is a short convolution).
    """

    kind = "sparse-linear"
    shift_invariant = True

    def __init__(self, q: int, n: int, m: int, column_weight: Optional[int] = None):
        gfq.require_prime(q)
        if column_weight is None:
            column_weight = max(2, math.ceil(math.log2(max(n, 2))))
        if not (1 <= column_weight <= m):
            raise ConfigurationError("column weight must lie in [1, m]")
        self.q, self.n, self.m = q, n, m
        self.column_weight = column_weight
        self.domain_size = q ** n
        self.image_size = q ** m
        if self.image_size > (1 << 16):
            raise BudgetExceededError("sparse ensemble image too large to profile")
        self._supports = list(itertools.combinations(range(m), column_weight))
        self._profile = self._collision_profile()
        self.alpha = Fraction(1)
        self.beta = self._measure_beta(self.alpha)

    def _column_distribution(self):
        """Pmf of one column's contribution for an active difference digit."""
        count = len(self._supports) * (self.q - 1) ** self.column_weight
        p = Fraction(1, count)
        dist = {}
        for support in self._supports:
            for values in itertools.product(range(1, self.q), repeat=self.column_weight):
                vec = [0] * self.m
                for r, v in zip(support, values):
                    vec[r] = v
                dist[gfq.encode(vec, self.q)] = dist.get(gfq.encode(vec, self.q), Fraction(0)) + p
        return dist

    def _collision_profile(self):
        """profile[k] = P(A d = 0) when the difference has k active digits."""
        column = self._column_distribution()
        profile = [Fraction(1)]
        current = {0: Fraction(1)}
        for _ in range(self.n):
            nxt: dict = {}
            for state, p in current.items():
                svec = gfq.decode(state, self.q, self.m)
                for delta, pd in column.items():
                    dvec = gfq.decode(delta, self.q, self.m)
                    key = gfq.encode(gfq.add(svec, dvec, self.q), self.q)
                    nxt[key] = nxt.get(key, Fraction(0)) + p * pd
            current = nxt
            profile.append(current.get(0, Fraction(0)))
        return profile

    def _measure_beta(self, alpha: Fraction) -> Fraction:
        threshold = alpha / self.image_size
        total = Fraction(0)
        for k in range(1, self.n + 1):
            pk = self._profile[k]
            if pk > threshold:
                total += math.comb(self.n, k) * (self.q - 1) ** k * pk
        return total

    def collision_prob(self, w, w2):
        if w == w2:
            return Fraction(1)
        u = gfq.decode(w, self.q, self.n)
        v = gfq.decode(w2, self.q, self.n)
        active = sum(1 for a, b in zip(u, v) if a != b)
        return self._profile[active]

    def sample_function(self, seed) -> HashFunction:
        rng = np.random.default_rng(seed)
        cols = []
        for _ in range(self.n):
            support = rng.choice(self.m, size=self.column_weight, replace=False)
            values = rng.integers(1, self.q, size=self.column_weight)
            col = [0] * self.m
            for r, v in zip(support, values):
                col[int(r)] = int(v)
            cols.append(col)
        rows = tuple(tuple(cols[j][r] for j in range(self.n)) for r in range(self.m))
        return HashFunction("sparse-linear", self.domain_size, self.image_size,
                            matrix=rows, q=self.q, n=self.n)

    def function_count(self) -> int:
        per_col = len(self._supports) * (self.q - 1) ** self.column_weight
        return per_col ** self.n

    def enumerate_functions(self):
        if self.function_count() > _ENUM_BUDGET:
            raise BudgetExceededError("too large to exhaust: %d matrices" % self.function_count())
        options = []
        for support in self._supports:
            for values in itertools.product(range(1, self.q), repeat=self.column_weight):
                col = [0] * self.m
                for r, v in zip(support, values):
                    col[r] = v
                options.append(tuple(col))
        p = Fraction(1, len(options) ** self.n)
        for cols in itertools.product(options, repeat=self.n):
            rows = tuple(tuple(cols[j][r] for j in range(self.n)) for r in range(self.m))
            yield HashFunction("sparse-linear", self.domain_size, self.image_size,
                               matrix=rows, q=self.q, n=self.n), p


class ComposedEnsemble(HashEnsemble):
    """Joint ensemble (f, g)(w) = (f(w), g(w)) of independent draws.

    Parameters follow the composition rule alpha = alpha_F * alpha_G,
    beta = beta_F + beta_G.
    """

    kind = "compose"

    def __init__(self, *parts: HashEnsemble):
        if len(parts) < 2:
            raise ConfigurationError("composition needs at least two ensembles")
        sizes = {p.domain_size for p in parts}
        if len(sizes) != 1:
            raise ConfigurationError("composed ensembles must share one domain")
        self.parts = tuple(parts)
        self.domain_size = parts[0].domain_size
        self.image_size = 1
        self.alpha = Fraction(1)
        self.beta = Fraction(0)
        for p in parts:
            self.image_size *= p.image_size
            self.alpha *= p.alpha
            self.beta += p.beta
        self.pair_constant = all(p.pair_constant for p in parts)
        self.shift_invariant = all(p.pair_constant or p.shift_invariant for p in parts)

    def collision_prob(self, w, w2):
        out = Fraction(1)
        for p in self.parts:
            out *= p.collision_prob(w, w2)
        return out

    def sample_function(self, seed) -> HashFunction:
        seq = np.random.SeedSequence(_seed_entropy(seed)).spawn(len(self.parts))
        funcs = tuple(p.sample_function(s) for p, s in zip(self.parts, seq))
        return HashFunction("compose", self.domain_size, self.image_size, parts=funcs)

    def function_count(self) -> int:
        total = 1
        for p in self.parts:
            total *= p.function_count()
        return total

    def enumerate_functions(self):
        if self.function_count() > _ENUM_BUDGET:
            raise BudgetExceededError("too large to exhaust: %d functions" % self.function_count())
        for combo in itertools.product(*(list(p.enumerate_functions()) for p in self.parts)):
            funcs = tuple(f for f, _ in combo)
            prob = Fraction(1)
            for _, pr in combo:
                prob *= pr
            yield HashFunction("compose", self.domain_size, self.image_size,
                               parts=funcs), prob


def _seed_entropy(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed.entropy
    return seed


def compose(*parts: HashEnsemble) -> ComposedEnsemble:
    return ComposedEnsemble(*parts)


def identity_linear(q: int, n: int) -> HashFunction:
    """The identity matrix as a member of the full linear ensemble."""
    gfq.require_prime(q)
    rows = tuple(tuple(1 if r == c else 0 for c in range(n)) for r in range(n))
    return HashFunction("linear", q ** n, q ** n, matrix=rows, q=q, n=n)


def make_ensemble(kind: str, domain_size: int, image_size: int,
                  q: Optional[int] = None, column_weight: Optional[int] = None,
                  weights=None) -> HashEnsemble:
    """Factory used by the codec/scenario layer."""
    if kind == "binning":
        return BinningEnsemble(domain_size, image_size, weights=weights)
    if kind in ("linear", "sparse-linear"):
        if q is None:
            raise ConfigurationError("linear ensembles need the field size q")
        n = round(math.log(domain_size, q))
        if q ** n != domain_size:
            raise ConfigurationError("domain size %d is not a power of q=%d" % (domain_size, q))
        m = round(math.log(image_size, q))
        if q ** m != image_size:
            raise ConfigurationError("image size %d is not a power of q=%d" % (image_size, q))
        if kind == "linear":
            return LinearEnsemble(q, n, m)
        return SparseLinearEnsemble(q, n, m, column_weight)
    raise ConfigurationError("unknown ensemble kind %r" % (kind,))


# -- collision property verification ----------------------------------------------------


def collision_mass(ens: HashEnsemble, anchor: int, alpha) -> Fraction:
    """Sum of collision probabilities above alpha/|Im| for one anchor."""
    threshold = Fraction(alpha) / ens.image_size
    total = Fraction(0)
    for w2 in range(ens.domain_size):
        if w2 == anchor:
            continue
        p = ens.collision_prob(anchor, w2)
        if p > threshold:
            total += p
    return total


def verify_hash_property(ens: HashEnsemble, alpha, beta) -> bool:
    """Exhaustively check the collision-mass bound at (alpha, beta).

    Shift-invariant and pair-constant ensembles need only one anchor; the
    generic quadratic sweep is limited by a pair budget and raises
    :class:`BudgetExceededError` beyond it.
    """
    alpha, beta = Fraction(alpha), Fraction(beta)
    if ens.pair_constant or ens.shift_invariant:
        return collision_mass(ens, 0, alpha) <= beta
    if ens.domain_size ** 2 > _PAIRWISE_BUDGET:
        raise BudgetExceededError(
            "too large to exhaust: %d^2 collision pairs" % ens.domain_size)
    return all(collision_mass(ens, w, alpha) <= beta for w in range(ens.domain_size))


def measure_beta(ens: HashEnsemble, alpha) -> Fraction:
    """Smallest beta for which the ensemble satisfies the bound at alpha."""
    alpha = Fraction(alpha)
    if ens.pair_constant or ens.shift_invariant:
        return collision_mass(ens, 0, alpha)
    if ens.domain_size ** 2 > _PAIRWISE_BUDGET:
        raise BudgetExceededError(
            "too large to exhaust: %d^2 collision pairs" % ens.domain_size)
    return max(collision_mass(ens, w, alpha) for w in range(ens.domain_size))


# -- joint-ensemble lemmas: balanced coloring and collision resistance -------------------


def _group_params(ensembles: Sequence[HashEnsemble], subset) -> tuple:
    alpha = Fraction(1)
    beta_plus = Fraction(1)
    for i in subset:
        alpha *= ensembles[i].alpha
        beta_plus *= ensembles[i].beta + 1
    return alpha, beta_plus - 1


def _projections(T, subset, total):
    """proj_{subset}(T) and the fiber map subset-key -> complement rows."""
    comp = [i for i in range(total) if i not in subset]
    fibers: dict = {}
    for w in T:
        key = tuple(w[i] for i in subset)
        fibers.setdefault(key, []).append(tuple(w[i] for i in comp))
    return fibers


def _joint_deviation(funcs, T, Q, qT, image_total, nI) -> Fraction:
    bins: dict = {}
    for w in T:
        c = tuple(funcs[i](w[i]) for i in range(nI))
        bins[c] = bins.get(c, Fraction(0)) + Q.get(w, Fraction(0))
    uniform = Fraction(1, image_total)
    deviation = sum(abs(mass / qT - uniform) for mass in bins.values())
    return deviation + (image_total - len(bins)) * uniform


def verify_mbcp(ensembles: Sequence[HashEnsemble], Q: dict, T: set,
                budget: int = _ENUM_BUDGET, samples: int = 2000,
                seed: int = 0) -> Report:
    """Check the balanced-coloring bound for a joint ensemble.

    Exhaustible ensembles get the exact expectation of the bin-mass
    deviation (LHS); the bound involves a square root, so the comparison is
    LHS^2 <= RHS^2 in exact rationals.  Beyond the budget the LHS is a Monte
    Carlo estimate with its standard error recorded, and the assertion
    weakens to bound >= estimate - 3*SE.
    """
    report = Report("mbcp")
    nI = len(ensembles)
    T = [tuple(w) for w in sorted(T)]
    Q = {tuple(w): Fraction(q) for w, q in Q.items()}
    qT = sum(Q.get(w, Fraction(0)) for w in T)
    if qT <= 0:
        raise ConfigurationError("Q must put positive mass on T")
    image_total = 1
    count = 1
    for ens in ensembles:
        image_total *= ens.image_size
        count *= ens.function_count()

    rhs_sq = _group_params(ensembles, range(nI))[0] - 1
    for size in range(1, nI + 1):
        for subset in itertools.combinations(range(nI), size):
            comp = tuple(i for i in range(nI) if i not in subset)
            a_comp, _ = _group_params(ensembles, comp)
            _, b_sub = _group_params(ensembles, subset)
            img_sub = Fraction(1)
            for i in subset:
                img_sub *= ensembles[i].image_size
            rhs_sq += a_comp * (b_sub + 1) * img_sub * _qbar(Q, T, comp, nI) / qT

    if count <= budget:
        lhs = Fraction(0)
        for combo in itertools.product(*(list(e.enumerate_functions())
                                         for e in ensembles)):
            prob = Fraction(1)
            funcs = []
            for f, pr in combo:
                prob *= pr
                funcs.append(f)
            lhs += prob * _joint_deviation(funcs, T, Q, qT, image_total, nI)
        report.add("balanced-coloring bound", lhs * lhs <= rhs_sq,
                   lhs=lhs, rhs=rhs_sq, detail="exact; compared as lhs^2 <= rhs^2")
        return report

    root = np.random.SeedSequence(seed)
    values = []
    for child in root.spawn(samples):
        funcs = [e.sample_function(s)
                 for e, s in zip(ensembles, child.spawn(len(ensembles)))]
        values.append(float(_joint_deviation(funcs, T, Q, qT, image_total, nI)))
    estimate = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    bound = math.sqrt(float(rhs_sq))
    report.add("balanced-coloring bound", bound >= estimate - 3 * se,
               lhs=estimate, rhs=bound,
               detail="Monte Carlo over %d draws, SE %.3g" % (samples, se))
    return report


def _qbar(Q, T, subset, total) -> Fraction:
    """Worst-case fiber Q-mass along the subset coordinates.

    The endpoints follow the lemma's convention: the empty subset gives the
    full mass Q(T), the full set gives the single heaviest row.
    """
    if not subset:
        return sum(Q.get(w, Fraction(0)) for w in T)
    if len(subset) == total:
        return max(Q.get(w, Fraction(0)) for w in T)
    comp = tuple(i for i in range(total) if i not in subset)
    sums: dict = {}
    for w in T:
        key = tuple(w[i] for i in comp)
        sums[key] = sums.get(key, Fraction(0)) + Q.get(w, Fraction(0))
    return max(sums.values())


def verify_mcrp(ensembles: Sequence[HashEnsemble], T: set, anchor: tuple,
                budget: int = _ENUM_BUDGET, samples: int = 2000,
                seed: int = 0) -> Report:
    """Check the collision-resistance bound for a joint ensemble.

    LHS is the probability that some member of T other than the anchor lands
    in the anchor's joint bin: exact for exhaustible ensembles, otherwise a
    Monte Carlo estimate with SE recorded and the assertion weakened to
    bound >= estimate - 3*SE.
    """
    report = Report("mcrp")
    nI = len(ensembles)
    anchor = tuple(anchor)
    T = [tuple(w) for w in sorted(T)]
    competitors = [w for w in T if w != anchor]
    count = 1
    for ens in ensembles:
        count *= ens.function_count()

    def collides(funcs) -> bool:
        target = tuple(funcs[i](anchor[i]) for i in range(nI))
        return any(tuple(funcs[i](w[i]) for i in range(nI)) == target
                   for w in competitors)

    rhs = _group_params(ensembles, range(nI))[1]
    for size in range(1, nI + 1):
        for subset in itertools.combinations(range(nI), size):
            comp = tuple(i for i in range(nI) if i not in subset)
            a_sub, _ = _group_params(ensembles, subset)
            _, b_comp = _group_params(ensembles, comp)
            img_sub = Fraction(1)
            for i in subset:
                img_sub *= ensembles[i].image_size
            rhs += a_sub * (b_comp + 1) * _obar(T, subset, nI) / img_sub

    if count <= budget:
        lhs = Fraction(0)
        for combo in itertools.product(*(list(e.enumerate_functions())
                                         for e in ensembles)):
            prob = Fraction(1)
            funcs = []
            for f, pr in combo:
                prob *= pr
                funcs.append(f)
            if collides(funcs):
                lhs += prob
        report.add("collision-resistance bound", lhs <= rhs, lhs=lhs, rhs=rhs,
                   detail="exact")
        return report

    root = np.random.SeedSequence(seed)
    hits = 0
    for child in root.spawn(samples):
        funcs = [e.sample_function(s)
                 for e, s in zip(ensembles, child.spawn(len(ensembles)))]
        if collides(funcs):
            hits += 1
    estimate = hits / samples
    se = math.sqrt(max(estimate * (1 - estimate), 1e-12) / samples)
    report.add("collision-resistance bound", float(rhs) >= estimate - 3 * se,
               lhs=estimate, rhs=rhs,
               detail="Monte Carlo over %d draws, SE %.3g" % (samples, se))
    return report


def _obar(T, subset, total) -> Fraction:
    """Worst-case fiber cardinality of T along the subset coordinates."""
    if len(subset) == total:
        return Fraction(len(T))
    if not subset:
        return Fraction(1)
    comp = tuple(i for i in range(total) if i not in subset)
    counts: dict = {}
    for w in T:
        key = tuple(w[i] for i in comp)
        counts[key] = counts.get(key, 0) + 1
    return Fraction(max(counts.values()))


# -- a product-difference elementary inequality ------------------------------------------


def product_difference_gap(thetas: Sequence) -> tuple:
    """(|prod theta - 1|, sum |theta_l - 1| prod_{l'>l} theta_l') as exact values.

    The right side dominates the left for any nonnegative sequence; callers
    assert lhs <= rhs.
    """
    thetas = [Fraction(t) if not isinstance(t, float) else t for t in thetas]
    prod = 1
    for t in thetas:
        prod = prod * t
    lhs = abs(prod - 1)
    rhs = 0
    for l, t in enumerate(thetas):
        tail = 1
        for t2 in thetas[l + 1:]:
            tail = tail * t2
        rhs = rhs + abs(t - 1) * tail
    return lhs, rhs
