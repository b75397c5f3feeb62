"""Exact finite probability model: joint pmfs over named discrete variables.

A :class:`JointPmf` carries its arithmetic mode: ``"rational"`` tables hold
:class:`fractions.Fraction` entries and all mass/identity checks are exact;
``"double"`` tables hold floats for Monte Carlo work.  Mixing modes in one
operation is an error.  Zero-probability rows are kept only in rational mode
(support-set semantics matter for constrained-random draws); double mode
prunes entries below 1e-300.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    ModeMismatchError,
    UnsupportedConditionError,
)

RATIONAL = "rational"
DOUBLE = "double"

_MASS_TOL = 1e-12
_PRUNE = 1e-300


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct, opaque symbol labels."""

    symbols: tuple

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise ConfigurationError("alphabet must contain at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise ConfigurationError("alphabet symbols must be distinct")
        object.__setattr__(self, "symbols", tuple(self.symbols))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, symbol) -> int:
        return self.symbols.index(symbol)


def binary_alphabet() -> Alphabet:
    return Alphabet((0, 1))


class JointPmf:
    """Joint pmf over an ordered list of named variables.

    `variables` is a sequence of ``(name, Alphabet)`` pairs; `table` maps
    symbol tuples (aligned with the variable order) to probabilities.
    """

    def __init__(self, variables: Sequence[tuple], table: Mapping[tuple, object],
                 mode: str = RATIONAL, _validated: bool = False):
        names = [name for name, _ in variables]
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate variable names: %r" % (names,))
        if mode not in (RATIONAL, DOUBLE):
            raise ConfigurationError("unknown mode %r" % (mode,))
        self.variables = tuple((name, alph) for name, alph in variables)
        self.mode = mode
        self._names = tuple(names)
        self._index = {name: k for k, name in enumerate(names)}
        cleaned = {}
        for key, p in table.items():
            key = tuple(key)
            if len(key) != len(self.variables):
                raise ConfigurationError(
                    "tuple arity %d does not match %d variables" % (len(key), len(self.variables)))
            if mode == RATIONAL:
                p = Fraction(p)
                if p < 0:
                    raise ConfigurationError("negative probability for %r" % (key,))
                cleaned[key] = p
            else:
                p = float(p)
                if p < 0:
                    raise ConfigurationError("negative probability for %r" % (key,))
                if p >= _PRUNE:
                    cleaned[key] = p
        self._table = cleaned
        if not _validated:
            self._check_support()
            self._check_mass()

    # -- construction helpers -------------------------------------------------

    @classmethod
    def from_function(cls, variables, fn, mode=RATIONAL) -> "JointPmf":
        """Tabulate ``fn(symbol_tuple)`` over the full product alphabet."""
        table = {}
        for key in itertools.product(*(alph.symbols for _, alph in variables)):
            table[key] = fn(key)
        return cls(variables, table, mode=mode)

    def _check_support(self):
        for key in self._table:
            for sym, (name, alph) in zip(key, self.variables):
                if sym not in alph.symbols:
                    raise ConfigurationError(
                        "symbol %r outside alphabet of %r" % (sym, name))

    def _check_mass(self):
        total = sum(self._table.values())
        if self.mode == RATIONAL:
            if total != 1:
                raise ConfigurationError("total mass %s != 1" % (total,))
        else:
            if abs(total - 1.0) > _MASS_TOL:
                raise ConfigurationError("total mass %r not within 1e-12 of 1" % (total,))

    # -- basic accessors -------------------------------------------------------

    @property
    def names(self) -> tuple:
        return self._names

    def alphabet(self, name: str) -> Alphabet:
        return self.variables[self._var_pos(name)][1]

    def _var_pos(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ConfigurationError("unknown variable name %r" % (name,)) from None

    def items(self):
        return self._table.items()

    def prob(self, key: tuple):
        zero = Fraction(0) if self.mode == RATIONAL else 0.0
        return self._table.get(tuple(key), zero)

    def prob_of(self, assignment: Mapping[str, object]):
        """Probability of a full assignment given as a name->symbol mapping."""
        key = tuple(assignment[name] for name in self._names)
        return self.prob(key)

    def support(self):
        if self.mode == RATIONAL:
            return [k for k, p in self._table.items() if p > 0]
        return list(self._table)

    def to_double(self) -> "JointPmf":
        if self.mode == DOUBLE:
            return self
        table = {k: float(p) for k, p in self._table.items() if p > 0}
        return JointPmf(self.variables, table, mode=DOUBLE, _validated=True)

    def require_same_mode(self, other: "JointPmf"):
        if self.mode != other.mode:
            raise ModeMismatchError(
                "cannot mix %s-mode and %s-mode pmfs" % (self.mode, other.mode))

    def __eq__(self, other):
        if not isinstance(other, JointPmf):
            return NotImplemented
        if self.variables != other.variables or self.mode != other.mode:
            return False
        keys = set(self._table) | set(other._table)
        return all(self.prob(k) == other.prob(k) for k in keys)

    def __repr__(self):
        return "JointPmf(%s; %d rows, %s)" % (
            ",".join(self._names), len(self._table), self.mode)


# -- core operations -----------------------------------------------------------


def marginalize(pmf: JointPmf, keep: Iterable[str]) -> JointPmf:
    """Sum out all variables not in `keep`; mass is preserved."""
    keep = list(keep)
    positions = [pmf._var_pos(name) for name in keep]
    variables = [pmf.variables[p] for p in positions]
    zero = Fraction(0) if pmf.mode == RATIONAL else 0.0
    table: dict = {}
    for key, p in pmf.items():
        sub = tuple(key[pos] for pos in positions)
        table[sub] = table.get(sub, zero) + p
    return JointPmf(variables, table, mode=pmf.mode, _validated=True)


def condition(pmf: JointPmf, target: Iterable[str],
              given: Mapping[str, object]) -> JointPmf:
    """Return the conditional pmf of `target` given the assignment `given`.

    Raises :class:`UnsupportedConditionError` when the conditioning event has
    zero probability.
    """
    target = list(target)
    for name in given:
        pmf._var_pos(name)
    tpos = [pmf._var_pos(name) for name in target]
    gpos = {pmf._var_pos(name): sym for name, sym in given.items()}
    zero = Fraction(0) if pmf.mode == RATIONAL else 0.0
    table: dict = {}
    mass = zero
    for key, p in pmf.items():
        if any(key[pos] != sym for pos, sym in gpos.items()):
            continue
        mass += p
        sub = tuple(key[pos] for pos in tpos)
        table[sub] = table.get(sub, zero) + p
    if mass == 0:
        raise UnsupportedConditionError(
            "unsupported condition: event %r has zero probability" % (dict(given),))
    table = {k: p / mass for k, p in table.items()}
    variables = [pmf.variables[p] for p in tpos]
    return JointPmf(variables, table, mode=pmf.mode, _validated=True)


def merge_vars(pmf: JointPmf, new_name: str, parts: Sequence[str],
               keep: bool = False) -> JointPmf:
    """Add a composite variable whose symbols are the tuples of `parts`.

    With ``keep=False`` the part variables are removed; with ``keep=True``
    they stay alongside the (functionally determined) composite.  Used to
    realize substitutions such as W -> (W0, Wi) in region-equivalence checks.
    """
    part_pos = [pmf._var_pos(name) for name in parts]
    rest = [(k, v) for k, v in enumerate(pmf.variables)
            if keep or k not in part_pos]
    symbols = tuple(itertools.product(*(pmf.variables[p][1].symbols for p in part_pos)))
    variables = [(new_name, Alphabet(symbols))] + [v for _, v in rest]
    zero = Fraction(0) if pmf.mode == RATIONAL else 0.0
    table: dict = {}
    for key, p in pmf.items():
        merged = tuple(key[p] for p in part_pos)
        newkey = (merged,) + tuple(key[k] for k, _ in rest)
        table[newkey] = table.get(newkey, zero) + p
    return JointPmf(variables, table, mode=pmf.mode, _validated=True)


def check_markov(pmf: JointPmf, a: Iterable[str], b: Iterable[str],
                 c: Iterable[str], tol: float = 1e-12) -> bool:
    """True iff the chain A <-> B <-> C holds, i.e. I(A;C|B) <= tol.

    In rational mode the conditional independence is first tested exactly via
    the factorization mu(abc)*mu(b) == mu(ab)*mu(bc); the float conditional
    mutual information is used as the general criterion.
    """
    a, b, c = list(a), list(b), list(c)
    seen: set = set()
    for group in (a, b, c):
        for name in group:
            pmf._var_pos(name)
            if name in seen:
                raise ConfigurationError("variable %r appears in two blocks" % (name,))
            seen.add(name)
    if pmf.mode == RATIONAL and _factorizes(pmf, a, b, c):
        return True
    from .information import cond_mutual_info

    return cond_mutual_info(pmf, a, c, b).bits <= tol


def _factorizes(pmf: JointPmf, a, b, c) -> bool:
    abc = marginalize(pmf, a + b + c)
    ab = {k: p for k, p in marginalize(pmf, a + b).items()}
    bc = {k: p for k, p in marginalize(pmf, b + c).items()}
    bm = {k: p for k, p in marginalize(pmf, b).items()}
    la, lb = len(a), len(b)
    for key, p in abc.items():
        ka, kb, kc = key[:la], key[la:la + lb], key[la + lb:]
        lhs = p * bm.get(kb, Fraction(0))
        rhs = ab.get(ka + kb, Fraction(0)) * bc.get(kb + kc, Fraction(0))
        if lhs != rhs:
            return False
    return True


# -- memoryless block extension --------------------------------------------------


@dataclass
class BlockSource:
    """Lazily evaluated n-fold product of a per-letter pmf.

    A block is a tuple of n letters; each letter is a symbol tuple aligned
    with the base variable order.  The full block table is never materialized
    unless explicitly enumerated.
    """

    base: JointPmf
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("block length must be >= 1")

    @property
    def mode(self) -> str:
        return self.base.mode

    def prob(self, block: Sequence[tuple]):
        if len(block) != self.n:
            raise ConfigurationError("block length %d != n=%d" % (len(block), self.n))
        one = Fraction(1) if self.base.mode == RATIONAL else 1.0
        p = one
        for letter in block:
            p *= self.base.prob(letter)
        return p

    def log2_prob(self, block: Sequence[tuple]) -> float:
        total = 0.0
        for letter in block:
            p = self.base.prob(letter)
            if p == 0:
                return float("-inf")
            total += np.log2(float(p))
        return total

    def enumerate_blocks(self):
        """All positive-probability blocks with their probabilities."""
        support = self.base.support()
        for letters in itertools.product(support, repeat=self.n):
            yield letters, self.prob(letters)


def block_extend(pmf: JointPmf, n: int) -> BlockSource:
    """Memoryless n-letter extension of a per-letter pmf."""
    return BlockSource(pmf, n)


def sample(src: BlockSource, seed, count: int = 1) -> list:
    """Draw `count` i.i.d. blocks; identical seed gives identical output."""
    rng = np.random.default_rng(seed)
    support = list(src.base.support())
    probs = np.array([float(src.base.prob(k)) for k in support], dtype=float)
    probs = probs / probs.sum()
    idx = rng.choice(len(support), size=(count, src.n), p=probs)
    return [tuple(support[j] for j in row) for row in idx]


# -- convenience constructors ----------------------------------------------------


def bernoulli(p, name: str = "X", mode: str = RATIONAL) -> JointPmf:
    p = Fraction(p) if mode == RATIONAL else float(p)
    one = Fraction(1) if mode == RATIONAL else 1.0
    return JointPmf([(name, binary_alphabet())], {(0,): one - p, (1,): p}, mode=mode)


def uniform(variables) -> JointPmf:
    total = 1
    for _, alph in variables:
        total *= alph.size
    p = Fraction(1, total)
    table = {key: p for key in itertools.product(*(a.symbols for _, a in variables))}
    return JointPmf(variables, table, mode=RATIONAL)


def point_mass(variables, key) -> JointPmf:
    return JointPmf(variables, {tuple(key): Fraction(1)}, mode=RATIONAL)


def dsbs(p, names=("X1", "X2"), mode: str = RATIONAL) -> JointPmf:
    """Doubly symmetric binary source: X1 ~ Bern(1/2), X2 = X1 xor Bern(p)."""
    b = binary_alphabet()
    if mode == RATIONAL:
        p = Fraction(p)
        half = Fraction(1, 2)
    else:
        p, half = float(p), 0.5
    table = {}
    for x1 in (0, 1):
        for x2 in (0, 1):
            table[(x1, x2)] = half * (p if x1 != x2 else (1 - p))
    return JointPmf([(names[0], b), (names[1], b)], table, mode=mode)


def random_pmf(rng: np.random.Generator, variables, mode: str = DOUBLE,
               denominator: int = 720) -> JointPmf:
    """Random strictly positive pmf over the given variables.

    Rational mode draws integer weights summing over a common denominator so
    the table is exact; double mode normalizes uniform weights.
    """
    keys = list(itertools.product(*(a.symbols for _, a in variables)))
    if mode == DOUBLE:
        w = rng.uniform(0.05, 1.0, size=len(keys))
        w = w / w.sum()
        return JointPmf(variables, dict(zip(keys, w)), mode=DOUBLE)
    weights = [int(x) for x in rng.integers(1, denominator, size=len(keys))]
    total = sum(weights)
    table = {k: Fraction(w, total) for k, w in zip(keys, weights)}
    return JointPmf(variables, table, mode=RATIONAL)
