"""Per-distribution identities behind the classical single-letter regions.

Each verifier takes a joint law built for the example's Markov class (time
sharing variable, auxiliaries generated from the source, reproductions
generated from auxiliaries) and checks the entropy identities that equate
the constrained-generator bound expressions with the classical inner-region
expressions.  Generators for random laws in each class live here too, so
sweeps and the verification CLI share them.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .information import cond_entropy, cond_mutual_info, entropy, mutual_info
from .network import ConditionalPmf, apply_conditional
from .probability import (
    DOUBLE,
    RATIONAL,
    Alphabet,
    JointPmf,
    check_markov,
    condition,
    marginalize,
    merge_vars,
    random_pmf,
)
from .reports import Report

EXAMPLES = ("berger-tung", "el-gamal-cover", "zhang-berger", "heegard-berger")


def verify_example_identities(example: str, pmf: JointPmf, tol: float = 1e-9) -> Report:
    """Dispatch to one example's identity checks.

    The pmf must satisfy the example's Markov class; a violated chain raises
    :class:`PreconditionError` naming it.
    """
    if example == "berger-tung":
        return _berger_tung(pmf, tol)
    if example == "el-gamal-cover":
        return _el_gamal_cover(pmf, tol)
    if example == "zhang-berger":
        return _zhang_berger(pmf, tol)
    if example == "heegard-berger":
        return _heegard_berger(pmf, tol)
    raise ConfigurationError("unknown example %r (known: %s)" % (example, ", ".join(EXAMPLES)))


def _require_markov(pmf, a, b, c, tol, label):
    if not check_markov(pmf, a, b, c, tol):
        raise PreconditionError("required Markov chain violated: %s" % label)


def _berger_tung(pmf: JointPmf, tol: float) -> Report:
    """H(W_i|W_ic,T) - H(W_i|X_i,T) = I(X_i;W_i|W_ic,T) and the sum form."""
    report = Report("berger-tung")
    for i, ic in ((1, 2), (2, 1)):
        _require_markov(pmf, ["W%d" % ic, "X%d" % ic], ["X%d" % i, "T"], ["W%d" % i],
                        max(tol, 1e-9), "(W%d,X%d) <-> (X%d,T) <-> W%d" % (ic, ic, i, i))
    _require_markov(pmf, ["X1", "X2"], [], ["T"], max(tol, 1e-9),
                    "T independent of (X1,X2)")
    for i, ic in ((1, 2), (2, 1)):
        lhs = (cond_entropy(pmf, ["W%d" % i], ["W%d" % ic, "T"]).bits
               - cond_entropy(pmf, ["W%d" % i], ["X%d" % i, "T"]).bits)
        rhs = cond_mutual_info(pmf, ["X%d" % i], ["W%d" % i], ["W%d" % ic, "T"]).bits
        report.add("rate-%d identity" % i, abs(lhs - rhs) <= tol, lhs=lhs, rhs=rhs)
    lhs = (cond_entropy(pmf, ["W1", "W2"], ["T"]).bits
           - cond_entropy(pmf, ["W1"], ["X1", "T"]).bits
           - cond_entropy(pmf, ["W2"], ["X2", "T"]).bits)
    rhs = cond_mutual_info(pmf, ["X1", "X2"], ["W1", "W2"], ["T"]).bits
    report.add("sum-rate identity", abs(lhs - rhs) <= tol, lhs=lhs, rhs=rhs)
    return report


def _el_gamal_cover(pmf: JointPmf, tol: float) -> Report:
    """Bound expressions dominate the classical two-description forms."""
    report = Report("el-gamal-cover")
    for i, ic in ((1, 2), (2, 1)):
        _require_markov(
            pmf, ["W%d" % ic, "X", "Z12", "Z%d" % ic], ["W%d" % i, "T"], ["Z%d" % i],
            max(tol, 1e-9),
            "(W%d,X,Z12,Z%d) <-> (W%d,T) <-> Z%d" % (ic, ic, i, i))
    _require_markov(pmf, ["X", "Z1", "Z2"], ["W1", "W2", "T"], ["Z12"],
                    max(tol, 1e-9), "(X,Z1,Z2) <-> (W1,W2,T) <-> Z12")
    for i in (1, 2):
        lhs = (cond_entropy(pmf, ["W%d" % i], ["T"]).bits
               - cond_entropy(pmf, ["W%d" % i], ["X", "T"]).bits)
        mid = cond_mutual_info(pmf, ["X"], ["W%d" % i, "Z%d" % i], ["T"]).bits
        low = cond_mutual_info(pmf, ["X"], ["Z%d" % i], ["T"]).bits
        report.add("rate-%d equals I(X;W,Z|T)" % i, abs(lhs - mid) <= tol, lhs=lhs, rhs=mid)
        report.add("rate-%d dominates I(X;Z|T)" % i, lhs >= low - tol, lhs=lhs, rhs=low)
    pair = (cond_entropy(pmf, ["W1"], ["T"]).bits + cond_entropy(pmf, ["W2"], ["T"]).bits)
    ident = (cond_mutual_info(pmf, ["W1", "Z1"], ["W2", "Z2"], ["T"]).bits
             + cond_entropy(pmf, ["W1", "W2"], ["T"]).bits)
    report.add("sum decomposition identity", abs(pair - ident) <= tol, lhs=pair, rhs=ident)
    lhs = pair - cond_entropy(pmf, ["W1", "W2"], ["X", "T"]).bits
    rhs = (cond_mutual_info(pmf, ["Z1"], ["Z2"], ["T"]).bits
           + cond_mutual_info(pmf, ["X"], ["Z1", "Z2", "Z12"], ["T"]).bits)
    report.add("sum-rate dominates classical form", lhs >= rhs - tol, lhs=lhs, rhs=rhs)
    return report


def _zhang_berger(pmf: JointPmf, tol: float) -> Report:
    """Substituting W <-> W' preserves the bound values in both directions."""
    report = Report("zhang-berger")
    # forward direction: identities on (X, W0, W1, W2); these hold for any
    # joint law, no Markov precondition needed
    for i in (1, 2):
        lhs = (entropy(pmf, ["W0", "W%d" % i]).bits
               - cond_entropy(pmf, ["W0", "W%d" % i], ["X"]).bits)
        rhs = mutual_info(pmf, ["X"], ["W0", "W%d" % i]).bits
        report.add("forward rate-%d" % i, abs(lhs - rhs) <= tol, lhs=lhs, rhs=rhs)
    lhs = (entropy(pmf, ["W0", "W1"]).bits + entropy(pmf, ["W0", "W2"]).bits
           - cond_entropy(pmf, ["W0"], ["X"]).bits
           - cond_entropy(pmf, ["W0", "W1", "W2"], ["X"]).bits)
    rhs = (cond_mutual_info(pmf, ["X"], ["W1", "W2"], ["W0"]).bits
           + 2 * mutual_info(pmf, ["X"], ["W0"]).bits
           + cond_mutual_info(pmf, ["W1"], ["W2"], ["W0"]).bits)
    report.add("forward sum-rate", abs(lhs - rhs) <= tol, lhs=lhs, rhs=rhs)

    # reverse direction: W0 := W'0, W_i := (W'0, W'_i) as composite variables
    merged = merge_vars(merge_vars(pmf, "V1", ("W0", "W1"), keep=True),
                        "V2", ("W0", "W2"), keep=True)
    for i in (1, 2):
        lhs = mutual_info(pmf, ["X"], ["W0", "W%d" % i]).bits
        rhs = (entropy(merged, ["V%d" % i]).bits
               - cond_entropy(merged, ["V%d" % i], ["X"]).bits)
        report.add("reverse rate-%d" % i, abs(lhs - rhs) <= tol, lhs=lhs, rhs=rhs)
    # feasibility of dropping the common codeword: H(W0|W_i) - H(W0|X) <= 0
    for i in (1, 2):
        slack = (cond_entropy(merged, ["W0"], ["V%d" % i]).bits
                 - cond_entropy(merged, ["W0"], ["X"]).bits)
        report.add("reverse zero-rate condition (branch %d)" % i, slack <= tol,
                   lhs=slack, rhs=0.0)
    return report


def _heegard_berger(pmf: JointPmf, tol: float) -> Report:
    """Reconstruction with a conditionally independent pair preserves margins.

    The input law must factorize as source * channel * per-decoder
    reproducers; the rebuilt law forces W1 <-> (W0,X) <-> W2 and must agree
    with the input on every (W0, W_j, X, Y_j, Z_j) margin, exactly in
    rational mode.
    """
    report = Report("heegard-berger")
    for j, jc in ((1, 2), (2, 1)):
        _require_markov(
            pmf, ["W%d" % jc, "X", "Y%d" % jc, "Z%d" % jc],
            ["W0", "W%d" % j, "Y%d" % j], ["Z%d" % j], 1e-9,
            "(W%d,X,Y%d,Z%d) <-> (W0,W%d,Y%d) <-> Z%d" % (jc, jc, jc, j, j, j))
    _require_markov(pmf, ["Y1", "Y2"], ["X"], ["W0", "W1", "W2"], 1e-9,
                    "(Y1,Y2) <-> X <-> (W0,W1,W2)")

    rebuilt = reconstruct_heegard_berger(pmf)
    exact = pmf.mode == RATIONAL
    ci = check_markov(rebuilt, ["W1"], ["W0", "X"], ["W2"],
                      0.0 if exact else 1e-9)
    report.add("conditional independence W1 <-> (W0,X) <-> W2", ci)
    for j in (1, 2):
        margin = ["W0", "W%d" % j, "X", "Y%d" % j, "Z%d" % j]
        a = marginalize(pmf, margin)
        b = marginalize(rebuilt, margin)
        if exact:
            same = a == b
        else:
            keys = set(dict(a.items())) | set(dict(b.items()))
            same = all(abs(a.prob(k) - b.prob(k)) <= tol for k in keys)
        report.add("margin (W0,W%d,X,Y%d,Z%d) preserved" % (j, j, j), same)
    if not exact:
        for j, jc in ((1, 2), (2, 1)):
            classical = (
                cond_mutual_info(pmf, ["X"], ["W0"], ["Y%d" % j]).bits
                + cond_mutual_info(pmf, ["X"], ["W%d" % j], ["W0", "Y%d" % j]).bits
                + cond_mutual_info(pmf, ["X"], ["W%d" % jc], ["W0", "Y%d" % jc]).bits)
            rebuilt_form = (
                cond_entropy(rebuilt, ["W0", "W%d" % j], ["Y%d" % j]).bits
                + cond_entropy(rebuilt, ["W%d" % jc], ["W0", "Y%d" % jc]).bits
                - cond_entropy(rebuilt, ["W0", "W1", "W2"], ["X"]).bits)
            report.add("decoder-%d bound expressions agree" % j,
                       abs(classical - rebuilt_form) <= tol,
                       lhs=classical, rhs=rebuilt_form)
    return report


def reconstruct_heegard_berger(pmf: JointPmf) -> JointPmf:
    """Rebuild the law with W1, W2 drawn conditionally independently given
    (W0, X), keeping every other conditional; pairwise margins survive."""
    base = marginalize(pmf, ["X", "Y1", "Y2"])
    chain = apply_conditional(base, _conditional_from(pmf, ["W0"], ["X"]))
    chain = apply_conditional(chain, _conditional_from(pmf, ["W1"], ["W0", "X"]))
    chain = apply_conditional(chain, _conditional_from(pmf, ["W2"], ["W0", "X"]))
    for j in (1, 2):
        chain = apply_conditional(
            chain, _conditional_from(pmf, ["Z%d" % j], ["W0", "W%d" % j, "Y%d" % j]))
    return chain


def _conditional_from(pmf: JointPmf, out: list, given: list) -> ConditionalPmf:
    """Extract mu(out | given) as a channel; unsupported rows fall back to a
    point mass on the first symbol (they carry zero probability downstream)."""
    joint = marginalize(pmf, given + out)
    out_vars = [(n, pmf.alphabet(n)) for n in out]
    in_vars = [(n, pmf.alphabet(n)) for n in given]
    one = Fraction(1) if pmf.mode == RATIONAL else 1.0
    rows = {}
    for key in itertools.product(*(a.symbols for _, a in in_vars)):
        try:
            cond = condition(joint, out, dict(zip(given, key)))
            rows[key] = {out_key: p for out_key, p in cond.items()}
        except Exception:
            first = tuple(a.symbols[0] for _, a in out_vars)
            rows[key] = {first: one}
    return ConditionalPmf(in_vars, out_vars, rows, mode=pmf.mode)


# -- random law generators for the sweeps ---------------------------------------------


def _random_channel(rng, in_vars, out_vars, mode=DOUBLE, denominator=720) -> ConditionalPmf:
    rows = {}
    out_keys = list(itertools.product(*(a.symbols for _, a in out_vars)))
    for key in itertools.product(*(a.symbols for _, a in in_vars)):
        if mode == DOUBLE:
            w = rng.uniform(0.05, 1.0, size=len(out_keys))
            w = w / w.sum()
            rows[key] = dict(zip(out_keys, w))
        else:
            weights = [int(v) for v in rng.integers(1, denominator, size=len(out_keys))]
            total = sum(weights)
            rows[key] = {k: Fraction(v, total) for k, v in zip(out_keys, weights)}
    return ConditionalPmf(in_vars, out_vars, rows, mode=mode)


def random_example_pmf(example: str, rng: np.random.Generator,
                       mode: str = DOUBLE) -> JointPmf:
    """A random member of the example's Markov class (alphabets <= 3)."""
    b2 = Alphabet((0, 1))
    b3 = Alphabet((0, 1, 2))
    if example == "berger-tung":
        t = random_pmf(rng, [("T", b2)], mode=mode)
        x = random_pmf(rng, [("X1", b3), ("X2", b2)], mode=mode)
        base = _independent_product(t, x)
        base = apply_conditional(base, _random_channel(
            rng, [("X1", b3), ("T", b2)], [("W1", b2)], mode))
        return apply_conditional(base, _random_channel(
            rng, [("X2", b2), ("T", b2)], [("W2", b3)], mode))
    if example == "el-gamal-cover":
        t = random_pmf(rng, [("T", b2)], mode=mode)
        x = random_pmf(rng, [("X", b3)], mode=mode)
        base = _independent_product(t, x)
        base = apply_conditional(base, _random_channel(
            rng, [("X", b3), ("T", b2)], [("W1", b2), ("W2", b2)], mode))
        base = apply_conditional(base, _random_channel(
            rng, [("W1", b2), ("T", b2)], [("Z1", b2)], mode))
        base = apply_conditional(base, _random_channel(
            rng, [("W2", b2), ("T", b2)], [("Z2", b2)], mode))
        return apply_conditional(base, _random_channel(
            rng, [("W1", b2), ("W2", b2), ("T", b2)], [("Z12", b2)], mode))
    if example == "zhang-berger":
        x = random_pmf(rng, [("X", b3)], mode=mode)
        return apply_conditional(x, _random_channel(
            rng, [("X", b3)], [("W0", b2), ("W1", b2), ("W2", b2)], mode))
    if example == "heegard-berger":
        x = random_pmf(rng, [("X", b2)], mode=mode)
        base = apply_conditional(x, _random_channel(
            rng, [("X", b2)], [("Y1", b2), ("Y2", b2)], mode))
        base = apply_conditional(base, _random_channel(
            rng, [("X", b2)], [("W0", b2), ("W1", b2), ("W2", b2)], mode))
        base = apply_conditional(base, _random_channel(
            rng, [("W0", b2), ("W1", b2), ("Y1", b2)], [("Z1", b2)], mode))
        return apply_conditional(base, _random_channel(
            rng, [("W0", b2), ("W2", b2), ("Y2", b2)], [("Z2", b2)], mode))
    raise ConfigurationError("unknown example %r" % (example,))


def _independent_product(a: JointPmf, b: JointPmf) -> JointPmf:
    a.require_same_mode(b)
    table = {}
    for ka, pa in a.items():
        for kb, pb in b.items():
            table[ka + kb] = pa * pb
    return JointPmf(list(a.variables) + list(b.variables), table,
                    mode=a.mode, _validated=True)


def sweep_examples(seeds: int = 100, tol: float = 1e-9, seed0: int = 0) -> Report:
    """Identity sweep across all four examples with fresh random laws."""
    report = Report("example-identities")
    for idx, example in enumerate(EXAMPLES):
        failures = 0
        for s in range(seeds):
            rng = np.random.default_rng((seed0, idx, s))
            mode = RATIONAL if example == "heegard-berger" else DOUBLE
            pmf = random_example_pmf(example, rng, mode=mode)
            sub = verify_example_identities(example, pmf, tol)
            if not sub.all_passed:
                failures += 1
        report.add("%s sweep (%d laws)" % (example, seeds), failures == 0,
                   lhs=failures, rhs=0)
    return report
