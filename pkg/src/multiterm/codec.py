"""Constrained-random-number-generator source code: encoders, decoders,
exact error oracles, and Monte Carlo simulation.

The encoder of a sharing cell draws the cell's auxiliary blocks from the
channel conditional restricted to the hash constraints f_i(w_i) = c_i and
renormalized; the decoder draws candidate blocks from the model posterior
restricted to all (f, g) constraints.  Everything is enumerated explicitly
(alias tables over the restricted support), so exactness is provable at desk
scale; there is no MCMC.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import (
    BudgetExceededError,
    ConfigurationError,
    DecoderAbort,
    EncoderAbort,
    EmptySupportError,
)
from .hashing import HashEnsemble, HashFunction
from .network import (
    ConditionalPmf,
    NetworkConfig,
    Reproducer,
    build_joint,
    w_name,
)
from .probability import RATIONAL, JointPmf, marginalize

_EXACT_BUDGET = 1 << 24


# -- generic constrained-random draws -----------------------------------------------


def crng_law(base, constraint):
    """Restrict an enumerated distribution to a predicate and renormalize.

    `base` is an iterable of (item, weight); returns the exact conditional
    law as a list of (item, probability).  Raises
    :class:`EmptySupportError` when the constrained mass is zero.
    """
    kept = [(item, p) for item, p in base if p > 0 and constraint(item)]
    total = sum(p for _, p in kept)
    if not kept or total == 0:
        raise EmptySupportError("constraint set has zero probability mass")
    return [(item, p / total) for item, p in kept]


def sample_from_law(law, seed):
    rng = np.random.default_rng(seed)
    probs = np.array([float(p) for _, p in law], dtype=float)
    probs = probs / probs.sum()
    idx = int(rng.choice(len(law), p=probs))
    return law[idx][0]


def crng_sample(base, constraint, seed):
    """One draw from the constrained, renormalized distribution."""
    return sample_from_law(crng_law(base, constraint), seed)


# -- code instances ------------------------------------------------------------------


def realized_size(rate: float, n: int) -> int:
    """Image size realizing a target rate at block length n: round(2^(rate*n)).

    Exact powers of two are hit exactly; other targets use the nearest
    integer (at least 1), so the realized rate log2(size)/n can deviate from
    the target at small n.
    """
    return max(1, round(2 ** (rate * n)))


@dataclass
class CodeInstance:
    """One concrete code: block length, hash functions, constraint vectors.

    `f[i]`/`g[i]` map encoded W_i-blocks (base-|W_i| integers) to the shared
    constraint alphabet C_i and the codeword alphabet M_i; `c[i]` fixes the
    constraint value shared by encoder i and every decoder seeing codeword i.
    """

    n: int
    config: NetworkConfig
    source: JointPmf
    channels: Mapping[tuple, ConditionalPmf]
    reproducers: Mapping[object, Reproducer]
    f: Mapping[object, HashFunction]
    g: Mapping[object, HashFunction]
    c: Mapping[object, object]
    f_ens: Mapping[object, HashEnsemble] = field(default_factory=dict)
    g_ens: Mapping[object, HashEnsemble] = field(default_factory=dict)

    def __post_init__(self):
        self._w_alph = {}
        for cell in self.config.sharing:
            ch = self.channels[tuple(cell)]
            for name, alph in ch.outputs:
                self._w_alph[name] = alph
        for i in self.config.encoders:
            dom = self._w_alph[w_name(i)].size ** self.n
            for fam, label in ((self.f, "f"), (self.g, "g")):
                if i not in fam:
                    raise ConfigurationError("missing %s function for encoder %r" % (label, i))
                if fam[i].domain_size != dom:
                    raise ConfigurationError(
                        "%s_%r domain %d != |W|^n = %d" % (label, i, fam[i].domain_size, dom))
            if i not in self.c:
                raise ConfigurationError("missing constraint value for encoder %r" % (i,))
            c = self.c[i]
            if self.f[i].kind != "compose" and not (
                    isinstance(c, (int, np.integer)) and 0 <= c < self.f[i].image_size):
                raise ConfigurationError(
                    "constraint value %r for encoder %r outside the f image" % (c, i))
        self._joint = build_joint(self.config, self.source, self.channels, None)
        self._decoder_cache: dict = {}
        self._encoder_cache: dict = {}

    # -- rates ------------------------------------------------------------------------

    def aux_rate(self, i) -> float:
        return math.log2(self.f[i].image_size) / self.n

    def rate(self, i) -> float:
        return math.log2(self.g[i].image_size) / self.n

    # -- block encoding helpers ---------------------------------------------------------

    def w_alphabet(self, i):
        return self._w_alph[w_name(i)]

    def block_to_int(self, i, block) -> int:
        alph = self._w_alph[w_name(i)]
        value = 0
        for sym in block:
            value = value * alph.size + alph.index(sym)
        return value

    def model_joint(self) -> JointPmf:
        return self._joint

    # -- encoder -------------------------------------------------------------------------

    def cell_base_law(self, cell, x_block):
        """Unconstrained law of the cell's W-blocks given its source block.

        Items are dicts encoder->block; probabilities multiply per letter.
        """
        cell = tuple(cell)
        ch = self.channels[cell]
        per_letter = [ch.row((x,)) for x in x_block]
        names = [n for n, _ in ch.outputs]
        items = []
        for combo in itertools.product(*(row.items() for row in per_letter)):
            p = None
            for _, pl in combo:
                p = pl if p is None else p * pl
            letters = [out for out, _ in combo]
            blocks = {}
            for pos, name in enumerate(names):
                enc = cell[pos]
                blocks[enc] = tuple(letter[pos] for letter in letters)
            items.append((blocks, p))
        return items

    def cell_constrained_law(self, cell, x_block):
        """Encoder CRNG law: cell base law restricted to f_i(w_i) = c_i."""
        cell = tuple(cell)
        key = (cell, tuple(x_block))
        if key not in self._encoder_cache:
            base = self.cell_base_law(cell, x_block)
            pred = lambda blocks: all(
                self.f[i](self.block_to_int(i, blocks[i])) == self.c[i] for i in cell)
            try:
                law = crng_law(base, pred)
            except EmptySupportError:
                law = None
            self._encoder_cache[key] = law
        law = self._encoder_cache[key]
        if law is None:
            raise EncoderAbort("cell %r: no admissible block for its constraints" % (cell,))
        return law

    def encode(self, cell, x_block, seed):
        """Joint draw for one sharing cell: (blocks by encoder, codewords)."""
        blocks = sample_from_law(self.cell_constrained_law(cell, x_block), seed)
        m = {i: self.g[i](self.block_to_int(i, blocks[i])) for i in cell}
        return blocks, m

    # -- decoder -------------------------------------------------------------------------

    def _posterior_letter(self, j):
        """Single-letter model conditional of W_{I_j} given the side info."""
        ij = tuple(self.config.codewords_to[j])
        names = [w_name(i) for i in ij]
        y = self.config.side_info.get(j)
        keep = names + ([y] if y else [])
        return ij, y, marginalize(self._joint, keep)

    def decoder_class_law(self, j, m: Mapping, y_block):
        """Posterior over W_{I_j}-blocks restricted to the (f, g) classes.

        The model posterior factorizes across letters (everything is
        memoryless), so candidates come from the product of per-letter
        conditional supports given the observed side-information letters.
        """
        ij = tuple(self.config.codewords_to[j])
        key = (j, tuple(m[i] for i in ij), tuple(y_block) if y_block is not None else None)
        if key not in self._decoder_cache:
            ij, y, letter = self._posterior_letter(j)
            if y is not None:
                rows = {}
                for k, p in letter.items():
                    if p > 0:
                        rows.setdefault(k[-1], []).append((k[:-1], p))
                per_letter = [rows.get(yv, []) for yv in y_block]
            else:
                row = [(k, p) for k, p in letter.items() if p > 0]
                per_letter = [row] * self.n
            items = []
            if all(per_letter):
                for combo in itertools.product(*per_letter):
                    p = None
                    for _, pl in combo:
                        p = pl if p is None else p * pl
                    blocks = {}
                    for pos, i in enumerate(ij):
                        blocks[i] = tuple(letter_key[pos] for letter_key, _ in combo)
                    items.append((blocks, p))
            pred = lambda blocks: all(
                self.f[i](self.block_to_int(i, blocks[i])) == self.c[i]
                and self.g[i](self.block_to_int(i, blocks[i])) == m[i]
                for i in ij)
            try:
                law = crng_law(items, pred)
            except EmptySupportError:
                law = None
            self._decoder_cache[key] = law
        law = self._decoder_cache[key]
        if law is None:
            raise DecoderAbort("decoder %r: empty posterior class" % (j,))
        return law

    def reproduce(self, j, w_blocks: Mapping, y_block):
        """Apply the decoder's reproducers per letter."""
        out = {}
        for k in self.config.reproductions.get(j, ()):
            rep = self.reproducers[k]
            z = []
            for l in range(self.n):
                args = []
                for a in rep.args:
                    if a.startswith("W"):
                        enc = _encoder_of_wvar(a, self.config)
                        args.append(w_blocks[enc][l])
                    else:
                        args.append(y_block[l])
                z.append(rep(tuple(args)))
            out[k] = tuple(z)
        return out

    def decode(self, j, m: Mapping, y_block, seed, rule: str = "crng"):
        """Draw (or select) the decoder's block estimate and reproductions."""
        law = self.decoder_class_law(j, m, y_block)
        if rule == "crng":
            w_hat = sample_from_law(law, seed)
        elif rule == "map":
            w_hat = map_estimate(law, self.config.codewords_to[j])
        else:
            raise ConfigurationError("unknown decode rule %r" % (rule,))
        return w_hat, self.reproduce(j, w_hat, y_block)

    def decode_map(self, j, m: Mapping, y_block):
        return self.decode(j, m, y_block, seed=None, rule="map")


def _encoder_of_wvar(var: str, config: NetworkConfig):
    for i in config.encoders:
        if w_name(i) == var:
            return i
    raise ConfigurationError("unknown codeword variable %r" % (var,))


def map_estimate(law, ij):
    """Deterministic argmax of the restricted posterior.

    Ties break toward the lexicographically smallest block tuple (encoder
    order, then letter order).
    """
    ij = tuple(ij)

    def lex_key(blocks):
        return tuple(tuple(blocks[i]) for i in ij)

    best = None
    for blocks, p in sorted(law, key=lambda item: lex_key(item[0])):
        if best is None or p > best[1]:
            best = (blocks, p)
    return best[0]


# -- exact error oracle ---------------------------------------------------------------


@dataclass
class ExactError:
    mismatch: Fraction
    exceed: dict
    encoder_abort: Fraction

    def as_floats(self) -> dict:
        return {
            "mismatch": float(self.mismatch),
            "encoder_abort": float(self.encoder_abort),
            **{"exceed_%s" % k: float(v) for k, v in self.exceed.items()},
        }


def _source_blocks(source: JointPmf, n: int):
    support = [(k, p) for k, p in source.items() if p > 0]
    for combo in itertools.product(support, repeat=n):
        p = None
        for _, pl in combo:
            p = pl if p is None else p * pl
        yield tuple(k for k, _ in combo), p


def _transpose(source: JointPmf, letters) -> dict:
    return {name: tuple(letter[pos] for letter in letters)
            for pos, name in enumerate(source.names)}


def exact_error(code: CodeInstance, delta: float, D: Mapping,
                rule: str = "crng") -> ExactError:
    """Exact error probabilities by total enumeration.

    Averages over the source blocks, every encoder draw, and every decoder
    draw; encoder aborts count as errors for the mismatch and for every
    distortion exceedance.  Requires rational-mode inputs.
    """
    if code.source.mode != RATIONAL:
        raise ConfigurationError("exact_error requires rational-mode source/channels")
    if _lossless_fast_path_applies(code):
        return _exact_error_lossless(code, delta, D, rule)
    _check_budget(code)
    cfg = code.config
    mismatch = Fraction(0)
    exceed = {k: Fraction(0) for k in cfg.reproduction_ids}
    abort_mass = Fraction(0)
    for letters, p_src in _source_blocks(code.source, code.n):
        blocks = _transpose(code.source, letters)
        cell_laws = []
        try:
            for cell in cfg.sharing:
                ch = code.channels[tuple(cell)]
                x_var = ch.inputs[0][0]
                cell_laws.append(code.cell_constrained_law(cell, blocks[x_var]))
        except EncoderAbort:
            abort_mass += p_src
            continue
        for combo in itertools.product(*cell_laws):
            w_blocks = {}
            p_w = Fraction(1)
            for cell_blocks, p in combo:
                w_blocks.update(cell_blocks)
                p_w *= p
            weight = p_src * p_w
            if weight == 0:
                continue
            m = {i: code.g[i](code.block_to_int(i, w_blocks[i])) for i in cfg.encoders}
            p_all_match = Fraction(1)
            for j in cfg.decoders:
                y = cfg.side_info.get(j)
                y_block = blocks[y] if y else None
                law = code.decoder_class_law(j, m, y_block)
                p_match, exceed_j = _decoder_contributions(
                    code, j, law, w_blocks, blocks, delta, D, rule)
                p_all_match *= p_match
                for k, v in exceed_j.items():
                    exceed[k] += weight * v
            mismatch += weight * (1 - p_all_match)
    mismatch += abort_mass
    for k in exceed:
        exceed[k] += abort_mass
    return ExactError(mismatch, exceed, abort_mass)


def _decoder_contributions(code, j, law, w_blocks, blocks, delta, D, rule):
    cfg = code.config
    ij = tuple(cfg.codewords_to[j])
    y = cfg.side_info.get(j)
    y_block = blocks[y] if y else None
    truth = {i: w_blocks[i] for i in ij}

    if rule == "map":
        est = map_estimate(law, ij)
        p_match = Fraction(1 if est == truth else 0)
        z = code.reproduce(j, est, y_block)
        exceed_j = {}
        for k in cfg.reproductions.get(j, ()):
            d = cfg.distortions[k].block(blocks, blocks, z[k])
            exceed_j[k] = Fraction(1 if d > float(D[k]) + delta else 0)
        return p_match, exceed_j

    p_match = Fraction(0)
    exceed_j = {k: Fraction(0) for k in cfg.reproductions.get(j, ())}
    for cand, p in law:
        if cand == truth:
            p_match += p
        z = code.reproduce(j, cand, y_block)
        for k in cfg.reproductions.get(j, ()):
            d = cfg.distortions[k].block(blocks, blocks, z[k])
            if d > float(D[k]) + delta:
                exceed_j[k] += p
    return p_match, exceed_j


def _check_budget(code: CodeInstance):
    src = len([1 for _, p in code.source.items() if p > 0])
    states = src ** code.n
    for cell in code.config.sharing:
        ch = code.channels[tuple(cell)]
        out = 1
        for _, a in ch.outputs:
            out *= a.size
        states *= out ** code.n
    if states > _EXACT_BUDGET:
        raise BudgetExceededError(
            "exact enumeration needs %d joint states (budget %d)" % (states, _EXACT_BUDGET))


# -- lossless fast path ------------------------------------------------------------------


def _lossless_fast_path_applies(code: CodeInstance) -> bool:
    """Syndrome-style codes: injectively deterministic channels, trivial f,
    identity reproducers and block-mismatch distortions."""
    cfg = code.config
    for cell in cfg.sharing:
        ch = code.channels[tuple(cell)]
        outs = []
        for row in ch.rows.values():
            support = [o for o, p in row.items() if p > 0]
            if len(support) != 1:
                return False
            outs.append(support[0])
        if len(set(outs)) != len(outs):
            return False
    if any(code.f[i].image_size != 1 for i in cfg.encoders):
        return False
    for j in cfg.decoders:
        for k in cfg.reproductions.get(j, ()):
            rep = code.reproducers[k]
            if len(rep.args) != 1 or not rep.args[0].startswith("W"):
                return False
            if any(rep((s,)) != s for s in rep.out_alphabet.symbols):
                return False
            if cfg.distortions[k].kind != "block":
                return False
    return True


def _exact_error_lossless(code: CodeInstance, delta, D, rule) -> ExactError:
    """Closed-form accounting over syndrome classes for lossless codes.

    One pass groups source blocks by decoder class and accumulates per-class
    mass sums; the error terms then need only O(1) lookups per block.
    """
    cfg = code.config
    n = code.n
    if len(cfg.decoders) != 1:
        raise BudgetExceededError("fast path covers the single-decoder case")
    j = cfg.decoders[0]
    ij = tuple(cfg.codewords_to[j])
    y_var = cfg.side_info.get(j)

    det_map = {}
    for cell in cfg.sharing:
        ch = code.channels[tuple(cell)]
        x_var = ch.inputs[0][0]
        for key, row in ch.rows.items():
            out = next(o for o, p in row.items() if p > 0)
            det_map[(tuple(cell), key)] = out

    src_support = [(k, p) for k, p in code.source.items() if p > 0]
    class_total: dict = {}
    class_sq: dict = {}
    class_match: dict = {}
    entries = []
    for letters, p_src in _source_blocks(code.source, n):
        blocks = _transpose(code.source, letters)
        w_blocks = {}
        for cell in cfg.sharing:
            ch = code.channels[tuple(cell)]
            x_var = ch.inputs[0][0]
            outs = [det_map[(tuple(cell), (x,))] for x in blocks[x_var]]
            for pos, i in enumerate(cell):
                w_blocks[i] = tuple(out[pos] for out in outs)
        m_key = tuple(code.g[i](code.block_to_int(i, w_blocks[i])) for i in ij)
        y_block = blocks[y_var] if y_var else None
        cls = (m_key, y_block)
        class_total[cls] = class_total.get(cls, Fraction(0)) + p_src
        class_sq[cls] = class_sq.get(cls, Fraction(0)) + p_src * p_src
        for k in cfg.reproductions.get(j, ()):
            rep = code.reproducers[k]
            enc = _encoder_of_wvar(rep.args[0], cfg)
            key = (cls, k, w_blocks[enc])
            class_match[key] = class_match.get(key, Fraction(0)) + p_src
        entries.append((p_src, w_blocks, cls))

    # posterior of the truth within its class equals p_src / class mass
    # because the deterministic channels make W a relabeling of the source
    mismatch = Fraction(0)
    exceed = {k: Fraction(0) for k in cfg.reproduction_ids}
    if rule == "map":
        best: dict = {}
        for p_src, w_blocks, cls in entries:
            key_blocks = tuple(w_blocks[i] for i in ij)
            cur = best.get(cls)
            if cur is None or p_src > cur[0] or (p_src == cur[0] and key_blocks < cur[1]):
                best[cls] = (p_src, key_blocks)
        for p_src, w_blocks, cls in entries:
            key_blocks = tuple(w_blocks[i] for i in ij)
            if best[cls][1] != key_blocks:
                mismatch += p_src
                for k in cfg.reproductions.get(j, ()):
                    rep = code.reproducers[k]
                    enc = _encoder_of_wvar(rep.args[0], cfg)
                    pos = ij.index(enc)
                    if best[cls][1][pos] != w_blocks[enc]:
                        exceed[k] += p_src
    else:
        for p_src, w_blocks, cls in entries:
            total = class_total[cls]
            mismatch += p_src * (1 - p_src / total)
            for k in cfg.reproductions.get(j, ()):
                rep = code.reproducers[k]
                enc = _encoder_of_wvar(rep.args[0], cfg)
                agree = class_match[(cls, k, w_blocks[enc])]
                exceed[k] += p_src * (1 - agree / total)
    return ExactError(mismatch, exceed, Fraction(0))


# -- Monte Carlo simulation ----------------------------------------------------------------


@dataclass
class SimReport:
    trials: int
    mismatch_count: int
    exceed_counts: dict
    encoder_abort_count: int
    decoder_abort_count: int
    distortion_sums: dict
    seed: object

    @property
    def mismatch_freq(self) -> float:
        return self.mismatch_count / self.trials

    def exceed_freq(self, k) -> float:
        return self.exceed_counts[k] / self.trials

    def mean_distortion(self, k) -> float:
        return self.distortion_sums[k] / self.trials

    def ci(self, count: int, z: float = 3.0) -> tuple:
        """Normal-approximation z-sigma interval for a count/trials frequency."""
        p = count / self.trials
        half = z * math.sqrt(max(p * (1 - p), 1e-12) / self.trials)
        return (max(0.0, p - half), min(1.0, p + half))


def _trial_seed(seed, trial: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((int(seed), int(trial)))


def simulate(code: CodeInstance, delta: float, D: Mapping, trials: int,
             seed: int, rule: str = "crng", jobs: int = 1) -> SimReport:
    """Monte Carlo estimate of the exact-oracle quantities.

    Per-trial randomness derives from (seed, trial index), so the report is
    deterministic in `seed` and any trial schedule (the `jobs` hint only
    chunks the loop; the reduction is order-independent).
    """
    counters = dict(mismatch=0, enc_abort=0, dec_abort=0)
    exceed = {k: 0 for k in code.config.reproduction_ids}
    dist_sums = {k: 0.0 for k in code.config.reproduction_ids}

    for trial in range(trials):
        _run_trial(code, delta, D, seed, trial, rule, counters, exceed, dist_sums)
    return SimReport(
        trials=trials,
        mismatch_count=counters["mismatch"],
        exceed_counts=exceed,
        encoder_abort_count=counters["enc_abort"],
        decoder_abort_count=counters["dec_abort"],
        distortion_sums=dist_sums,
        seed=seed,
    )


def _run_trial(code, delta, D, seed, trial, rule, counters, exceed, dist_sums):
    cfg = code.config
    root = _trial_seed(seed, trial)
    src_seed, enc_seed, dec_seed = root.spawn(3)
    rng = np.random.default_rng(src_seed)
    support = [k for k, p in code.source.items() if p > 0]
    probs = np.array([float(p) for k, p in code.source.items() if p > 0])
    probs = probs / probs.sum()
    idx = rng.choice(len(support), size=code.n, p=probs)
    letters = tuple(support[i] for i in idx)
    blocks = _transpose(code.source, letters)

    w_blocks = {}
    m = {}
    cell_seeds = enc_seed.spawn(len(cfg.sharing))
    try:
        for pos, cell in enumerate(cfg.sharing):
            ch = code.channels[tuple(cell)]
            x_var = ch.inputs[0][0]
            cell_blocks, cell_m = code.encode(cell, blocks[x_var], cell_seeds[pos])
            w_blocks.update(cell_blocks)
            m.update(cell_m)
    except EncoderAbort:
        counters["enc_abort"] += 1
        counters["mismatch"] += 1
        for k in exceed:
            exceed[k] += 1
            dist_sums[k] += cfg.distortions[k].bound
        return

    mismatched = False
    decoder_seeds = dec_seed.spawn(len(cfg.decoders))
    for pos, j in enumerate(cfg.decoders):
        y = cfg.side_info.get(j)
        y_block = blocks[y] if y else None
        try:
            w_hat, z = code.decode(j, m, y_block, decoder_seeds[pos], rule=rule)
        except DecoderAbort:
            counters["dec_abort"] += 1
            mismatched = True
            for k in cfg.reproductions.get(j, ()):
                exceed[k] += 1
                dist_sums[k] += cfg.distortions[k].bound
            continue
        if any(w_hat[i] != w_blocks[i] for i in cfg.codewords_to[j]):
            mismatched = True
        for k in cfg.reproductions.get(j, ()):
            d = cfg.distortions[k].block(blocks, blocks, z[k])
            dist_sums[k] += d
            if d > float(D[k]) + delta:
                exceed[k] += 1
    if mismatched:
        counters["mismatch"] += 1
