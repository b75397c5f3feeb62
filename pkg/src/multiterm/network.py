"""Coding topology: encoders, sharing cells, decoders, reproductions.

The topology mirrors the unified multi-terminal setting: encoders indexed by
``I`` are grouped into sharing cells (every encoder in one cell observes the
same source variable), each decoder ``j`` receives the codewords of the subset
``I_j`` plus its own side information, and reproduction indices ``K`` are
partitioned across decoders.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .errors import ConfigurationError
from .probability import RATIONAL, Alphabet, JointPmf


def w_name(i) -> str:
    return "W%s" % (i,)


def z_name(k) -> str:
    return "Z%s" % (k,)


class ConditionalPmf:
    """Conditional distribution of output variables given input variables.

    `rows` maps every input symbol tuple to a pmf over output symbol tuples;
    each row must have total mass one (exactly in rational mode).
    """

    def __init__(self, inputs, outputs, rows, mode=RATIONAL):
        self.inputs = tuple((n, a) for n, a in inputs)
        self.outputs = tuple((n, a) for n, a in outputs)
        self.mode = mode
        self.rows = {}
        in_keys = set(itertools.product(*(a.symbols for _, a in self.inputs)))
        for key, row in rows.items():
            key = tuple(key)
            if key not in in_keys:
                raise ConfigurationError("channel row key %r outside input alphabet" % (key,))
            row = {tuple(o): (Fraction(p) if mode == RATIONAL else float(p))
                   for o, p in row.items()}
            total = sum(row.values())
            if mode == RATIONAL and total != 1:
                raise ConfigurationError("channel row %r has mass %s" % (key, total))
            if mode != RATIONAL and abs(total - 1.0) > 1e-12:
                raise ConfigurationError("channel row %r has mass %r" % (key, total))
            for out in row:
                for sym, (name, alph) in zip(out, self.outputs):
                    if sym not in alph.symbols:
                        raise ConfigurationError(
                            "symbol %r outside alphabet of output %r" % (sym, name))
            self.rows[key] = row
        missing = in_keys - set(self.rows)
        if missing:
            raise ConfigurationError("channel is missing rows for %r" % (sorted(missing, key=repr),))

    def row(self, in_key: tuple) -> dict:
        return self.rows[tuple(in_key)]

    def prob(self, out_key: tuple, in_key: tuple):
        zero = Fraction(0) if self.mode == RATIONAL else 0.0
        return self.rows[tuple(in_key)].get(tuple(out_key), zero)

    def to_double(self) -> "ConditionalPmf":
        if self.mode != RATIONAL:
            return self
        rows = {k: {o: float(p) for o, p in row.items()} for k, row in self.rows.items()}
        return ConditionalPmf(self.inputs, self.outputs, rows, mode="double")


def identity_channel(in_name: str, out_name_: str, alphabet: Alphabet,
                     mode=RATIONAL) -> ConditionalPmf:
    one = Fraction(1) if mode == RATIONAL else 1.0
    rows = {(s,): {(s,): one} for s in alphabet.symbols}
    return ConditionalPmf([(in_name, alphabet)], [(out_name_, alphabet)], rows, mode=mode)


def bsc_channel(in_name: str, out_name_: str, p, mode=RATIONAL) -> ConditionalPmf:
    """Binary symmetric channel with crossover probability p."""
    p = Fraction(p) if mode == RATIONAL else float(p)
    one = Fraction(1) if mode == RATIONAL else 1.0
    b = Alphabet((0, 1))
    rows = {(x,): {(x,): one - p, (1 - x,): p} for x in (0, 1)}
    return ConditionalPmf([(in_name, b)], [(out_name_, b)], rows, mode=mode)


@dataclass(frozen=True)
class Reproducer:
    """Deterministic per-letter reproduction map z = zeta(w_{I_j}, y_j).

    `args` lists the variable names read (codeword variables of the decoder,
    optionally followed by its side-information variable); `table` maps the
    corresponding symbol tuples to output symbols.
    """

    args: tuple
    table: Mapping[tuple, object]
    out_alphabet: Alphabet

    def __call__(self, key: tuple):
        z = self.table[tuple(key)]
        if z not in self.out_alphabet.symbols:
            raise ConfigurationError("reproducer output %r outside alphabet" % (z,))
        return z


def identity_reproducer(var: str, alphabet: Alphabet) -> Reproducer:
    return Reproducer((var,), {(s,): s for s in alphabet.symbols}, alphabet)


def reproducer_from_fn(args, alphabets, fn, out_alphabet: Alphabet) -> Reproducer:
    table = {key: fn(*key) for key in itertools.product(*(a.symbols for a in alphabets))}
    return Reproducer(tuple(args), table, out_alphabet)


class DistortionMeasure:
    """Bounded distortion, either averaged per letter or evaluated per block.

    Per-letter measures receive single-letter assignments and are averaged
    over the block; block measures (used for lossless targets, where the
    distortion is the block-mismatch indicator) receive whole blocks.
    """

    def __init__(self, fn: Callable, bound: float, kind: str = "per-letter"):
        if kind not in ("per-letter", "block"):
            raise ConfigurationError("unknown distortion kind %r" % (kind,))
        if not bound < float("inf"):
            raise ConfigurationError("distortion bound must be finite")
        self.fn = fn
        self.bound = float(bound)
        self.kind = kind

    def letter(self, x: Mapping, y: Mapping, z) -> float:
        d = float(self.fn(x, y, z))
        if d < 0 or d > self.bound + 1e-12:
            raise ConfigurationError("distortion value %r outside [0, bound]" % (d,))
        return d

    def block(self, x_blocks: Mapping[str, tuple], y_blocks: Mapping[str, tuple],
              z_block: tuple) -> float:
        n = len(z_block)
        if self.kind == "block":
            return float(self.fn(x_blocks, y_blocks, z_block))
        total = 0.0
        for l in range(n):
            x = {name: blk[l] for name, blk in x_blocks.items()}
            y = {name: blk[l] for name, blk in y_blocks.items()}
            total += self.letter(x, y, z_block[l])
        return total / n


def hamming_distortion(source_var: str) -> DistortionMeasure:
    return DistortionMeasure(lambda x, y, z: 0.0 if x[source_var] == z else 1.0, 1.0)


def block_mismatch_distortion(source_var: str) -> DistortionMeasure:
    """Indicator of a block-level mismatch; realizes lossless targets."""
    return DistortionMeasure(
        lambda xb, yb, zb: 0.0 if tuple(xb[source_var]) == tuple(zb) else 1.0,
        1.0, kind="block")


@dataclass
class NetworkConfig:
    """Topology of the coding network.

    `sharing` partitions `encoders`; `codewords_to[j]` is the codeword set
    I_j of decoder j; `reproductions[j]` is the cell K_j of the reproduction
    partition; `side_info[j]` names the side-information variable of decoder
    j (None for the trivial constant).  `lossless` lists encoder indices whose
    sources must be reproduced exactly (the mixed lossless/lossy formulation).
    """

    encoders: tuple
    sharing: tuple
    decoders: tuple
    codewords_to: dict
    reproductions: dict
    side_info: dict
    distortions: dict = field(default_factory=dict)
    lossless: tuple = ()

    def __post_init__(self):
        self.encoders = tuple(self.encoders)
        self.sharing = tuple(tuple(cell) for cell in self.sharing)
        self.decoders = tuple(self.decoders)
        flat = [i for cell in self.sharing for i in cell]
        if sorted(flat) != sorted(self.encoders) or len(set(flat)) != len(flat):
            raise ConfigurationError("sharing cells must partition the encoder set")
        for j in self.decoders:
            if j not in self.codewords_to or not self.codewords_to[j]:
                raise ConfigurationError("decoder %r needs a nonempty codeword set" % (j,))
            if any(i not in self.encoders for i in self.codewords_to[j]):
                raise ConfigurationError("codeword set of decoder %r mentions unknown encoder" % (j,))
        seen_k: set = set()
        for j in self.decoders:
            for k in self.reproductions.get(j, ()):
                if k in seen_k:
                    raise ConfigurationError("reproduction %r assigned to two decoders" % (k,))
                seen_k.add(k)
        if any(i not in self.encoders for i in self.lossless):
            raise ConfigurationError("lossless set mentions unknown encoder")

    @property
    def reproduction_ids(self) -> tuple:
        return tuple(k for j in self.decoders for k in self.reproductions.get(j, ()))

    def decoder_of(self, k):
        for j in self.decoders:
            if k in self.reproductions.get(j, ()):
                return j
        raise ConfigurationError("reproduction %r not assigned to any decoder" % (k,))

    def cell_of(self, i):
        for cell in self.sharing:
            if i in cell:
                return cell
        raise ConfigurationError("encoder %r not in any sharing cell" % (i,))


def apply_conditional(pmf: JointPmf, cond: ConditionalPmf) -> JointPmf:
    """Joint of (pmf variables, cond outputs) under pmf * cond.

    The conditional's inputs must be variables of `pmf`; output names must be
    fresh.
    """
    if cond.mode != pmf.mode:
        raise ConfigurationError("conditional/pmf mode mismatch")
    positions = []
    for name, alph in cond.inputs:
        if name not in pmf.names:
            raise ConfigurationError("conditional input %r not a pmf variable" % (name,))
        if pmf.alphabet(name).symbols != alph.symbols:
            raise ConfigurationError("alphabet mismatch on %r" % (name,))
        positions.append(pmf.names.index(name))
    for name, _ in cond.outputs:
        if name in pmf.names:
            raise ConfigurationError("output variable %r already present" % (name,))
    table: dict = {}
    for key, p in pmf.items():
        in_key = tuple(key[pos] for pos in positions)
        for out_key, q in cond.row(in_key).items():
            table[key + out_key] = table.get(key + out_key, p * 0) + p * q
    variables = list(pmf.variables) + list(cond.outputs)
    return JointPmf(variables, table, mode=pmf.mode, _validated=True)


def build_joint(config: NetworkConfig, source: JointPmf,
                channels: Mapping[tuple, ConditionalPmf],
                reproducers: Optional[Mapping[object, Reproducer]] = None) -> JointPmf:
    """Assemble the single-letter joint law over (W_I, source vars, Z_K).

    The output factorizes as the product of the source law, one channel
    conditional per sharing cell, and point masses putting each Z_k equal to
    its reproducer applied to (W_{I_j}, Y_j).  Passing ``reproducers=None``
    omits the Z variables entirely (enough for entropy binding); a dict must
    cover every reproduction index.
    """
    skip_z = reproducers is None
    reproducers = dict(reproducers or {})
    cell_channels = {}
    for cell in config.sharing:
        key = tuple(cell)
        if key not in channels:
            raise ConfigurationError("missing channel for sharing cell %r" % (key,))
        ch = channels[key]
        if ch.mode != source.mode:
            raise ConfigurationError("channel/source mode mismatch for cell %r" % (key,))
        expected = tuple(w_name(i) for i in cell)
        if tuple(n for n, _ in ch.outputs) != expected:
            raise ConfigurationError(
                "channel for cell %r must output %r" % (key, expected))
        for name, _ in ch.inputs:
            if name not in source.names:
                raise ConfigurationError(
                    "channel input %r for cell %r not a source variable" % (name, key))
        for name, alph in ch.inputs:
            if source.alphabet(name).symbols != alph.symbols:
                raise ConfigurationError(
                    "alphabet mismatch on channel input %r" % (name,))
        cell_channels[key] = ch

    w_vars = []
    w_alph = {}
    for cell in config.sharing:
        for name, alph in cell_channels[tuple(cell)].outputs:
            w_alph[name] = alph
    for i in config.encoders:
        w_vars.append((w_name(i), w_alph[w_name(i)]))

    z_vars = []
    z_ids = () if skip_z else config.reproduction_ids
    for k in z_ids:
        if k not in reproducers:
            raise ConfigurationError("missing reproducer for reproduction %r" % (k,))
        z_vars.append((z_name(k), reproducers[k].out_alphabet))

    variables = w_vars + list(source.variables) + z_vars
    src_names = source.names
    one = Fraction(1) if source.mode == RATIONAL else 1.0
    table: dict = {}
    for src_key, p_src in source.items():
        if p_src == 0 and source.mode != RATIONAL:
            continue
        assign = dict(zip(src_names, src_key))
        cell_rows = []
        for cell in config.sharing:
            ch = cell_channels[tuple(cell)]
            in_key = tuple(assign[n] for n, _ in ch.inputs)
            cell_rows.append((tuple(n for n, _ in ch.outputs), ch.row(in_key)))
        for combo in itertools.product(*(row.items() for _, row in cell_rows)):
            p = p_src
            w_assign = {}
            for (names, _), (out_key, p_w) in zip(cell_rows, combo):
                p = p * p_w
                w_assign.update(zip(names, out_key))
            full = dict(assign)
            full.update(w_assign)
            for k in z_ids:
                rep = reproducers[k]
                full[z_name(k)] = rep(tuple(full[a] for a in rep.args))
            key = tuple(full[n] for n, _ in variables)
            table[key] = table.get(key, p * 0) + p
    return JointPmf(variables, table, mode=source.mode, _validated=True)
