"""Named coding scenarios and the on-disk scenario format.

Each scenario wires a classical problem as a special case of the unified
topology: distributed lossless coding, lossy coding with decoder side
information, distributed lossy coding, two-description coding, two decoders
with distinct side information, and the mixed lossless/lossy single-decoder
formulation.  A scenario bundles the topology, the per-letter source law,
the auxiliary channels, the reproducers, and default code parameters; its
`make_code` realizes a concrete code at a chosen block length.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional

import numpy as np

from .codec import CodeInstance, realized_size
from .errors import ConfigurationError
from .hashing import make_ensemble
from .network import (
    ConditionalPmf,
    NetworkConfig,
    Reproducer,
    block_mismatch_distortion,
    bsc_channel,
    hamming_distortion,
    identity_channel,
    identity_reproducer,
    w_name,
)
from .probability import Alphabet, JointPmf, dsbs


@dataclass
class Scenario:
    name: str
    description: str
    config: NetworkConfig
    source: JointPmf
    channels: dict
    reproducers: dict
    default_D: dict
    code_kinds: dict = field(default_factory=dict)   # encoder -> hash kind
    default_rates: dict = field(default_factory=dict)
    default_aux_rates: dict = field(default_factory=dict)
    q: int = 2
    run_defaults: dict = field(default_factory=dict)  # n list, trials, seed, delta

    def make_code(self, n: int, rates: Optional[Mapping] = None,
                  aux_rates: Optional[Mapping] = None, seed: int = 0,
                  kinds: Optional[Mapping] = None,
                  g_overrides: Optional[Mapping] = None,
                  f_overrides: Optional[Mapping] = None) -> CodeInstance:
        """Realize one code: sample hash functions and constraint values.

        Image sizes realize the target rates as round(2^(rate*n)); linear
        kinds additionally require power-of-q sizes and fall back to binning
        otherwise.  `g_overrides`/`f_overrides` pin specific functions
        (e.g. a known-good matrix) instead of sampling.
        """
        rates = {**self.default_rates, **(rates or {})}
        aux_rates = {**self.default_aux_rates, **(aux_rates or {})}
        kinds = {**self.code_kinds, **(kinds or {})}
        g_overrides = dict(g_overrides or {})
        f_overrides = dict(f_overrides or {})
        root = np.random.SeedSequence(seed)
        f, g, c, f_ens, g_ens = {}, {}, {}, {}, {}
        per_encoder = root.spawn(len(self.config.encoders))
        for enc_seed, i in zip(per_encoder, self.config.encoders):
            w_alph = self._w_alphabet(i)
            dom = w_alph.size ** n
            g_size = realized_size(float(rates.get(i, 0.0)), n)
            f_size = realized_size(float(aux_rates.get(i, 0.0)), n)
            kind = kinds.get(i, "binning")
            f_seed, g_seed, c_seed = enc_seed.spawn(3)
            f_ens[i] = self._ensemble(kind, dom, f_size)
            g_ens[i] = self._ensemble(kind, dom, g_size)
            f[i] = f_overrides.get(i, f_ens[i].sample_function(f_seed))
            g[i] = g_overrides.get(i, g_ens[i].sample_function(g_seed))
            c[i] = self._pick_constraint(f_ens[i], f[i], c_seed)
        return CodeInstance(
            n=n, config=self.config, source=self.source, channels=self.channels,
            reproducers=self.reproducers, f=f, g=g, c=c, f_ens=f_ens, g_ens=g_ens)

    def _w_alphabet(self, i) -> Alphabet:
        for cell in self.config.sharing:
            ch = self.channels[tuple(cell)]
            for name, alph in ch.outputs:
                if name == w_name(i):
                    return alph
        raise ConfigurationError("no channel output for encoder %r" % (i,))

    def _ensemble(self, kind: str, dom: int, size: int):
        if kind in ("linear", "sparse-linear"):
            def is_power(v):
                while v % self.q == 0:
                    v //= self.q
                return v == 1
            if not (is_power(dom) and is_power(size)):
                kind = "binning"
        return make_ensemble(kind, dom, size, q=self.q)

    def _pick_constraint(self, ens, func, seed):
        rng = np.random.default_rng(seed)
        if ens.image_size == 1:
            return func(0)
        if ens.kind in ("linear", "sparse-linear"):
            return int(rng.integers(0, ens.image_size))
        return int(rng.integers(0, ens.image_size))


# -- built-in scenarios ------------------------------------------------------------------


def _slepian_wolf() -> Scenario:
    b = Alphabet((0, 1))
    source = dsbs(Fraction(11, 100))
    config = NetworkConfig(
        encoders=(1, 2), sharing=((1,), (2,)), decoders=(1,),
        codewords_to={1: (1, 2)}, reproductions={1: (1, 2)}, side_info={1: None},
        distortions={1: block_mismatch_distortion("X1"),
                     2: block_mismatch_distortion("X2")},
        lossless=(1, 2))
    channels = {(1,): identity_channel("X1", "W1", b),
                (2,): identity_channel("X2", "W2", b)}
    reproducers = {1: identity_reproducer("W1", b), 2: identity_reproducer("W2", b)}
    return Scenario(
        name="slepian-wolf",
        description="distributed lossless coding of a doubly symmetric binary pair",
        config=config, source=source, channels=channels, reproducers=reproducers,
        default_D={1: 0.0, 2: 0.0},
        default_rates={1: 1.0, 2: 0.75}, default_aux_rates={1: 0.0, 2: 0.0})


def _wyner_ziv() -> Scenario:
    b = Alphabet((0, 1))
    # X uniform; Y = X through BSC(0.2); W = X through BSC(0.1)
    table = {}
    for x in (0, 1):
        for y in (0, 1):
            p = Fraction(1, 2) * (Fraction(1, 5) if x != y else Fraction(4, 5))
            table[(x, y)] = p
    source = JointPmf([("X1", b), ("Y", b)], table)
    config = NetworkConfig(
        encoders=(1,), sharing=((1,),), decoders=(1,),
        codewords_to={1: (1,)}, reproductions={1: (1,)}, side_info={1: "Y"},
        distortions={1: hamming_distortion("X1")})
    channels = {(1,): bsc_channel("X1", "W1", Fraction(1, 10))}
    reproducers = {1: identity_reproducer("W1", b)}
    return Scenario(
        name="wyner-ziv-binary",
        description="lossy coding of a uniform bit with decoder side information",
        config=config, source=source, channels=channels, reproducers=reproducers,
        default_D={1: 0.12}, default_rates={1: 0.75}, default_aux_rates={1: 0.2})


def _berger_tung() -> Scenario:
    b = Alphabet((0, 1))
    source = dsbs(Fraction(11, 100))
    config = NetworkConfig(
        encoders=(1, 2), sharing=((1,), (2,)), decoders=(1,),
        codewords_to={1: (1, 2)}, reproductions={1: (1, 2)}, side_info={1: None},
        distortions={1: hamming_distortion("X1"), 2: hamming_distortion("X2")})
    channels = {(1,): bsc_channel("X1", "W1", Fraction(1, 10)),
                (2,): bsc_channel("X2", "W2", Fraction(1, 10))}
    reproducers = {1: identity_reproducer("W1", b), 2: identity_reproducer("W2", b)}
    return Scenario(
        name="berger-tung-binary",
        description="distributed lossy coding, both auxiliaries through noisy channels",
        config=config, source=source, channels=channels, reproducers=reproducers,
        default_D={1: 0.12, 2: 0.12},
        default_rates={1: 0.8, 2: 0.8}, default_aux_rates={1: 0.25, 2: 0.25})


def _mdc_two() -> Scenario:
    b = Alphabet((0, 1))
    source = JointPmf([("X12", b)], {(0,): Fraction(1, 2), (1,): Fraction(1, 2)})
    config = NetworkConfig(
        encoders=(1, 2), sharing=((1, 2),), decoders=(1, 2, 12),
        codewords_to={1: (1,), 2: (2,), 12: (1, 2)},
        reproductions={1: (1,), 2: (2,), 12: (12,)},
        side_info={1: None, 2: None, 12: None},
        distortions={1: hamming_distortion("X12"),
                     2: hamming_distortion("X12"),
                     12: hamming_distortion("X12")})
    # cell channel: conditionally independent noisy copies given the source
    rows = {}
    for x in (0, 1):
        row = {}
        for w1 in (0, 1):
            for w2 in (0, 1):
                p1 = Fraction(9, 10) if w1 == x else Fraction(1, 10)
                p2 = Fraction(17, 20) if w2 == x else Fraction(3, 20)
                row[(w1, w2)] = p1 * p2
        rows[(x,)] = row
    channels = {(1, 2): ConditionalPmf([("X12", b)], [("W1", b), ("W2", b)], rows)}
    and_table = {(w1, w2): w1 & w2 for w1 in (0, 1) for w2 in (0, 1)}
    reproducers = {
        1: identity_reproducer("W1", b),
        2: identity_reproducer("W2", b),
        12: Reproducer(("W1", "W2"), and_table, b),
    }
    return Scenario(
        name="mdc-two-descriptions",
        description="one source, two descriptions, three decoders",
        config=config, source=source, channels=channels, reproducers=reproducers,
        default_D={1: 0.15, 2: 0.2, 12: 0.35},
        default_rates={1: 0.8, 2: 0.8}, default_aux_rates={1: 0.2, 2: 0.2})


def _heegard_berger() -> Scenario:
    b = Alphabet((0, 1))
    # X uniform; Y1, Y2 independent noisy observations of X
    table = {}
    for x in (0, 1):
        for y1 in (0, 1):
            for y2 in (0, 1):
                p1 = Fraction(4, 5) if y1 == x else Fraction(1, 5)
                p2 = Fraction(7, 10) if y2 == x else Fraction(3, 10)
                table[(x, y1, y2)] = Fraction(1, 2) * p1 * p2
    source = JointPmf([("X1", b), ("Y1", b), ("Y2", b)], table)
    config = NetworkConfig(
        encoders=(1,), sharing=((1,),), decoders=(1, 2),
        codewords_to={1: (1,), 2: (1,)}, reproductions={1: (1,), 2: (2,)},
        side_info={1: "Y1", 2: "Y2"},
        distortions={1: hamming_distortion("X1"), 2: hamming_distortion("X1")})
    channels = {(1,): bsc_channel("X1", "W1", Fraction(1, 10))}
    reproducers = {1: identity_reproducer("W1", b), 2: identity_reproducer("W1", b)}
    return Scenario(
        name="heegard-berger-two-decoders",
        description="one codeword broadcast to two decoders with distinct side information",
        config=config, source=source, channels=channels, reproducers=reproducers,
        default_D={1: 0.15, 2: 0.15},
        default_rates={1: 0.9}, default_aux_rates={1: 0.1})


def _jb_mixed() -> Scenario:
    b = Alphabet((0, 1))
    source = dsbs(Fraction(11, 100))
    config = NetworkConfig(
        encoders=(1, 2), sharing=((1,), (2,)), decoders=(1,),
        codewords_to={1: (1, 2)}, reproductions={1: (1, 2)}, side_info={1: None},
        distortions={1: block_mismatch_distortion("X1"),
                     2: hamming_distortion("X2")},
        lossless=(1,))
    channels = {(1,): identity_channel("X1", "W1", b),
                (2,): bsc_channel("X2", "W2", Fraction(1, 10))}
    reproducers = {1: identity_reproducer("W1", b), 2: identity_reproducer("W2", b)}
    return Scenario(
        name="jb-mixed-lossless-lossy",
        description="one lossless and one lossy reproduction at a single decoder",
        config=config, source=source, channels=channels, reproducers=reproducers,
        default_D={1: 0.0, 2: 0.12},
        default_rates={1: 0.9, 2: 0.8}, default_aux_rates={1: 0.0, 2: 0.25})


def _example1_dsc2() -> Scenario:
    """Region-algebra fixture: two encoders, one decoder, generic channels."""
    b = Alphabet((0, 1))
    source = JointPmf([("X1", b), ("X2", b)],
                      {(0, 0): Fraction(9, 20), (0, 1): Fraction(1, 20),
                       (1, 0): Fraction(1, 10), (1, 1): Fraction(2, 5)})
    config = NetworkConfig(
        encoders=(1, 2), sharing=((1,), (2,)), decoders=(1,),
        codewords_to={1: (1, 2)}, reproductions={1: ()}, side_info={1: None})
    channels = {(1,): bsc_channel("X1", "W1", Fraction(1, 10)),
                (2,): bsc_channel("X2", "W2", Fraction(3, 20))}
    return Scenario(
        name="example1-dsc2",
        description="golden fixture: two-encoder elimination identity",
        config=config, source=source, channels=channels, reproducers={},
        default_D={})


def _example2_dsc3() -> Scenario:
    """Region-algebra fixture: three encoders, one decoder."""
    b = Alphabet((0, 1))
    source = JointPmf(
        [("X0", b), ("X1", b), ("X2", b)],
        {(0, 0, 0): Fraction(9, 107), (0, 0, 1): Fraction(4, 107),
         (0, 1, 0): Fraction(21, 107), (0, 1, 1): Fraction(10, 107),
         (1, 0, 0): Fraction(16, 107), (1, 0, 1): Fraction(17, 107),
         (1, 1, 0): Fraction(22, 107), (1, 1, 1): Fraction(8, 107)})
    config = NetworkConfig(
        encoders=(0, 1, 2), sharing=((0,), (1,), (2,)), decoders=(1,),
        codewords_to={1: (0, 1, 2)}, reproductions={1: ()}, side_info={1: None})
    channels = {(0,): bsc_channel("X0", "W0", Fraction(1, 8)),
                (1,): bsc_channel("X1", "W1", Fraction(1, 10)),
                (2,): bsc_channel("X2", "W2", Fraction(1, 5))}
    return Scenario(
        name="example2-dsc3",
        description="golden fixture: three-encoder elimination identity",
        config=config, source=source, channels=channels, reproducers={},
        default_D={})


def _example3_mdc2() -> Scenario:
    """Region-algebra fixture: one shared source, two descriptions.

    The cell channel is deliberately non-factorizing so that no two bound
    expressions coincide numerically.
    """
    b = Alphabet((0, 1))
    source = JointPmf([("X12", b)], {(0,): Fraction(2, 5), (1,): Fraction(3, 5)})
    config = NetworkConfig(
        encoders=(1, 2), sharing=((1, 2),), decoders=(1, 2, 12),
        codewords_to={1: (1,), 2: (2,), 12: (1, 2)},
        reproductions={1: (), 2: (), 12: ()},
        side_info={1: None, 2: None, 12: None})
    rows = {
        (0,): {(0, 0): Fraction(3, 5), (0, 1): Fraction(1, 10),
               (1, 0): Fraction(1, 5), (1, 1): Fraction(1, 10)},
        (1,): {(0, 0): Fraction(1, 10), (0, 1): Fraction(3, 10),
               (1, 0): Fraction(1, 20), (1, 1): Fraction(11, 20)},
    }
    channels = {(1, 2): ConditionalPmf([("X12", b)], [("W1", b), ("W2", b)], rows)}
    return Scenario(
        name="example3-mdc2",
        description="golden fixture: two-description elimination identity",
        config=config, source=source, channels=channels, reproducers={},
        default_D={})


def _example5_dsi2() -> Scenario:
    """Region-algebra fixture: one encoder, two decoders with side info."""
    b = Alphabet((0, 1))
    table = {}
    for x in (0, 1):
        for y1 in (0, 1):
            for y2 in (0, 1):
                p1 = Fraction(4, 5) if y1 == x else Fraction(1, 5)
                p2 = Fraction(13, 20) if y2 == x else Fraction(7, 20)
                table[(x, y1, y2)] = Fraction(1, 2) * p1 * p2
    source = JointPmf([("X1", b), ("Y1", b), ("Y2", b)], table)
    config = NetworkConfig(
        encoders=(1,), sharing=((1,),), decoders=(1, 2),
        codewords_to={1: (1,), 2: (1,)}, reproductions={1: (), 2: ()},
        side_info={1: "Y1", 2: "Y2"})
    channels = {(1,): bsc_channel("X1", "W1", Fraction(3, 25))}
    return Scenario(
        name="example5-dsi2",
        description="golden fixture: side-information elimination identity",
        config=config, source=source, channels=channels, reproducers={},
        default_D={})


_BUILTINS = {
    "slepian-wolf": _slepian_wolf,
    "wyner-ziv-binary": _wyner_ziv,
    "berger-tung-binary": _berger_tung,
    "mdc-two-descriptions": _mdc_two,
    "heegard-berger-two-decoders": _heegard_berger,
    "jb-mixed-lossless-lossy": _jb_mixed,
    "example1-dsc2": _example1_dsc2,
    "example2-dsc3": _example2_dsc3,
    "example3-mdc2": _example3_mdc2,
    "example5-dsi2": _example5_dsi2,
}


def scenario_names() -> list:
    return sorted(_BUILTINS)


def build_scenario(name: str) -> Scenario:
    if name not in _BUILTINS:
        raise ConfigurationError(
            "unknown scenario %r (known: %s)" % (name, ", ".join(scenario_names())))
    return _BUILTINS[name]()


# -- structured scenario files -------------------------------------------------------------


def _frac(value) -> Fraction:
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10 ** 12)
    raise ConfigurationError("cannot parse probability %r" % (value,))


def _ident(value):
    if isinstance(value, str) and value.lstrip("-").isdigit():
        return int(value)
    return value


def _symbols(raw) -> tuple:
    return tuple(tuple(s) if isinstance(s, list) else s for s in raw)


def scenario_from_dict(data: dict) -> Scenario:
    """Build a scenario from the documented JSON structure.

    Sections: topology, source, channels, reproducers, code, run.  See the
    README for the schema; errors name the offending section and key.
    """
    try:
        topo = data["topology"]
        src = data["source"]
    except KeyError as exc:
        raise ConfigurationError("scenario file missing section %s" % exc) from None

    variables = [(name, Alphabet(_symbols(al))) for name, al in src["variables"]]
    table = {tuple(_symbols(k)): _frac(v) for k, v in src["table"]}
    source = JointPmf(variables, table)

    distortions = {}
    for k, spec in topo.get("distortions", {}).items():
        k = _ident(k)
        kind = spec.get("kind", "hamming")
        if kind == "hamming":
            distortions[k] = hamming_distortion(spec["source"])
        elif kind == "block-mismatch":
            distortions[k] = block_mismatch_distortion(spec["source"])
        else:
            raise ConfigurationError("topology.distortions[%r]: unknown kind %r" % (k, kind))

    config = NetworkConfig(
        encoders=tuple(_ident(i) for i in topo["encoders"]),
        sharing=tuple(tuple(_ident(i) for i in cell) for cell in topo["sharing"]),
        decoders=tuple(_ident(j) for j in topo["decoders"]),
        codewords_to={_ident(j): tuple(_ident(i) for i in ids)
                      for j, ids in topo["codewords_to"].items()},
        reproductions={_ident(j): tuple(_ident(k) for k in ks)
                       for j, ks in topo["reproductions"].items()},
        side_info={_ident(j): y for j, y in topo["side_info"].items()},
        distortions=distortions,
        lossless=tuple(_ident(i) for i in topo.get("lossless", ())))

    channels = {}
    for ch in data.get("channels", []):
        cell = tuple(_ident(i) for i in ch["cell"])
        inputs = [(ch["input"], source.alphabet(ch["input"]))]
        outputs = [(name, Alphabet(_symbols(al))) for name, al in ch["outputs"]]
        rows = {tuple(_symbols(key)): {tuple(_symbols(out)): _frac(p) for out, p in row}
                for key, row in ch["rows"]}
        channels[cell] = ConditionalPmf(inputs, outputs, rows)

    reproducers = {}
    for k, spec in data.get("reproducers", {}).items():
        k = _ident(k)
        alph = Alphabet(_symbols(spec["alphabet"]))
        if spec.get("identity"):
            reproducers[k] = identity_reproducer(spec["args"][0], alph)
        else:
            table = {tuple(_symbols(key)): out for key, out in spec["table"]}
            reproducers[k] = Reproducer(tuple(spec["args"]), table, alph)

    code = data.get("code", {})
    run = data.get("run", {})
    run_defaults = {}
    for key in ("n", "trials", "seed", "delta"):
        if key in run:
            run_defaults[key] = run[key]
    return Scenario(
        name=data.get("name", "custom"),
        description=data.get("description", ""),
        config=config, source=source, channels=channels, reproducers=reproducers,
        default_D={_ident(k): float(_frac(v)) for k, v in run.get("D", {}).items()},
        code_kinds={_ident(i): kind for i, kind in code.get("kinds", {}).items()},
        default_rates={_ident(i): float(v) for i, v in code.get("rates", {}).items()},
        default_aux_rates={_ident(i): float(v) for i, v in code.get("aux_rates", {}).items()},
        q=int(code.get("q", 2)),
        run_defaults=run_defaults)


def load_scenario(name_or_path: str) -> Scenario:
    """A built-in scenario by name, or a JSON scenario file by path."""
    if name_or_path in _BUILTINS:
        return _BUILTINS[name_or_path]()
    try:
        with open(name_or_path) as handle:
            data = json.load(handle)
    except OSError:
        raise ConfigurationError(
            "no scenario named %r and no readable file at that path (known: %s)"
            % (name_or_path, ", ".join(scenario_names()))) from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(
            "scenario file %s: line %d column %d: %s"
            % (name_or_path, exc.lineno, exc.colno, exc.msg)) from None
    return scenario_from_dict(data)
