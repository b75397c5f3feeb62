from fractions import Fraction

import pytest

from multiterm.errors import ConfigurationError
from multiterm.linineq import (
    INF,
    SUP,
    EntropyTerm,
    LinConst,
    LinIneqSystem,
    fme_eliminate,
)


def test_entropy_term_sorting_and_render():
    t = EntropyTerm(SUP, ("W2", "W1"), ("Y1",))
    assert t.left == ("W1", "W2")
    assert t.render() == "Hsup(W1,W2|Y1)"
    assert EntropyTerm(INF, ("W1",), ("X1",)).render() == "Hinf(W1|X1)"


def test_linconst_arithmetic_and_bind():
    a = EntropyTerm(SUP, ("W1",))
    b = EntropyTerm(INF, ("W1",), ("X1",))
    const = LinConst.of(a) + LinConst.of(b, -1) + LinConst(Fraction(1, 2))
    bound = const.bind({a: Fraction(3, 4), b: Fraction(1, 4)})
    assert bound.value() == Fraction(3, 4) - Fraction(1, 4) + Fraction(1, 2)
    with pytest.raises(ConfigurationError):
        const.bind({a: Fraction(1)})  # missing term named in the error
    assert "Hsup(W1)" in const.render()


def test_canonical_scaling_gcd_one():
    sys = LinIneqSystem(["R_1", "R_2"])
    sys.add({"R_1": Fraction(2, 3), "R_2": Fraction(4, 3)}, Fraction(5, 3))
    out = sys.canonicalize()
    coeffs = out.ineqs[0].coeff_map()
    assert coeffs == {"R_1": 1, "R_2": 2}
    assert out.ineqs[0].const.value() == Fraction(5, 2)


def test_duplicate_and_dominance_collapse():
    sys = LinIneqSystem(["R"])
    sys.add({"R": 1}, 1)
    sys.add({"R": 1}, 0)
    sys.add({"R": 2}, 2)  # same canonical row as R >= 1
    out = sys.canonicalize()
    assert len(out.ineqs) == 1
    assert out.ineqs[0].const.value() == 1


def test_tautology_drop_and_infeasibility_marker():
    sys = LinIneqSystem(["R"])
    sys.add({}, -1)
    out = sys.canonicalize()
    assert not out.ineqs and not out.infeasible
    sys2 = LinIneqSystem(["R"])
    sys2.add({}, 1)
    out2 = sys2.canonicalize()
    assert out2.infeasible


def test_render_parse_round_trip():
    sys = LinIneqSystem(["R_1", "R_2", "r_1"])
    sys.add({"R_1": 1, "r_1": -2}, Fraction(-3, 4))
    sys.add({"R_2": 1}, 2)
    text = sys.canonicalize().render()
    back = LinIneqSystem.parse(text)
    assert back.render() == text


def test_variable_order_natural():
    sys = LinIneqSystem(["R_10", "R_2", "r_1"])
    assert sys.vars == ("R_2", "R_10", "r_1")


def test_fme_single_variable():
    # {R1 + r >= 2, r <= 1, r >= 0} eliminate r -> {R1 >= 1}
    sys = LinIneqSystem(["R_1", "r"])
    sys.add({"R_1": 1, "r": 1}, 2)
    sys.add({"r": -1}, -1)
    sys.add({"r": 1}, 0)
    out = fme_eliminate(sys, ["r"])
    assert out.vars == ("R_1",)
    assert len(out.ineqs) == 1
    assert out.ineqs[0].coeff_map() == {"R_1": 1}
    assert out.ineqs[0].const.value() == 1


def test_fme_unknown_variable():
    sys = LinIneqSystem(["R_1"])
    with pytest.raises(ConfigurationError):
        fme_eliminate(sys, ["zzz"])


def test_fme_empty_system():
    out = fme_eliminate(LinIneqSystem(["R_1", "r"]), ["r"])
    assert out.vars == ("R_1",) and not out.ineqs


def test_fme_symbolic_constants_combine():
    h1 = EntropyTerm(SUP, ("W1",))
    h2 = EntropyTerm(INF, ("W1",), ("X1",))
    sys = LinIneqSystem(["R_1", "r_1"])
    sys.add({"R_1": 1, "r_1": 1}, LinConst.of(h1))
    sys.add({"r_1": -1}, LinConst.of(h2, -1))
    out = fme_eliminate(sys, ["r_1"])
    assert len(out.ineqs) == 1
    got = out.ineqs[0].const
    assert got.terms == {h1: Fraction(1), h2: Fraction(-1)}
