import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emduality import expressions as ex


def ev(src, **env):
    e = ex.parse(src, allowed={"tau", "x1", "x2"})
    full = {"tau": env.get("tau", 0j)}
    full["ctau"] = full["tau"].conjugate()
    full.update({k: complex(v) for k, v in env.items() if k != "tau"})
    return ex.evaluate(e, full)


class TestParserEval:
    def test_precedence(self):
        assert ev("1 + 2*3") == 7
        assert ev("(1 + 2)*3") == 9
        assert ev("2*3^2") == 18
        assert ev("-2^2") == -4  # unary minus binds looser than power

    def test_power_forms(self):
        assert ev("tau^2", tau=2 + 0j) == 4
        assert ev("tau**2", tau=3 + 0j) == 9
        assert ev("tau^-1", tau=2 + 0j) == 0.5
        assert ev("tau^(-2)", tau=2 + 0j) == 0.25

    def test_imaginary_unit(self):
        assert ev("i*i") == -1
        assert ev("2 + 3*i") == 2 + 3j

    def test_conj(self):
        assert ev("conj(tau)", tau=1 + 2j) == 1 - 2j
        assert ev("tau + 3*conj(tau)", tau=1 + 1j) == 4 - 2j

    def test_coordinates(self):
        assert ev("x1 - 2*x2", x1=5, x2=1) == 3

    def test_division_pole(self):
        with pytest.raises(ex.ExprPoleError):
            ev("1/tau", tau=0j)
        with pytest.raises(ex.ExprPoleError):
            ev("tau^-1", tau=1e-14 + 0j)

    def test_syntax_error_position(self):
        with pytest.raises(ex.ExprSyntaxError) as err:
            ex.parse("tau +")
        assert "column 6" in str(err.value)

    def test_unknown_symbol(self):
        with pytest.raises(ex.UnknownSymbolError):
            ex.parse("sigma + 1", allowed={"tau"})

    def test_unexpected_character(self):
        with pytest.raises(ex.ExprSyntaxError):
            ex.parse("tau @ 2")


def random_expr(rng, symbols, depth=0):
    kind = rng.integers(0, 6 if depth < 4 else 2)
    if kind == 0:
        val = complex(round(float(rng.uniform(-5, 5)), 3))
        if rng.random() < 0.3:
            val = val + 1j * round(float(rng.uniform(-3, 3)), 3)
        return ex.Num(val)
    if kind == 1:
        return ex.Sym(rng.choice(symbols))
    if kind == 2:
        return ex.Neg(random_expr(rng, symbols, depth + 1))
    if kind == 3:
        return ex.Pow(random_expr(rng, symbols, depth + 1), int(rng.integers(-3, 4)))
    op = rng.choice(["+", "-", "*", "/"])
    return ex.BinOp(op, random_expr(rng, symbols, depth + 1),
                    random_expr(rng, symbols, depth + 1))


class TestPrinterRoundTrip:
    def test_random_asts(self):
        # The parser folds constants, so structural round trip is asserted on
        # parsed (normal-form) trees: parse(print(m)) == m.
        rng = np.random.default_rng(11)
        symbols = ["tau", "ctau", "x1", "x2"]
        for _ in range(100):
            raw = random_expr(rng, symbols)
            m = ex.parse(ex.to_text(raw), allowed={"tau", "x1", "x2"})
            assert ex.parse(ex.to_text(m), allowed={"tau", "x1", "x2"}) == m

    def test_value_preserved(self):
        rng = np.random.default_rng(12)
        symbols = ["tau", "ctau", "x1"]
        checked = 0
        for _ in range(200):
            e = random_expr(rng, symbols)
            text = ex.to_text(e)
            e2 = ex.parse(text, allowed={"tau", "x1"})
            tau = complex(rng.uniform(-2, 2), rng.uniform(0.5, 2))
            env = {"tau": tau, "ctau": tau.conjugate(), "x1": complex(rng.uniform(-2, 2))}
            try:
                v1 = ex.evaluate(e, env)
                v2 = ex.evaluate(e2, env)
            except (ex.ExprPoleError, OverflowError):
                continue
            if not (np.isfinite(v1.real) and np.isfinite(v1.imag)):
                continue
            assert v1 == pytest.approx(v2, rel=1e-12, abs=1e-12)
            checked += 1
        assert checked > 100


_leaf = st.one_of(
    st.floats(min_value=-9, max_value=9,
              allow_nan=False).map(lambda v: ex.Num(complex(round(v, 3)))),
    st.sampled_from(["tau", "ctau", "x1"]).map(ex.Sym),
)
_expr_trees = st.recursive(
    _leaf,
    lambda sub: st.one_of(
        sub.map(ex.Neg),
        st.tuples(sub, st.integers(min_value=-3, max_value=3)).map(
            lambda t: ex.Pow(t[0], t[1])),
        st.tuples(st.sampled_from("+-*/"), sub, sub).map(
            lambda t: ex.BinOp(t[0], t[1], t[2])),
    ),
    max_leaves=12)


class TestPrinterRoundTripProperty:
    @settings(max_examples=200, deadline=None)
    @given(_expr_trees)
    def test_parse_print_fixed_point(self, tree):
        # printing any tree yields valid grammar, and parse . print is the
        # identity on parsed (normal-form) trees
        text = ex.to_text(tree)
        m = ex.parse(text, allowed={"tau", "x1"})
        assert ex.parse(ex.to_text(m), allowed={"tau", "x1"}) == m

    @settings(max_examples=200, deadline=None)
    @given(_expr_trees, st.floats(-2, 2), st.floats(0.5, 2), st.floats(-2, 2))
    def test_value_preserved_through_printing(self, tree, x, y, x1):
        tau = complex(x, y)
        env = {"tau": tau, "ctau": tau.conjugate(), "x1": complex(x1)}
        try:
            v1 = ex.evaluate(tree, env)
        except (ex.ExprPoleError, OverflowError, ZeroDivisionError):
            return
        if not (np.isfinite(v1.real) and np.isfinite(v1.imag)) or abs(v1) > 1e12:
            return
        m = ex.parse(ex.to_text(tree), allowed={"tau", "x1"})
        v2 = ex.evaluate(m, env)
        assert v2 == pytest.approx(v1, rel=1e-9, abs=1e-9)


class TestDerivative:
    def test_matches_finite_difference(self):
        rng = np.random.default_rng(13)
        symbols = ["tau", "ctau"]
        checked = 0
        while checked < 50:
            e = random_expr(rng, symbols)
            x, y = rng.uniform(-1, 1), rng.uniform(0.6, 1.8)
            vx, vy = rng.standard_normal(2)
            h = 1e-6

            def val(xx, yy):
                t = complex(xx, yy)
                return ex.evaluate(e, {"tau": t, "ctau": t.conjugate()})

            try:
                d = ex.derivative(e, {"tau": complex(x, y), "ctau": complex(x, -y)},
                                  {"tau": complex(vx, vy), "ctau": complex(vx, -vy)})
                fd = (val(x + h * vx, y + h * vy) - val(x - h * vx, y - h * vy)) / (2 * h)
            except (ex.ExprPoleError, OverflowError, ZeroDivisionError):
                continue
            if not np.isfinite(abs(d)) or abs(d) > 1e3:
                continue
            assert abs(d - fd) < 1e-6 * max(1.0, abs(d))
            checked += 1
