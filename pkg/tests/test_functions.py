import numpy as np
import pytest

from sturmkit.errors import PeriodMismatch
from sturmkit.fncore import (
    CircleFunction,
    check_periods,
    constant,
    count_sign_changes,
    from_callable,
    from_samples,
    load_csv,
    parse_expression,
)


def test_evaluation_is_periodic():
    f = parse_expression("sin(x)+x", period=2 * np.pi)
    assert f(0.5 + 2 * np.pi) == pytest.approx(f(0.5), abs=1e-14)


def test_arithmetic_keeps_symbolic_form():
    f = parse_expression("sin(x)")
    g = 2 * f + 1 - f / 4
    assert g.expr is not None
    assert g(1.0) == pytest.approx(1.75 * np.sin(1.0) + 1)
    assert g.derivative(1)(1.0) == pytest.approx(1.75 * np.cos(1.0))
    assert (-f)(1.0) == pytest.approx(-np.sin(1.0))
    assert (f * f)(1.0) == pytest.approx(np.sin(1.0) ** 2)


def test_mixed_arithmetic_with_callable():
    f = parse_expression("sin(x)")
    g = from_callable(np.cos, 2 * np.pi, kinks=[1.0])
    h = f + g
    assert h(0.3) == pytest.approx(np.sin(0.3) + np.cos(0.3))
    assert 1.0 in h.kinks


def test_period_mismatch():
    with pytest.raises(PeriodMismatch):
        parse_expression("sin(x)") + parse_expression("sin(x)", period=np.pi)
    with pytest.raises(PeriodMismatch):
        check_periods(constant(1.0), constant(1.0, np.pi))


def test_constant_has_zero_derivatives():
    c = constant(3.0)
    assert c(np.linspace(0, 1, 5)).tolist() == [3.0] * 5
    assert np.all(c.derivative(2)(np.linspace(0, 1, 5)) == 0)


def test_samples_interpolate_without_overshoot():
    x = np.arange(64) * (2 * np.pi / 64)
    v = np.sign(np.sin(x)) * np.minimum(1.0, 3 * np.abs(np.sin(x)))
    f = from_samples(x, v, 2 * np.pi)
    np.testing.assert_allclose(f(x), v, atol=1e-15)
    fine = np.linspace(0, 2 * np.pi, 5001)
    assert np.max(np.abs(f(fine))) <= 1.0 + 1e-12
    assert count_sign_changes(f).count == 2


@pytest.mark.parametrize("n", [4, 15])
def test_samples_need_enough_nodes(n):
    with pytest.raises(ValueError):
        from_samples(np.arange(n) / n, np.zeros(n), 1.0)


def test_csv_round_trip(tmp_path):
    f = parse_expression("cos(2*x)+0.5")
    path = tmp_path / "f.csv"
    f.to_csv(path, n=256)
    g = load_csv(path, 2 * np.pi)
    x = np.linspace(0, 2 * np.pi, 101)
    assert np.max(np.abs(g(x) - f(x))) < 1e-4
    assert path.read_text().splitlines()[0] == "x,value"


def test_csv_needs_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,1\n1,2\n")
    with pytest.raises(ValueError):
        load_csv(path, 2.0)


def test_kinks_always_contain_zero():
    f = CircleFunction(np.sin, 2 * np.pi, kinks=[1.0, 7.0])
    assert 0.0 in f.kinks
    assert np.all((f.kinks >= 0) & (f.kinks < 2 * np.pi))
