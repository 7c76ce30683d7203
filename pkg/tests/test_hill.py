import numpy as np
import pytest
import scipy.linalg
import sympy

from sturmkit.errors import (
    BracketFailure,
    CurveNotClosed,
    DegenerateJacobian,
    DerivativeUnderflow,
    InsufficientSignChanges,
    NonPositiveK,
    OriginHit,
    PreconditionError,
)
from sturmkit.fncore import constant, from_callable, parse_expression
from sturmkit.hill import (
    E,
    PlaneCurve,
    ProjDiffeo,
    StepPotential,
    classic_schwarzian,
    generator,
    integrate_frame,
    is_sl2,
    monodromy,
    monodromy_jacobian,
    potential_of,
    recover_diffeo,
    rotation_exp,
    schwarzian,
    sl2_exp,
    sl2_log,
    solve_converse_ghys,
    solve_tan_equation,
)

PI = np.pi


def random_sl2(rng):
    M = rng.standard_normal((2, 2))
    if np.linalg.det(M) < 0:
        M[:, 0] *= -1
    return M / np.sqrt(np.linalg.det(M))


def test_rotation_exp_examples():
    assert np.max(np.abs(rotation_exp(1, PI) + E)) < 1e-14
    np.testing.assert_array_equal(rotation_exp(2.3, 0.0), E)
    assert np.max(np.abs(rotation_exp(4, PI / 2) + E)) < 1e-14


@pytest.mark.parametrize("k", [-2.0, 0.0, 0.3, 5.0])
def test_rotation_exp_matches_expm(k):
    np.testing.assert_allclose(rotation_exp(k, 0.7), scipy.linalg.expm(0.7 * generator(k)),
                               atol=1e-13)


def test_rotation_exp_group_law():
    rng = np.random.default_rng(0)
    for _ in range(500):
        k = rng.uniform(-3, 3)
        s, t = rng.uniform(0, 2, 2)
        lhs = rotation_exp(k, s + t)
        rhs = rotation_exp(k, s) @ rotation_exp(k, t)
        assert np.max(np.abs(lhs - rhs)) < 1e-12 * max(1.0, np.abs(lhs).max())


def test_sl2_exp_and_log():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((50, 2, 2))
    X[:, 1, 1] = -X[:, 0, 0]
    ours = sl2_exp(X)
    for x, e in zip(X, ours):
        np.testing.assert_allclose(e, scipy.linalg.expm(x), rtol=1e-12, atol=1e-12)
        assert is_sl2(e, 1e-9)
    for x in 0.3 * X:
        np.testing.assert_allclose(sl2_log(sl2_exp(x)), x, atol=1e-12)
    np.testing.assert_array_equal(sl2_exp(np.zeros((2, 2))), E)


def test_step_potential_validation():
    with pytest.raises(ValueError):
        StepPotential((1.0, 2.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        StepPotential((1.0,), (PI,) * 2)


def test_monodromy_of_constant_one():
    assert np.max(np.abs(monodromy(StepPotential((1.0,), (PI,))) + E)) < 1e-14


def test_tan_equation_examples():
    s = solve_tan_equation(1.0, 1.0)
    assert s.alpha == pytest.approx(PI / 4) and s.beta == pytest.approx(PI / 4)
    assert s.t1 == pytest.approx(PI / 4) and s.t2 == pytest.approx(PI / 4)
    for k1 in (1.05, 1.1, 1.2):
        s = solve_tan_equation(k1, 2 - k1)
        assert np.tan(s.alpha) * np.tan(s.beta) == pytest.approx(np.sqrt(k1 * (2 - k1)))
        assert np.max(np.abs(monodromy(s.potential()) + E)) < 1e-10
    with pytest.raises(NonPositiveK):
        solve_tan_equation(2.5, -0.5)


def test_tan_equation_asymmetric_values():
    s = solve_tan_equation(3.0, 0.5)
    assert np.max(np.abs(monodromy(s.potential()) + E)) < 1e-10
    # no closing split with t1 + t2 = pi / 2 when both values are on the
    # same side of 1
    for k1, k2 in [(0.6, 0.9), (1.5, 1.4), (1.9, 1.8)]:
        with pytest.raises(BracketFailure, match="no closing"):
            solve_tan_equation(k1, k2)


def test_jacobian_examples():
    p = solve_tan_equation(1.1, 0.9).potential()
    J = monodromy_jacobian(p)
    np.testing.assert_array_equal(J(np.zeros(4)), np.zeros((2, 2)))
    assert J.singular_values()[2] > 1e-6
    h = 1e-6
    for i in range(4):
        up = list(p.lengths)
        dn = list(p.lengths)
        up[i] += h
        dn[i] -= h
        fd = (_mono(p.values, up) - _mono(p.values, dn)) / (2 * h)
        assert np.max(np.abs(fd - J.columns[i])) < 1e-6


def _mono(values, lengths):
    M = E.copy()
    for k, t in zip(values, lengths):
        M = M @ rotation_exp(k, t)
    return M


@pytest.mark.parametrize("c", [0.05, 0.1, 0.2])
def test_jacobian_relative_agreement(c):
    rng = np.random.default_rng(int(100 * c))
    for _ in range(7):
        cc = c * rng.uniform(0.8, 1.2)
        p = solve_tan_equation(1 + cc, 1 - cc).potential()
        J = monodromy_jacobian(p)
        s = rng.standard_normal(4)
        h = 1e-6
        fd = (_mono(p.values, np.add(p.lengths, h * s))
              - _mono(p.values, np.add(p.lengths, -h * s))) / (2 * h)
        assert np.linalg.norm(fd - J(s)) <= 1e-5 * np.linalg.norm(fd)


def test_jacobian_preconditions():
    with pytest.raises(PreconditionError):
        monodromy_jacobian(StepPotential((1.2, 0.8), (PI / 2, PI / 2)))
    with pytest.raises(DegenerateJacobian):
        monodromy_jacobian(StepPotential((1.0,) * 4, (PI / 4,) * 4))


def test_frame_of_constant_potential():
    curve = integrate_frame(constant(1.0, PI), E, grid=256)
    exact = np.array([rotation_exp(1.0, x) for x in curve.x])
    assert np.max(np.abs(curve.frames - exact)) < 1e-8
    np.testing.assert_allclose(curve.gamma[:, 0], np.cos(curve.x), atol=1e-8)


def test_frame_of_step_potential_matches_product():
    p = StepPotential((1.5, 0.4, 2.0), (1.0, 0.9, PI - 1.9))
    curve = integrate_frame(p.as_circle_function(), E, grid=256)
    for e in p.edges[1:]:
        i = int(np.argmin(np.abs(curve.x - e)))
        assert curve.x[i] == pytest.approx(e, abs=1e-14)
        lengths = np.diff(np.minimum(p.edges, e))
        assert np.max(np.abs(curve.frames[i] - _mono(p.values, lengths))) < 1e-8


def test_determinant_is_conserved():
    k = parse_expression("1+0.5*cos(2*x)+0.3*sin(6*x)", PI)
    curve = integrate_frame(k, random_sl2(np.random.default_rng(2)), grid=512)
    assert np.max(np.abs(curve.wronskian() - 1)) < 1e-9


def test_grid_must_be_large_enough():
    with pytest.raises(ValueError):
        integrate_frame(constant(1.0, PI), grid=64)


def test_recover_identity_from_unit_circle():
    curve = integrate_frame(constant(1.0, PI), E, grid=256)
    g = recover_diffeo(curve)
    x = np.linspace(0, 3 * PI, 301)
    assert np.max(np.abs(g(x) - x)) < 1e-8


def test_recover_moebius_maps():
    rng = np.random.default_rng(3)
    x = np.linspace(0.0, PI, 200)
    t = sympy.Symbol("t")
    for _ in range(10):
        M = random_sl2(rng)
        g = recover_diffeo(integrate_frame(constant(1.0, PI), M, grid=512))
        # oracle: the angle of M (cos t, sin t) has derivative 1 / |M v|^2
        v = sympy.Matrix(M.tolist()) * sympy.Matrix([sympy.cos(t), sympy.sin(t)])
        speed = 1 / (v[0] ** 2 + v[1] ** 2)
        for order in (1, 2, 3):
            exact = sympy.lambdify(t, sympy.diff(speed, t, order - 1))(x)
            got = g.derivative(x, order)
            assert np.max(np.abs(got - exact)) < 1e-6 * np.max(np.abs(exact)) + 1e-9
        assert np.max(np.abs(schwarzian(g)(x))) < 1e-6
        w = M @ np.vstack([np.cos(x), np.sin(x)])
        want = np.unwrap(np.arctan2(w[1], w[0]))
        got = g(x)
        assert np.max(np.abs((got - got[0]) - (want - want[0]))) < 1e-8


def test_speed_identity_on_random_closed_curves():
    rng = np.random.default_rng(4)
    for _ in range(100):
        c = rng.uniform(0.02, 0.3)
        s = solve_tan_equation(1 + c, 1 - c)
        shift = int(rng.integers(0, 4))
        p = StepPotential(np.roll(s.potential().values, shift),
                          np.roll(s.potential().lengths, shift))
        curve = integrate_frame(p.as_circle_function(), random_sl2(rng), grid=256)
        g = recover_diffeo(curve)
        r2 = np.sum(curve.gamma ** 2, axis=1)
        fd = g.derivative(curve.x, 1)
        assert np.max(np.abs(fd * r2 - 1)) < 1e-6


def test_recover_preconditions():
    open_curve = integrate_frame(constant(1.2, PI), E, grid=256)
    with pytest.raises(CurveNotClosed):
        recover_diffeo(open_curve)
    curve = integrate_frame(constant(1.0, PI), E, grid=256)
    frames = curve.frames.copy()
    frames[10, :, 0] = 0.0
    with pytest.raises(OriginHit):
        recover_diffeo(PlaneCurve(curve.x, frames, curve.pieces, curve.degree))
    # a curve winding three times (k = 9) closes but is not a diffeomorphism
    with pytest.raises(CurveNotClosed):
        recover_diffeo(integrate_frame(constant(9.0, PI), E, grid=512))


def test_schwarzian_of_identity():
    g = ProjDiffeo.identity()
    x = np.linspace(0, PI, 50)
    assert np.max(np.abs(schwarzian(g)(x))) == 0.0
    assert np.max(np.abs(potential_of(g)(x) - 1)) == 0.0


def test_affine_chart_checks():
    u = sympy.Symbol("u")
    a, b, c, d = 2.0, -1.0, 0.5, 3.0

    def S(expr, pts):
        ds = [sympy.lambdify(u, sympy.diff(expr, u, n)) for n in (1, 2, 3)]
        return classic_schwarzian(*(np.array([f(t) for t in pts], dtype=float) for f in ds))

    pts = np.linspace(-1.2, 1.2, 25)
    np.testing.assert_allclose(S(sympy.tan(u), pts), 2.0, atol=1e-12)
    np.testing.assert_allclose(S((a * u + b) / (c * u + d), pts), 0.0, atol=1e-12)


def test_schwarzian_vanishes_only_for_constant_one():
    k = parse_expression("1+0.2*cos(4*x)", PI)
    s = solve_tan_equation(1.3, 0.7)
    g = recover_diffeo(integrate_frame(s.potential().as_circle_function(), E, grid=512))
    x = np.linspace(0.05, PI - 0.05, 97)
    S = schwarzian(g)(x)
    assert np.max(np.abs(S)) > 0.1
    np.testing.assert_allclose(0.5 * S + 1, s.potential()(x), atol=1e-6)
    del k


def test_derivative_underflow():
    g = ProjDiffeo(lambda x: x, (lambda x: np.where(np.abs(x - 1) < 0.01, 0.0, 1.0),
                                 np.zeros_like, np.zeros_like))
    with pytest.raises(DerivativeUnderflow):
        schwarzian(g)


def test_ghys_example():
    k = parse_expression("1+0.2*cos(4*x)", PI)
    sol = solve_converse_ghys(k)
    assert sum(sol.closure) < 1e-6
    x = sol.curve.x
    assert np.max(np.abs(potential_of(sol.g)(x) - sol.potential(x))) < 1e-5
    g0, g1 = sol.curve.gamma[0], sol.curve.gamma[-1]
    assert np.linalg.norm(g0 + g1) < 1e-6
    assert np.max(np.abs(sol.curve.wronskian() - 1)) < 1e-9
    assert sol.phi.min_slope() > 0
    assert sol.to_json()["k1"] == pytest.approx(1 + sol.c)


def test_ghys_nonsmooth_potential():
    k = from_callable(lambda x: 1 + 0.15 * np.sign(np.sin(4 * x)) * np.abs(np.sin(4 * x)) ** 1.5,
                      PI, kinks=PI / 4 * np.arange(4))
    sol = solve_converse_ghys(k)
    assert sum(sol.closure) < 1e-6
    assert sol.schwarzian_residual < 1e-5


def test_ghys_too_few_sign_changes():
    with pytest.raises(InsufficientSignChanges) as info:
        solve_converse_ghys(parse_expression("1.5+0.2*cos(4*x)", PI))
    assert (info.value.found, info.value.needed) == (0, 4)
    with pytest.raises(InsufficientSignChanges) as info:
        solve_converse_ghys(parse_expression("1+0.2*cos(2*x)", PI))
    assert (info.value.found, info.value.needed) == (2, 4)
