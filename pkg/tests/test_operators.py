import math
import random

import numpy as np
import pytest

from hyp3.cubic import delta1, derivative_quadratic, discriminant, solve_cubic_real
from hyp3.errors import OperatorSpecError
from hyp3.expr import parse_timefn as P
from hyp3.operators import (
    Operator2,
    Operator3,
    measure_separation,
    regularized_cubic,
)


def _op(name, coeffs, horizon=1.0, dim=1):
    return Operator3(name, dim, horizon, {k: P(v) for k, v in coeffs.items()})


WAVE = _op("wave", {(1, (2,)): "-1"})
OLEINIK = _op("oleinik", {(1, (2,)): "-t^2", (0, (2,)): "t"})


def test_principal_wave_operator():
    c = WAVE.principal(0.3, np.array([5.0]))
    assert (c.a1.v, c.a2.v, c.a3.v) == (0.0, -25.0, 0.0)


def test_principal_time_dependent_jets():
    op = _op("t2", {(1, (2,)): "-t^2"})
    c = op.principal(0.5, np.array([8.0]))
    assert c.a2.v == -0.25 * 64
    assert c.a2.d1 == -64.0
    assert c.a2.d2 == -128.0


def test_principal_at_zero_frequency_reduces_to_temporal_terms():
    c = OLEINIK.principal(0.7, np.array([0.0]))
    assert (c.a1.v, c.a2.v, c.a3.v) == (0.0, 0.0, 0.0)


def test_lower_symbols_constant_coefficients_have_zero_drift():
    op = _op("c", {(0, (2,)): "3", (1, (1,)): "2", (0, (1,)): "1"})
    m, n, p = op.lower_polys(0.4, np.array([2.0]))
    assert all(c.d1 == 0 and c.d2 == 0 for c in m.coeffs)
    assert all(c.d1 == 0 for c in n.coeffs)
    s = m.at(1.7)
    assert s.d_t == 0 and s.d_tt == 0


def test_lower_symbols_values():
    # order-2 part c*t*dx^2 stores the real monomial c*t*xi^2
    op = _op("m", {(0, (2,)): "2*t"})
    m, n, p = op.lower_polys(0.5, np.array([3.0]))
    assert m.value_at(11.0) == 1.0 * 9.0  # tau-independent
    assert n.value_at(11.0) == 0.0
    # order-1 part d_t gives exactly the root variable
    op2 = _op("n", {(1, (0,)): "1"})
    _, n2, _ = op2.lower_polys(0.5, np.array([3.0]))
    assert n2.value_at(7.25) == 7.25


def test_checked_m_examples():
    # L = tau (tau^2 - t^2 xi^2), M = c t xi^2: corrected symbol (c+1) t xi^2
    for c_coef in (1.0, 2.5):
        op = _op("olk", {(1, (2,)): "-t^2", (0, (2,)): f"{c_coef}*t"})
        mc = op.checked_m_poly(0.5, np.array([4.0]))
        assert mc.coeffs[1].v == 0 and mc.coeffs[2].v == 0
        assert abs(mc.coeffs[0].v - (c_coef + 1.0) * 0.5 * 16.0) < 1e-12
    # constant principal part: no correction
    op = _op("const", {(1, (2,)): "-1", (0, (2,)): "1"})
    mc = op.checked_m_poly(0.3, np.array([4.0]))
    assert mc.value_at(2.0) == 16.0
    # order-2 symbol chosen as half the principal drift cancels exactly
    op = _op("cancel", {(1, (2,)): "-t^2", (0, (2,)): "-t"})
    mc = op.checked_m_poly(0.7, np.array([4.0]))
    assert abs(mc.value_at(3.0)) < 1e-12


def test_checked_n_examples():
    # L = (tau - t^2 xi)^3, M = N = 0: corrected order-1 symbol is -xi
    op = _op("trip", {(2, (1,)): "-3*t^2", (1, (2,)): "3*t^4", (0, (3,)): "-t^6"})
    nc = op.checked_n_poly(0.8, np.array([2.0]))
    assert abs(nc.coeffs[0].v - (-2.0)) < 1e-12
    assert abs(nc.coeffs[1].v) < 1e-12
    # M = m(t) tau^2, N = 0, constant L: corrected symbol is -m'(t) tau
    op = _op("mt2", {(2, (0,)): "sin(t)"})
    nc = op.checked_n_poly(0.3, np.array([5.0]))
    assert abs(nc.coeffs[1].v + math.cos(0.3)) < 1e-12
    assert nc.coeffs[0].v == 0.0
    # constant coefficients: no correction at all
    op = _op("cn", {(0, (1,)): "4"})
    nc = op.checked_n_poly(0.3, np.array([5.0]))
    assert nc.value_at(1.23) == 20.0


def test_regularize_triple_root():
    op = _op("t3", {})
    reg = op.regularized(0.0, np.array([7.0]), 1.0 / 7.0)
    assert np.allclose(reg.roots.roots.r, (-math.sqrt(6), 0.0, math.sqrt(6)), atol=1e-12)


def test_regularize_eps_zero_is_identity():
    c = WAVE.principal(0.2, np.array([10.0]))
    reg = WAVE.regularized(0.2, np.array([10.0]), 0.0, with_jets=False)
    assert (reg.cubic.a1.v, reg.cubic.a2.v, reg.cubic.a3.v) == (c.a1.v, c.a2.v, c.a3.v)
    assert np.allclose(reg.roots.roots.r, (-10.0, 0.0, 10.0), atol=1e-9)


def test_regularize_strict_operator_shifts_within_unit():
    reg = WAVE.regularized(0.0, np.array([10.0]), 0.1)
    r = reg.roots.roots.r
    assert np.all(np.abs(np.array(r) - np.array([-10.0, 0.0, 10.0])) < 2.0)
    assert min(r[1] - r[0], r[2] - r[1]) > 1.0


def test_regularized_discriminant_expansion_and_crit_shift():
    rng = random.Random(11)
    for _ in range(2000):
        roots = [rng.uniform(-5, 5) for _ in range(3)]
        a1 = -sum(roots)
        a2 = roots[0] * roots[1] + roots[1] * roots[2] + roots[2] * roots[0]
        a3 = -roots[0] * roots[1] * roots[2]
        from hyp3.cubic import cubic_from_floats
        c = cubic_from_floats(a1, a2, a3)
        e = math.exp(rng.uniform(math.log(0.3), math.log(3.0)))
        reg = regularized_cubic(c, e * e)
        db24 = 4 * a1 * a1 - 12 * a2
        lhs = discriminant(reg)
        rhs = (discriminant(c) + 0.5 * e ** 2 * db24 ** 2
               + 36 * e ** 4 * db24 + 864 * e ** 6)
        assert abs(lhs - rhs) <= 1e-9 * max(abs(lhs), abs(rhs), 1.0)
        db24_reg = 4 * reg.a1.v.real ** 2 - 12 * reg.a2.v.real
        assert abs((db24_reg - db24) - 72 * e * e) <= 1e-12 * 72 * e * e


def test_auxiliary_roots_triple():
    op = _op("t3", {})
    aux = op.auxiliary(0.0, np.array([9.0]))
    assert np.allclose(aux.lam.roots.r, (-math.sqrt(6), 0, math.sqrt(6)), atol=1e-12)
    assert np.allclose(aux.mu, (-math.sqrt(2), math.sqrt(2)), atol=1e-12)
    assert np.allclose(aux.mu_d1, (0.0, 0.0), atol=1e-15)


def test_auxiliary_shift_bounded_uniformly_in_xi():
    for mag in (16.0, 256.0, 4096.0):
        aux = WAVE.auxiliary(0.0, np.array([mag]))
        plain = (-mag, 0.0, mag)
        shift = max(abs(a - b) for a, b in zip(aux.lam.roots.r, plain))
        assert shift < 3.0


def test_auxiliary_constant_in_t_for_constant_cubic():
    aux = WAVE.auxiliary(0.33, np.array([64.0]))
    assert np.allclose(aux.lam.d1, 0.0, atol=1e-12)
    assert np.allclose(aux.lam.d2, 0.0, atol=1e-12)


def test_comparability_of_regularized_and_plain_gaps():
    # |tau_{j,eps} - tau_{h,eps}| stays within fixed multiples of
    # |tau_j - tau_h| + 1, and the root shift stays bounded, along the ladder
    for op in (WAVE, OLEINIK):
        ratios = []
        shifts = []
        for mag in (16.0, 64.0, 256.0, 1024.0, 4096.0):
            xi = np.array([mag])
            for t in np.linspace(0.0, 1.0, 41):
                c = op.principal(float(t), xi)
                plain = solve_cubic_real(c).r
                reg = op.regularized(float(t), xi, 1.0 / mag,
                                     principal=c, with_jets=False).roots.roots.r
                for j, h in ((0, 1), (1, 2), (2, 0)):
                    ratios.append(abs(reg[j] - reg[h]) / (abs(plain[j] - plain[h]) + 1.0))
                shifts.append(max(abs(a - b) for a, b in zip(reg, plain)))
        assert 0.2 < min(ratios) and max(ratios) < 5.0
        assert max(shifts) < 4.0


def test_lagrange_reconstruction_of_order2_symbol():
    rng = random.Random(7)
    op = _op("full", {(1, (2,)): "-(2+sin(t))^2", (2, (0,)): "0.5",
                      (1, (1,)): "0.25*t", (0, (2,)): "0.1"})
    xi = np.array([32.0])
    for t in (0.1, 0.7, 1.3):
        c = op.principal(t, xi)
        mc = op.checked_m_poly(t, xi, principal=c)
        reg = op.regularized(t, xi, 1.0 / 32.0, principal=c, with_jets=False)
        r = reg.roots.roots.r
        ell = []
        for j, h, l in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            ell.append(mc.value_at(r[j]) / ((r[j] - r[h]) * (r[j] - r[l])))
        for _ in range(100):
            tau = rng.uniform(-3 * 32.0, 3 * 32.0)
            rec = sum(e * (tau - r[h]) * (tau - r[l])
                      for e, (j, h, l) in zip(ell, ((0, 1, 2), (1, 2, 0), (2, 0, 1))))
            ref = mc.value_at(tau)
            assert abs(rec - ref) <= 1e-8 * max(1.0, abs(ref))


def test_symbol_jets_linear_in_coefficients():
    base = {(0, (2,)): "sin(t)+2", (1, (1,)): "t", (2, (0,)): "cos(t)"}
    scaled = {k: f"2.5*({v})" for k, v in base.items()}
    m1 = _op("a", base).lower_polys(0.6, np.array([3.0]))[0].at(1.1)
    m2 = _op("b", scaled).lower_polys(0.6, np.array([3.0]))[0].at(1.1)
    for f in ("value", "d_t", "d_tt", "d_tau", "d_tau2", "d_t_d_tau"):
        assert abs(getattr(m2, f) - 2.5 * getattr(m1, f)) < 1e-12 * max(1, abs(getattr(m2, f)))


def test_principal_part_must_be_real():
    with pytest.raises(OperatorSpecError):
        _op("bad", {(1, (2,)): "i*t"})


def test_table_shape_validation():
    with pytest.raises(OperatorSpecError):
        _op("bad", {(3, (0,)): "1"})
    with pytest.raises(OperatorSpecError):
        _op("bad", {(1, (3,)): "1"})
    with pytest.raises(OperatorSpecError):
        _op("bad", {(1, (1, 1)): "1"})
    with pytest.raises(OperatorSpecError):
        Operator2("bad", 1, 1.0, {(1, (2,)): P("1")})


def test_measure_separation_stability():
    rows = measure_separation(OLEINIK, ladder=[2.0 ** k for k in range(4, 17)], nt=128)
    gaps = [r["min_gap"] for r in rows]
    shifts = [r["max_shift"] for r in rows]
    assert min(gaps) > 0.5
    for a, b in zip(gaps, gaps[1:]):
        assert b >= 0.9 * a
    for a, b in zip(shifts, shifts[1:]):
        assert b <= 1.1 * a + 1e-9
