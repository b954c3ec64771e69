import math

import numpy as np
import pytest

from battery import BATTERY, battery_id, cached_return_map
from nilreturn.errors import AssumptionViolation, OrderTooLow
from nilreturn.retmap import classify, closed_form_leading, matching_step, return_map, side_value_series
from nilreturn.series import CoeffSeries
from nilreturn.sysnorm import SystemSpec, normalize
from nilreturn.vsolver import solve_v


def _one(order):
    return CoeffSeries([1.0] + [0.0] * order)


def test_side_value_hamiltonian():
    ns = normalize(SystemSpec([1], [0], 1, 2))
    vs = solve_v(ns, 6)
    side = side_value_series(ns, vs, _one(6))
    assert side[0] == pytest.approx(1.0, abs=1e-15)
    assert all(abs(c) <= 1e-15 for c in side.coeffs[1:])
    side = side_value_series(ns, vs, CoeffSeries([1.0, 1.0, 0.0, 0.0]))
    np.testing.assert_allclose(side.coeffs, [1.0, 2.0, 1.0, 0.0], atol=1e-14)


def test_side_value_constant_g():
    ns = normalize(SystemSpec([1], [1], 1, 2))
    vs = solve_v(ns, 6)
    side = side_value_series(ns, vs, _one(6))
    assert side[0] == pytest.approx(1.0, abs=1e-15)
    assert side[2] == pytest.approx(math.pi / 2, abs=1e-12)


def test_side_value_rejects_far_eta():
    ns = normalize(SystemSpec([1], [1], 1, 2))
    with pytest.raises(ValueError):
        side_value_series(ns, solve_v(ns, 4), CoeffSeries([2.0, 0.0]))


def test_matching_examples():
    res = return_map(SystemSpec([1], [0], 1, 2), 8)
    np.testing.assert_allclose(res.eta_upper.coeffs, _one(7).coeffs, atol=1e-14)
    res = return_map(SystemSpec([1], [1], 1, 2), 8)
    up = res.eta_upper
    assert up[0] == 1.0 and up[1] == 0.0
    assert up[2] == pytest.approx(math.pi / 2, abs=1e-12)
    assert abs(up[3]) <= 1e-12


@pytest.mark.parametrize("case", BATTERY, ids=battery_id)
def test_theta_factor_kills_upper_coefficient(case):
    res = cached_return_map(case)
    ns = res.systems["F"]
    if ns.theta_p == -1:
        assert abs(res.eta_upper[ns.p]) <= 1e-12


def test_hamiltonian_return_is_identity():
    res = return_map(SystemSpec([1], [0], 2, 3), 12)
    assert res.Z[1] == pytest.approx(1.0, abs=1e-15)
    assert all(abs(res.Z[n]) <= 1e-12 for n in range(2, 13))
    assert closed_form_leading(res.systems["F"]) == (0.0, 0.0)
    assert classify(res).kind == "center_candidate"


def test_worked_examples():
    res = return_map(SystemSpec([1], [1], 1, 2), 8)
    assert res.Z[3] == pytest.approx(math.pi, abs=1e-6)
    assert abs(res.Z[2]) <= 1e-12
    assert closed_form_leading(res.systems["F"]) == pytest.approx((math.pi, 0.0), abs=1e-14)
    c = classify(res)
    assert (c.kind, c.order, c.sign) == ("focus", 3, 1)
    res = return_map(SystemSpec([1], [0, 1], 1, 1), 8)
    assert abs(res.Z[2]) <= 1e-12
    assert res.Z[3] == pytest.approx(math.pi, abs=1e-10)


def test_odd_theta_with_flat_f_gives_zero_leading_terms():
    ns = normalize(SystemSpec([1], [1], 2, 3))
    assert ns.theta_p == -1
    assert closed_form_leading(ns) == (0.0, 0.0)


def test_return_map_input_checks():
    with pytest.raises(OrderTooLow):
        return_map(SystemSpec([1], [1], 1, 3), 3)
    with pytest.raises(AssumptionViolation):
        return_map(SystemSpec([1], [1], 3, 2), 6)


@pytest.mark.parametrize("case", BATTERY, ids=battery_id)
def test_structure(case):
    res = cached_return_map(case)
    p = res.p
    assert res.Z[0] == 0.0 and res.Z[1] == pytest.approx(1.0, abs=1e-15)
    assert all(abs(res.Z[n]) <= 1e-12 for n in range(2, p + 1))
    z1, z2 = res.leading_closed_form
    assert abs(res.Z[p + 1] - z1) <= 1e-8
    assert abs(res.Z[p + 2] - z2) <= 1e-8


@pytest.mark.parametrize("case", BATTERY, ids=battery_id)
def test_lower_and_upper_matchings_agree_to_leading_order(case):
    res = cached_return_map(case)
    s, v = res.systems, res.solutions
    eta = _one(11)
    upper = matching_step(s["F"], s["J2"], v["F"], v["J2"], eta)
    lower = matching_step(s["J3"], s["J4"], v["J3"], v["J4"], eta)
    for n in range(res.p + 2):
        assert abs(upper[n] - lower[n]) <= 1e-9


@pytest.mark.parametrize("scale", [2.0, -0.5, 7.0])
def test_classification_invariant_under_common_scaling(scale):
    base = return_map(SystemSpec([1, 0.5], [1, -1], 1, 2), 10)
    scaled = return_map(SystemSpec([scale, 0.5 * scale], [scale, -scale], 1, 2), 10)
    np.testing.assert_allclose(scaled.Z.coeffs, base.Z.coeffs, atol=1e-12)
    assert classify(scaled) == classify(base)


def test_negative_f0_runs():
    res = return_map(SystemSpec([-1], [1], 1, 2), 6)
    assert res.Z[3] == pytest.approx(-math.pi, abs=1e-10)
