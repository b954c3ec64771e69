"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import math

import numpy as np

from battery import BATTERY, battery_id, cached_normalize, cached_return_map, spec_of
from nilreturn.oracle import numeric_return, verify
from nilreturn.profile import p_direct, phi, phi_closed
from nilreturn.retmap import classify, matching_step, return_map
from nilreturn.series import CoeffSeries
from nilreturn.sysnorm import SystemSpec
from nilreturn.vsolver import contraction_bounds, fixed_point_residual, solve_v

EPS_FIT = tuple(float(e) for e in np.geomspace(0.02, 0.08, 4))


def test_criterion_1_hamiltonian_identity(record_acceptance):
    worst_z, worst_num = 0.0, 0.0
    for k in (1, 2, 3):
        for l in (k, k + 1):
            spec = SystemSpec([1], [0], k, l)
            res = return_map(spec, 12)
            worst_z = max(worst_z, max(abs(res.Z[n]) for n in range(2, 13)))
            for eps in (0.05, 0.1):
                worst_num = max(worst_num, abs(numeric_return(spec, eps).z_return - eps))
    ok = worst_z <= 1e-12 and worst_num <= 1e-9
    record_acceptance(1, "Hamiltonian identity", ok, f"max|Z_n|={worst_z:.1e}, max|z-eps|={worst_num:.1e}")
    assert ok


def test_criterion_2_closed_form_leading_terms(record_acceptance):
    worst = 0.0
    for case in BATTERY:
        res = cached_return_map(case)
        p = res.p
        z1, z2 = res.leading_closed_form
        worst = max(worst, abs(res.Z[p + 1] - z1), abs(res.Z[p + 2] - z2))
    ok = worst <= 1e-8
    record_acceptance(2, "closed-form leading terms", ok, f"{len(BATTERY)} systems, max diff={worst:.1e}")
    assert ok


def test_criterion_3_worked_constant(record_acceptance):
    spec = SystemSpec([1], [1], 1, 2)
    z3 = return_map(spec, 12).Z[3]
    eps = np.geomspace(0.02, 0.08, 8)
    disp = np.array([numeric_return(spec, e).z_return - e for e in eps])
    # generic polynomial model; the tail beyond eps**7 is below the fit's resolution
    basis = np.stack([eps**j for j in range(3, 8)], axis=1)
    fitted = np.linalg.lstsq(basis, disp, rcond=None)[0][0]
    ok = abs(z3 - math.pi) <= 1e-6 and abs(fitted - math.pi) <= 1e-3
    record_acceptance(3, "worked constant Z3 = pi", ok, f"series err={abs(z3 - math.pi):.1e}, oracle-fit err={abs(fitted - math.pi):.1e}")
    assert ok


def test_criterion_4_remainder_order(record_acceptance):
    bad = []
    for case in BATTERY:
        res = cached_return_map(case)
        order = res.p + 2
        rep = verify(spec_of(case), order, EPS_FIT, result=res)
        if not rep.checks.get("remainder_order") or rep.errors:
            bad.append((battery_id(case), rep.fit))
    ok = not bad
    record_acceptance(4, "remainder order (truncation at p+2)", ok, f"{len(BATTERY) - len(bad)}/{len(BATTERY)} systems")
    assert ok, bad


def test_criterion_5_fixed_point_residual(record_acceptance):
    deltas = (0.04, -0.04, 0.08, -0.08)
    bad = []
    worst = 0.0
    for case in BATTERY:
        ns = cached_normalize(case)
        vs = solve_v(ns, 6)
        r = fixed_point_residual(vs, deltas)
        worst = max(worst, r)
        if r > 1e-8:
            d0 = contraction_bounds(ns).delta0
            bad.append(f"{battery_id(case)}: {r:.1e} (delta0={d0:.3f})")
    ok = not bad
    record_acceptance(5, "fixed-point residual at order 6", ok, f"{len(BATTERY) - len(bad)}/{len(BATTERY)} systems, max={worst:.1e}")
    assert ok, bad


def test_criterion_6_special_function_identity(record_acceptance):
    worst = max(abs(phi(p, k, 1.0) - phi_closed(p, k)) for p in range(1, 7) for k in range(1, 7))
    e11 = abs(phi(1, 1, 1.0) - 1 / 3)
    e21 = abs(phi(2, 1, 1.0) - math.pi / 16)
    ok = worst <= 1e-10 and e11 <= 1e-12 and e21 <= 1e-12
    record_acceptance(6, "Phi closed form", ok, f"max diff={worst:.1e}, Phi11 err={e11:.1e}, Phi21 err={e21:.1e}")
    assert ok


def test_criterion_7_p_bounds(record_acceptance):
    xi = np.linspace(0.0, 1.0, 101)
    bad = []
    for case in BATTERY:
        ns = cached_normalize(case)
        k, c0, r = ns.k, ns.c0, ns.radius_r
        lo, hi = 1 - 2 * k * c0, 2 * k * (1 + c0)
        # the upper bound is attained at xi = 0, |delta| = r; allow rounding only
        slack = 1e-12 * hi
        for delta in np.linspace(-r, r, 21):
            P = p_direct(ns, xi, delta)
            if P.min() < lo - slack or P.max() > hi + slack:
                bad.append((battery_id(case), float(delta)))
    ok = not bad
    record_acceptance(7, "P bounds on the validated radius", ok, f"{len(BATTERY) - len({b[0] for b in bad})}/{len(BATTERY)} systems")
    assert ok, bad


def test_criterion_8_classifier(record_acceptance):
    bad = []
    for case in BATTERY:
        res = cached_return_map(case)
        ns = res.systems["F"]
        p, F0, F1 = ns.p, ns.F[0], ns.F[1]
        c = classify(res)
        even = (p + ns.k - 1) % 2 == 0
        if even and F0 != 0:
            expect = p + 1
        elif not even and F0 != 0 and F1 != 0:
            expect = p + 2
        else:
            expect = None
        if expect is not None and (c.kind != "focus" or c.order != expect):
            bad.append(battery_id(case))
        # a center needs F(0) = 0 for even p+k-1 and F'(0) = 0 for odd p+k-1
        if c.kind == "center_candidate" and ((even and F0 != 0) or (not even and F1 != 0)):
            bad.append(battery_id(case))
    ok = not bad
    record_acceptance(8, "center/focus classifier", ok, f"{len(BATTERY) - len(bad)}/{len(BATTERY)} systems")
    assert ok, bad


def test_criterion_9_matching_agreement(record_acceptance):
    worst = 0.0
    for case in BATTERY:
        res = cached_return_map(case)
        s, v = res.systems, res.solutions
        eta = CoeffSeries([1.0] + [0.0] * (res.Z.order - 1))
        upper = matching_step(s["F"], s["J2"], v["F"], v["J2"], eta)
        lower = matching_step(s["J3"], s["J4"], v["J3"], v["J4"], eta)
        worst = max(worst, max(abs(upper[n] - lower[n]) for n in range(res.p + 2)))
    ok = worst <= 1e-9
    record_acceptance(9, "matching maps agree through order p+1", ok, f"max diff={worst:.1e}")
    assert ok
