"""Smoke test for the projbar_py extension module.

Loads the module straight from the cargo target directory (building it
first if necessary) and exercises the main operations end to end:
parameter algebra, barrier evaluation, certification, solving, and the
polarity map.

Run from anywhere:  python3 python/smoke_test.py
"""

import importlib.util
import math
import os
import subprocess
import sys
from importlib.machinery import ExtensionFileLoader

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load_module():
    candidates = [
        os.path.join(ROOT, "target", profile, name)
        for profile in ("release", "debug")
        for name in ("libprojbar_py.so", "libprojbar_py.dylib", "projbar_py.dll")
    ]
    path = next((p for p in candidates if os.path.exists(p)), None)
    if path is None:
        subprocess.run(
            ["cargo", "build", "-p", "projbar-py", "--release"],
            cwd=ROOT,
            check=True,
        )
        path = next(p for p in candidates if os.path.exists(p))
    loader = ExtensionFileLoader("projbar_py", path)
    spec = importlib.util.spec_from_loader("projbar_py", loader)
    module = importlib.util.module_from_spec(spec)
    loader.exec_module(module)
    return module


pb = load_module()

UNIT_INTERVAL = """{
    "barrier": {"polyhedron": {"A": [[-1.0], [1.0]], "b": [0.0, 1.0]}},
    "objective": [1.0],
    "x0": [0.25]
}"""

TRIANGLE_SPEC = """{
    "polyhedron": {"A": [[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], "b": [0.0, 0.0, 1.0]}
}"""

SYMMETRIC_INTERVAL_SPEC = """{
    "polyhedron": {"A": [[-1.0], [1.0]], "b": [1.0, 1.0]}
}"""


def check_parameter_algebra():
    assert pb.gamma_from_nu(2.0) == 0.0
    nu = 7.5
    assert abs(pb.nu_from_gamma(pb.gamma_from_nu(nu)) - nu) < 1e-12

    star, low = pb.affine_step_limits()
    assert abs(star - 0.4166475) < 1e-6
    assert abs(low - 0.1901324) < 1e-6

    star0, low0 = pb.step_limits(0.0)
    assert math.isinf(star0) and low0 == 0.0
    star1, low1 = pb.step_limits(1.0 / math.sqrt(2.0))
    assert 0.0 < low1 < star1 < float("inf")
    print("parameter algebra ok")


def check_evaluation():
    barrier = pb.Problem.from_json(UNIT_INTERVAL).barrier
    assert barrier.dim == 1
    assert barrier.nu == 2.0
    assert barrier.gamma == 0.0

    assert abs(barrier.value([0.5]) - math.log(2.0)) < 1e-12
    assert abs(barrier.gradient([0.5])[0]) < 1e-12
    assert barrier.hessian([0.5])[0][0] > 0.0
    assert barrier.contains([0.5]) and not barrier.contains([1.5])
    assert abs(barrier.sigma([0.25], [1.0]) - 1.0 / 0.75) < 1e-9

    lg = barrier.local_geometry([0.25], [1.0])
    assert abs(lg.g0**2 - (lg.s0 - lg.p0**2)) < 1e-9
    assert abs(lg.c3) <= 2e-9 * lg.g0**3, "interval constant is zero"

    exact = barrier.third_directional([0.25], [1.0])
    assert abs(lg.c3 - (exact - 6.0 * lg.s0 * lg.p0 + 4.0 * lg.p0**3)) < 1e-9
    print("evaluation ok")


def check_certification():
    triangle = pb.Barrier.from_json(TRIANGLE_SPEC)
    center = triangle.analytic_center(start=[0.25, 0.25])
    assert max(abs(c - 1.0 / 3.0) for c in center) < 1e-8

    gamma_hat = triangle.estimate_gamma(samples=200, seed=11, start=[0.25, 0.25])
    declared = triangle.gamma
    assert abs(declared - 1.0 / math.sqrt(2.0)) < 1e-12
    assert 0.5 <= gamma_hat <= declared + 1e-9

    try:
        triangle.estimate_gamma()
    except ValueError:
        pass
    else:
        raise AssertionError("missing start point must be reported")
    print("certification ok")


def check_solver():
    problem = pb.Problem.from_json(UNIT_INTERVAL)
    for method in ("affine", "projective"):
        sol = problem.solve(method=method)
        assert 0.0 <= sol.objective <= 1e-6, (method, sol.objective)
        assert sol.gap_bound <= 1e-6
        assert len(sol.trace) == sol.iterations
        final = sol.trace[-1]
        assert final[0] == sol.iterations and final[5] == sol.gap_bound

    try:
        problem.solve(method="simplex")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown method must be rejected")
    print("solver ok")


def check_duality():
    barrier = pb.Barrier.from_json(SYMMETRIC_INTERVAL_SPEC)
    p = barrier.dual_point([0.3])
    assert abs(p[0] - (-0.3)) < 1e-9, "odd map on a symmetric interval"
    assert abs(barrier.dual_point([0.0])[0]) < 1e-12

    value, minimizer = barrier.dual_value(p)
    assert abs(value - barrier.value([0.3])) < 1e-9, "self-dual set"
    assert abs(minimizer[0] - 0.3) < 1e-9

    unit = pb.Problem.from_json(UNIT_INTERVAL).barrier
    assert abs(unit.dual_point([0.25])[0] - 2.0) < 1e-9
    value, _ = unit.dual_value([2.0])
    assert abs(value - (-1.24245332489400016)) < 1e-8

    try:
        pb.Barrier.from_json("{not json")
    except ValueError as e:
        assert "column" in str(e)
    else:
        raise AssertionError("malformed JSON must be rejected")
    print("duality ok")


if __name__ == "__main__":
    check_parameter_algebra()
    check_evaluation()
    check_certification()
    check_solver()
    check_duality()
    print("smoke test passed")
    sys.exit(0)
