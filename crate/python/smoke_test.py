"""Smoke test for the qcrit_py extension module."""

import math

import qcrit_py as q


def close(a, b, tol):
    assert abs(a - b) <= tol, (a, b, tol)


def main():
    p = q.ModelParams(-1.0, 1.0, 40)
    c = p.constants()
    close(c["t_c"], -2.0, 1e-15)
    close(c["lambda_c"], 0.25, 1e-15)

    r_var = q.recurrence(p, 60)
    ev = q.PsiEvaluator(p, 60)
    close(max(abs(a - b) for a, b in zip(r_var, ev.r)), 0.0, 1e-8)
    close(ev.psi(3, -0.7), -ev.psi(3, 0.7), 1e-14)
    close(ev.kernel(40, 0.3, -0.2), ev.kernel(40, -0.2, 0.3), 1e-12)
    assert ev.correlation(40, [0.1, 0.4]) > 0.0

    hm = q.HastingsMcLeod(-10.0, 8.0, 2000)
    close(hm.u(0.0), 0.3670616, 1e-6)
    assert hm.residual() < 1e-10
    assert hm.y0() > 0.0

    phi = q.PhiSolution(0.0)
    assert phi.parity_defect < 1e-3
    close(phi.kernel(0.2, -0.4), phi.kernel(-0.4, 0.2), 1e-12)

    close(q.sine_kernel(0.0, 0.5), 2.0 / math.pi, 1e-15)
    close(q.airy_kernel(0.0, 0.0), 0.2588194037928068 ** 2, 1e-15)

    edge = q.scaling_limit_check("edge", 100)
    assert 0.0 < edge["sup_error"] < 0.1, edge

    rows, rates = q.compare(q.ModelParams(-1.0, 1.0, 100), [100, 200], ["exterior"])
    assert len(rows) == 2 and rates["exterior"] > 0.5, (rows, rates)

    try:
        q.ModelParams(-1.0, -1.0, 10)
    except ValueError:
        pass
    else:
        raise AssertionError("negative g accepted")

    ok, text = q.selftest()
    assert ok, text
    print("smoke test passed")


if __name__ == "__main__":
    main()
