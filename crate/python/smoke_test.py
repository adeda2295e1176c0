"""Smoke test for the pyinterpol extension module.

Build and install first:  pip install --no-build-isolation -e crates/python
"""

import math

import pyinterpol as pl


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    # (X, X): K(t, x) = min(1, t) ||x||, so x = (1, 1) in l1 gives 2 at t = 1.
    same = pl.Couple(1, 1, [1.0, 1.0], [1.0, 1.0])
    lo, up = same.k_functional(1.0, [1, 1])
    assert lo <= 2.0 <= up and close(up, 2.0), (lo, up)

    # Real norm on (X, X), q = 1, theta = 1/2: (1/(1-θ) + 1/θ)||x|| = 4.
    l2 = pl.Couple(2, 2, [1.0, 1.0], [1.0, 1.0])
    lo, up = l2.real_norm([1, 0], 0.5, 1)
    assert lo <= 4.0 <= up and (up - lo) / up < 1e-6, (lo, up)

    # Calderón space of weights (1, 4) and (4, 1) at θ = 1/2 is l2 with weights (2, 2).
    c = pl.Couple(2, "inf", [1.0, 4.0], [4.0, 1.0])
    n = c.calderon_norm([3, 4j], 0.5)
    # 1/p = 1/4: ||x|| = (|2·3|^4 + |2·4|^4)^(1/4).
    assert close(n, (6**4 + 8**4) ** 0.25), n

    # δ(s) = max(1/(|s|-1), 1/(e-|s|)).
    s = complex(math.exp(0.5), 0)
    assert close(pl.delta_constant(s), max(1 / (abs(s) - 1), 1 / (math.e - abs(s))))

    # f(z) = z - s divided by (z - s) is the constant 1.
    lo_g, coeffs = pl.cancel_divide([[-s], [1.0]], 0, s)
    assert lo_g == 0 and close(abs(coeffs[0][0] - 1), 0.0, 1e-12), coeffs

    # Identity on a couple: every interpolated inverse norm is 1, one interval (0, 1).
    t = pl.Operator([[1, 0], [0, 1]], c)
    report = t.sweep([0.25, 0.5, 0.75])
    assert report["intervals"] == [[0.0, 1.0]], report["intervals"]
    assert all(v["passed"] for v in report["verdicts"])
    assert sorted(abs(z) for z in t.spectrum()) == [1.0, 1.0]

    # A diagonal operator on weighted l1 / l_inf has exact endpoint norms.
    d = pl.Operator([[2, 0], [0, 0.5]], pl.Couple(1, "inf", [1, 1], [1, 1]))
    lo, up = d.norm(0.5)
    assert close(lo, 2.0) and close(up, 2.0), (lo, up)

    # A reduced acceptance criterion through the bindings.
    names = pl.criteria()
    assert names[0] == "cancellation" and len(names) == 11
    rep = pl.run_criterion("rotation", seed=1, scale=0.1)
    assert rep["passed"] and rep["cases"] == 200, rep

    try:
        pl.Couple(2, 2, [1.0, 0.0], [1.0, 1.0])
    except ValueError as e:
        assert "weights" in str(e)
    else:
        raise AssertionError("zero weight accepted")

    print("pyinterpol smoke test: ok")


if __name__ == "__main__":
    main()
