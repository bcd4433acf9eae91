"""Smoke test for the Python bindings. Build first with

    maturin develop -m crates/py/Cargo.toml
"""

import math

import actconv


def main():
    p = actconv.KernelParams(q=2.0, beta=0.5)
    assert abs(p.mass() - 1.0) < 1e-8
    assert abs(p.psi(0.7) - p.psi(-0.7)) < 1e-15
    x, top = p.g_max()
    assert abs(top - math.tanh(0.25) / 2) < 1e-15
    assert p.tail_mass(3.0) <= p.tail_mass_bound(9)

    xs = [-1.0, 0.0, 0.5, 2.0]
    for kind in ("basic", "kantorovich", "quadrature"):
        op = actconv.Operator(kind, 16)
        ones = op("one", xs)
        assert all(abs(v - 1.0) < 1e-9 for v in ones), (kind, ones)

    basic = actconv.Operator("basic", 32)
    named = basic("sin", xs)
    called = basic(math.sin, xs, sup_norm=1.0)
    assert all(abs(a - b) < 1e-12 for a, b in zip(named, called))
    assert abs(basic.central_moment(0.3, 1)) < 1e-12

    def broken(_):
        raise ZeroDivisionError("nope")

    try:
        basic(broken, [0.0], sup_norm=1.0)
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("callable exception was swallowed")

    try:
        actconv.KernelParams(q=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative q accepted")

    rows, rate = actconv.sweep("sin", "basic", [9, 16, 25, 36, 49])
    assert all(r["satisfied"] for r in rows)
    assert rate is not None and rate <= -0.4
    omega = actconv.modulus("sin", 0.1)
    assert abs(omega - 2 * math.sin(0.05)) < 1e-12
    bound = actconv.jackson("basic", 1 / 3, 9)
    assert bound > rows[0]["sup_error"]

    print("python smoke test passed:", [round(r["sup_error"], 6) for r in rows], "rate", round(rate, 3))


if __name__ == "__main__":
    main()
