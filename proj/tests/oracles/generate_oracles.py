#!/usr/bin/env python3
"""Independent high-precision reference values, frozen into oracle_values.hpp.

Run: python3 tests/oracles/generate_oracles.py > tests/oracles/oracle_values.hpp
"""
import mpmath as mp

mp.mp.dps = 40


def ball_volume(n):
    return mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2 + 1)


def sphere_area(n):
    return 2 * mp.pi ** (mp.mpf(n + 1) / 2) / mp.gamma(mp.mpf(n + 1) / 2)


def hs_constant(n, alpha, b_real):
    n = mp.mpf(n)
    c = mp.mpf(2) ** (n - 2) / alpha * (1 - alpha) ** (-1 / n) * (n / (n - 1)) * ball_volume(int(n)) ** (-1 / n)
    return c * mp.pi / 2 if b_real else c


def zonal(n, r, coeffs):
    """Integrals over S^n(r) of v = sum c_k cos^k(theta), by mpmath quadrature."""
    v = lambda th: sum(c * mp.cos(th) ** k for k, c in enumerate(coeffs))
    dv = lambda th: sum(-k * c * mp.cos(th) ** (k - 1) * mp.sin(th) for k, c in enumerate(coeffs) if k)
    w = lambda th: sphere_area(n - 1) * mp.mpf(r) ** n * mp.sin(th) ** (n - 1)
    q = mp.mpf(2 * n) / (n - 2) if n > 2 else None
    out = {
        "v_abs": mp.quad(lambda th: w(th) * abs(v(th)), [0, mp.pi]),
        "v_sq": mp.quad(lambda th: w(th) * v(th) ** 2, [0, mp.pi]),
        "grad_abs": mp.quad(lambda th: w(th) * abs(dv(th)) / r, [0, mp.pi]),
        "grad_sq": mp.quad(lambda th: w(th) * (dv(th) / r) ** 2, [0, mp.pi]),
        "pow_hs": mp.quad(lambda th: w(th) * abs(v(th)) ** (mp.mpf(n) / (n - 1)), [0, mp.pi]),
    }
    if q is not None:
        out["pow_sob"] = mp.quad(lambda th: w(th) * abs(v(th)) ** q, [0, mp.pi])
    return out


def fmt(x):
    return mp.nstr(x, 20)


def main():
    print("#pragma once")
    print("// Generated by generate_oracles.py (mpmath, 40 digits). Do not edit.")
    print()
    print("namespace oracle {")
    print()
    print("struct HsValue { int n; double alpha; bool b_real; double value; };")
    print("inline constexpr HsValue kHoffmanSpruck[] = {")
    for n in range(2, 9):
        for alpha in (mp.mpf(1) / 4, mp.mpf(1) / 2, mp.mpf(n) / (n + 1)):
            for b_real in (False, True):
                a = "%d.0 / %d.0" % (n, n + 1) if alpha == mp.mpf(n) / (n + 1) else fmt(alpha)
                print("    {%d, %s, %s, %s}," % (n, a, "true" if b_real else "false", fmt(hs_constant(n, alpha, b_real))))
    print("};")
    print()
    print("struct BallValue { int n; double ball_volume; double sphere_area; };")
    print("inline constexpr BallValue kBalls[] = {")
    for n in range(0, 17):
        print("    {%d, %s, %s}," % (n, fmt(ball_volume(n)), fmt(sphere_area(n))))
    print("};")
    print()
    # v = 1 + cos(theta) on the unit S^3
    z = zonal(3, 1, [1, 1])
    print("// v = 1 + cos(theta) on S^3(1)")
    print("struct ZonalValues { double v_abs, v_sq, grad_abs, grad_sq, pow_hs, pow_sob; };")
    print("inline constexpr ZonalValues kZonalS3 = {%s, %s, %s, %s, %s, %s};" % tuple(
        fmt(z[k]) for k in ("v_abs", "v_sq", "grad_abs", "grad_sq", "pow_hs", "pow_sob")))
    print()
    print("}  // namespace oracle")


if __name__ == "__main__":
    main()
