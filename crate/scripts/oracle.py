#!/usr/bin/env python3
"""High-precision reference values for the test suite.

Each value is computed once with mpmath at 40 digits and pasted into the
Rust tests as a frozen constant. Re-run to audit them:

    python3 scripts/oracle.py
"""
import mpmath as mp

mp.mp.dps = 40


def osc(f, a, b=mp.inf, period=2 * mp.pi):
    """Integral of an oscillatory integrand, split at half periods."""
    if b == mp.inf:
        return mp.quadosc(f, [a, mp.inf], period=period)
    n = int((b - a) / (period / 2)) + 1
    pts = mp.linspace(a, b, n + 1)
    return mp.quad(f, pts)


def show(name, value):
    value = mp.mpc(value)
    print(f"{name:44s} re={mp.nstr(value.real, 17):>26s} im={mp.nstr(value.imag, 17):>26s}")


# dual Cesaro mean of sin: x * int_x^inf sin t / t^2 dt
for x in (10, 50, 100):
    show(f"x*int_x^inf sin/t^2, x={x}", x * osc(lambda t: mp.sin(t) / t**2, x))

# dual M*_r of sin: r x^r int_x^inf sin t t^(-r-1) dt
for r in (mp.mpf(1) / 2, 2):
    x = 20
    show(f"M*_r sin, r={r}, x={x}", r * x**r * osc(lambda t: mp.sin(t) * t ** (-r - 1), x))

# M_r of sin: r x^-r int_1^x sin t t^(r-1) dt
for r in (mp.mpf(1) / 2, 2):
    x = 100
    show(f"M_r sin, r={r}, x={x}", r * x ** (-r) * osc(lambda t: mp.sin(t) * t ** (r - 1), 1, x))

# Hoelder iterates of sin at x = 100
x = mp.mpf(100)
show("H_2 sin, x=100", osc(lambda t: mp.sin(t) * mp.log(x / t) / x, 1, x))
show("H_3 sin, x=100", osc(lambda t: mp.sin(t) * mp.log(x / t) ** 2 / (2 * x), 1, x))

# S_exp(1) on sin(t^2)
for j in range(6, 11):
    x = mp.mpf(2) ** j
    # substitute t = sqrt(w) to get a constant-period integrand in w
    g = lambda w: mp.sin(w) * mp.exp(-(x - mp.sqrt(w))) / (2 * mp.sqrt(w))
    lo = max(0, x - 60) ** 2
    n = int((x**2 - lo) / mp.pi) + 1
    val = mp.quad(g, mp.linspace(lo, x**2, n + 1))
    show(f"S_exp1 sin(t^2), x=2^{j}", val)

# counterexample kernel on e^{it}: int_0^x e^{i(x-s)} phi(s) ds
a = mp.mpf(1)
c = (1 + a**2) / a**2
phi = lambda s: c * mp.exp(-s) * (1 - mp.exp(1j * a * s) / (1 + 1j * a))
for x in (1, 3, 10):
    show(f"S_cex1 e^(it), x={x}", mp.quad(lambda s: mp.exp(1j * (x - s)) * phi(s), [0, x]))

# M_{1/2} on 1 + e^{-t}
r = mp.mpf(1) / 2
for x in (10, 1000):
    val = r * x ** (-r) * mp.quad(lambda t: (1 + mp.exp(-t)) * t ** (r - 1), [1, 10, x])
    show(f"M_1/2 (1+e^-t), x={x}", val)

# multiplicative counterexample transform at x = 1 (should vanish)
psi_hat = lambda xi: c * (1 / (1 + 1j * xi) - 1 / ((1 + 1j * a) * (1 + 1j * (xi - a))))
show("cex transform at alpha", psi_hat(a))
