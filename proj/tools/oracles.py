#!/usr/bin/env python3
"""Independent oracles for the values frozen in the C++ tests.

Exact rationals via fractions, integrals via scipy. Run: python3 tools/oracles.py
"""
from fractions import Fraction as F
import math

import numpy as np
from scipy import integrate


def doubling(x):
    return (2 * x) % 1


def roof_xsq(x):
    return 1 + x * x


def birkhoff(x, n, f, r):
    s = F(0)
    for _ in range(n):
        s += r(x)
        x = f(x)
    return s


def periodic_point(word):
    # x = (sum_k w_k 2^(p-1-k)) / (2^p - 1) for the doubling map
    p = len(word)
    return F(sum(b << (p - 1 - k) for k, b in enumerate(word)), 2**p - 1)


def witness():
    s1 = birkhoff(periodic_point([0, 0, 1, 1]), 4, doubling, roof_xsq)
    s2 = birkhoff(periodic_point([0, 1, 0, 1]), 4, doubling, roof_xsq)
    return s1, s2, abs(s1 - s2)


def three_branch_tails(depth=12):
    # Cell [0,1/3) maps onto [1/3,1); the other cells are full. Returning to
    # [0,1/3) after leaving it: each step stays out with relative mass 2/3.
    return {n: F(2, 3) ** (n - 2) for n in range(2, depth + 2)}


def duality_xx():
    # int (2x mod 1) x dx = int x (L x) dx with L v(x) = (v(x/2) + v((x+1)/2))/2
    lhs = integrate.quad(lambda x: doubling(x) * x, 0, 1, points=[0.5])[0]
    rhs = integrate.quad(lambda x: x * (x / 2 + 0.25), 0, 1)[0]
    return lhs, rhs


def suspension_moments():
    rbar = integrate.quad(roof_xsq, 0, 1)[0]
    phi = lambda u, x: math.cos(2 * math.pi * u / rbar) * (1 + x)
    opts = dict(epsabs=1e-10, epsrel=1e-10)

    def e(g):
        return integrate.dblquad(g, 0, 1, 0, roof_xsq, **opts)[0] / rbar

    mean = e(phi)

    def shifted(t):
        def g(u, x):
            v, y = u + t, x
            while v >= roof_xsq(y):
                v -= roof_xsq(y)
                y = doubling(y)
            return phi(v, y) * phi(u, x)
        return g

    # split x at the points where u + t first crosses the roof is unnecessary
    # at this accuracy; quad subdivides adaptively.
    rho0 = e(lambda u, x: phi(u, x) ** 2) - mean**2
    rho_half = e(shifted(0.5)) - mean**2
    return rbar, mean, rho0, rho_half


def solenoid_domination(c, rho, d=2):
    # sup over theta of ||DF||_F^2 = d^2 + (2 pi rho)^2 + 2/c^2, times 1/c
    full = d * d + (2 * math.pi * rho) ** 2 + 2 / c**2
    return full / c


if __name__ == "__main__":
    s1, s2, gap = witness()
    print("witness sums", s1, s2, "gap", gap)
    print("tails", {n: str(v) for n, v in three_branch_tails().items()})
    print("duality g=v=x", duality_xx(), "exact", F(7, 24))
    print("domination (2,20,1/4)", solenoid_domination(20, 0.25))
    print("domination (2,10,1/2)", solenoid_domination(10, 0.5))
    rbar, mean, rho0, rho_half = suspension_moments()
    print("suspension 1+x^2: rbar", rbar, "E phi", mean, "rho(0)", rho0, "rho(1/2)", rho_half)
