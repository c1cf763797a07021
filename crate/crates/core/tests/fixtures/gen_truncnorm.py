"""Writes truncnorm_cases.json: truncated-normal CDF and SF values at 50 digits.

Closed-form erfc values are cross-checked against mpmath quadrature on a
subset before writing.
"""
import json
import random

import mpmath as mp

mp.mp.dps = 50
rng = random.Random(20240611)


def ncdf(t):
    return mp.erfc(-t / mp.sqrt(2)) / 2


def mass(lo, hi):
    # P(lo < Z < hi) without cancellation in either tail.
    if lo >= 0:
        return ncdf(-lo) - ncdf(-hi)
    return ncdf(hi) - ncdf(lo)


def to_std(v, mean, sd):
    if v is None:
        return None
    return (mp.mpf(v) - mean) / sd


def truncnorm(mean, var, region, x):
    sd = mp.sqrt(var)
    below = above = total = mp.mpf(0)
    for lo, hi in region:
        l = -mp.inf if lo is None else (mp.mpf(lo) - mean) / sd
        h = mp.inf if hi is None else (mp.mpf(hi) - mean) / sd
        t = (mp.mpf(x) - mean) / sd
        total += mass(l, h)
        below += mass(l, min(h, t)) if t > l else 0
        above += mass(max(l, t), h) if t < h else 0
    return below / total, above / total


def quad_check(mean, var, region, x):
    with mp.workdps(90):
        return _quad_check(mean, var, region, x)


def _quad_check(mean, var, region, x):
    sd = mp.sqrt(var)
    # Integrate in standardized units on a fine partition so Gauss-Legendre
    # resolves steep tails.
    t = (mp.mpf(x) - mean) / sd
    std = [
        (-mp.inf if lo is None else (mp.mpf(lo) - mean) / sd, mp.inf if hi is None else (mp.mpf(hi) - mean) / sd)
        for lo, hi in region
    ]
    peak = lambda a, b: 0 if a < 0 < b else min(a * a, b * b)
    # Quadrature error is absolute, so each piece is integrated relative to
    # its own peak density and rescaled to the region's peak.
    m2 = min(peak(a, b) for a, b in std)

    def integral(a, b):
        # Mass beyond 40 units past the centre or the finite end is below
        # 1e-340 and dropped.
        if a == -mp.inf:
            a = min(b, 0) - 40
        if b == mp.inf:
            b = max(a, 0) + 40
        m = peak(a, b)
        pts = mp.linspace(a, b, 2 + int(4 * (b - a)))
        return mp.quad(lambda u: mp.exp(-(u * u - m) / 2), pts, method="gauss-legendre") * mp.exp(-(m - m2) / 2)

    total = below = mp.mpf(0)
    for a, b in std:
        total += integral(a, b)
        if t > a:
            below += integral(a, min(b, t))
    return below / total


def random_case(far):
    mean = rng.uniform(-5, 5)
    var = 10 ** rng.uniform(-2, 1.5)
    sd = var ** 0.5
    if far:
        t = rng.uniform(8, 35) * rng.choice([-1, 1])
    else:
        t = rng.uniform(-6, 6)
    x = mean + t * sd
    # Intervals in standardized units around x, one of which holds x.
    pieces = []
    width = rng.uniform(0.05, 3.0)
    left = t - rng.uniform(0.0, 1.0) * width
    right = left + width
    if rng.random() < 0.3:
        left = None
    elif rng.random() < 0.3:
        right = None
    pieces.append((left, right))
    for _ in range(rng.randint(0, 2)):
        gap = rng.uniform(0.1, 4.0)
        w = rng.uniform(0.1, 3.0)
        if rng.random() < 0.5 and pieces[0][0] is not None:
            hi = min(p[0] for p in pieces if p[0] is not None) - gap
            pieces.append((hi - w, hi))
        elif pieces[0][1] is not None:
            lo = max(p[1] for p in pieces if p[1] is not None) + gap
            pieces.append((lo, lo + w))
    pieces.sort(key=lambda p: -mp.inf if p[0] is None else p[0])
    region = [
        (None if lo is None else mean + lo * sd, None if hi is None else mean + hi * sd)
        for lo, hi in pieces
    ]
    return mean, var, region, x


cases = []
for i in range(1000):
    mean, var, region, x = random_case(far=i % 3 == 0)
    cdf, sf = truncnorm(mp.mpf(mean), mp.mpf(var), region, x)
    if i % 10 == 0:
        q = quad_check(mp.mpf(mean), mp.mpf(var), region, x)
        assert abs(q - cdf) <= mp.mpf("1e-20") * max(abs(cdf), mp.mpf("1e-300")), (i, q, cdf)
    cases.append(
        {
            "mean": mean,
            "var": var,
            "region": [[lo, hi] for lo, hi in region],
            "x": x,
            "cdf": mp.nstr(cdf, 20),
            "sf": mp.nstr(sf, 20),
        }
    )

with open("truncnorm_cases.json", "w") as f:
    f.write("[\n" + ",\n".join(json.dumps(c) for c in cases) + "\n]\n")
print(len(cases), "cases")
