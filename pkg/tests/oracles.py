"""Slow, loop-based reference computations used to check the fast paths.

Nothing here imports the package; each function re-derives its quantity
from the defining formula.
"""

import math

import numpy as np


def psi_loop(x, points, sigma):
    total = 0.0
    for p in points:
        sq = sum((a - b) ** 2 for a, b in zip(x, p))
        total += math.exp(-sq / (2 * sigma ** 2))
    return total


def laplacian_fd(f, x, h=1e-4):
    """Central second differences summed over coordinates."""
    x = np.asarray(x, dtype=float)
    f0 = f(x)
    out = 0.0
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        out += (f(x + e) - 2 * f0 + f(x - e)) / h ** 2
    return out


def gradient_fd(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def potential_fd(x, points, sigma, h=1e-4):
    """(sigma^2 / 2) * laplacian(psi) / psi with a numerical Laplacian."""
    f = lambda z: psi_loop(z, points, sigma)
    return sigma ** 2 / 2 * laplacian_fd(f, x, h) / f(np.asarray(x, dtype=float))


def subtractive_loop(points, r_a, r_b, accept=0.5, reject=0.15, max_centers=100):
    """Direct transcription of the density / revision / two-threshold loop.

    Returns (selected indices, density of each at selection time).
    """
    pts = [list(map(float, p)) for p in points]
    n = len(pts)

    def sq(a, b):
        return sum((u - v) ** 2 for u, v in zip(a, b))

    dens = [sum(math.exp(-sq(pts[k], pts[j]) / (r_a / 2) ** 2) for j in range(n)) for k in range(n)]

    def argmax(vals, skip):
        best, arg = -math.inf, None
        for i, v in enumerate(vals):
            if i not in skip and v > best:
                best, arg = v, i
        return arg

    first = argmax(dens, set())
    d_first = dens[first]
    selected, chosen = [first], [d_first]
    skip = {first}

    def revise(c):
        dc = dens[c]
        for k in range(n):
            dens[k] = dens[k] - dc * math.exp(-sq(pts[k], pts[c]) / (r_b / 2) ** 2)

    revise(first)
    while len(selected) < max_centers and len(skip) < n:
        c = argmax(dens, skip)
        skip.add(c)
        ratio = dens[c] / d_first
        if ratio > accept:
            ok = True
        elif ratio < reject:
            break
        else:
            d_min = min(math.sqrt(sq(pts[c], pts[s])) for s in selected)
            ok = d_min / r_a + ratio >= 1
        if not ok:
            dens[c] = 0.0
            continue
        selected.append(c)
        chosen.append(dens[c])
        revise(c)
    return selected, chosen


def anfis_forward_loop(means, widths, consequents, p, order="first"):
    """Layer-by-layer evaluation with scalar loops: returns (w, wbar, y_rules, y_hat)."""
    r, n = len(means), len(p)
    w = []
    for i in range(r):
        prod = 1.0
        for j in range(n):
            prod *= math.exp(-((p[j] - means[i][j]) ** 2) / (2 * widths[i][j] ** 2))
        w.append(prod)
    total = sum(w)
    wbar = [wi / total for wi in w]
    ys = []
    for i in range(r):
        y = consequents[i][0]
        if order == "first":
            for j in range(n):
                y += consequents[i][j + 1] * p[j]
        ys.append(y)
    return w, wbar, ys, sum(a * b for a, b in zip(wbar, ys))


def nearest_loop(points, centers):
    labels = []
    for p in points:
        best, arg = math.inf, None
        for c, q in enumerate(centers):
            d = sum((a - b) ** 2 for a, b in zip(p, q))
            if d < best:
                best, arg = d, c
        labels.append(arg)
    return labels
