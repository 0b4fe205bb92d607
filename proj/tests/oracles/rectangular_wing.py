"""Lift slope of an aspect-ratio-10 rectangular flat wing by two methods
written independently of the C++ solver:
  1. a plain horseshoe-vortex lattice (4 chordwise x 20 spanwise panels,
     freestream-only Kutta-Joukowski force);
  2. the Glauert series solution of the lifting-line equation with a0 = 2 pi."""
import numpy as np


def segment(p, a, b):
    r1, r2 = p - a, p - b
    cr = np.cross(r1, r2)
    n = cr @ cr
    if n < 1e-20:
        return np.zeros(3)
    return cr / (4 * np.pi * n) * ((b - a) @ (r1 / np.linalg.norm(r1) - r2 / np.linalg.norm(r2)))


def horseshoe(p, a, b, length=1000.0):
    far = np.array([length, 0.0, 0.0])
    return segment(p, a + far, a) + segment(p, a, b) + segment(p, b, b + far)


def lattice_slope(nchord=4, nspan_half=10, ar=10.0):
    span, chord = ar, 1.0
    ys = np.linspace(-span / 2, span / 2, 2 * nspan_half + 1)
    xs = np.linspace(0, chord, nchord + 1)
    panels = []
    for j in range(2 * nspan_half):
        for i in range(nchord):
            dx = xs[i + 1] - xs[i]
            a = np.array([xs[i] + dx / 4, ys[j], 0.0])
            b = np.array([xs[i] + dx / 4, ys[j + 1], 0.0])
            cp = np.array([xs[i] + 0.75 * dx, 0.5 * (ys[j] + ys[j + 1]), 0.0])
            panels.append((a, b, cp))
    m = np.array([[horseshoe(cp, a, b)[2] for a, b, _ in panels] for _, _, cp in panels])
    alpha = np.radians(5.0)
    v = np.array([np.cos(alpha), 0.0, np.sin(alpha)])
    gamma = np.linalg.solve(m, -np.full(len(panels), v[2]))
    force = sum(g * np.cross(v, b - a) for (a, b, _), g in zip(panels, gamma))
    cl = (-np.sin(alpha) * force[0] + np.cos(alpha) * force[2]) / (0.5 * span * chord)
    return cl / alpha


def lifting_line_slope(ar=10.0, terms=60):
    a0, chord, span = 2 * np.pi, 1.0, ar
    theta = np.arange(1, terms + 1) * np.pi / (2 * terms)
    n = np.arange(1, 2 * terms, 2)
    mu = chord * a0 / (4 * span)
    a = np.array([np.sin(n * t) * (np.sin(t) + n * mu) for t in theta])
    coeff = np.linalg.solve(a, mu * np.sin(theta))
    return np.pi * ar * coeff[0]


if __name__ == "__main__":
    print(repr(lattice_slope()), repr(lifting_line_slope()))
