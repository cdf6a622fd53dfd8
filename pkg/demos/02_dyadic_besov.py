"""Dyadic frequency analysis on the torus.

Shows the smooth partition of unity, block decomposition, Besov norms with
the low/high split, and the space-time (time-inside-the-sum) norms used by
the decay functionals.
"""

import numpy as np

from nsplab import (Annulus, Ball, BesovSpec, Grid, besov_norm,
                    build_partition, chemin_lerner_norm, chi, dyadic_block,
                    lp_norm, phi, random_field)

grid = Grid(d=2, n=64, L=2 * np.pi)
part = build_partition(grid)

print("== partition of unity ==")
print(f"chi(0.5) = {chi(0.5)}, chi(2.0) = {chi(2.0)} (plateau and support)")
print(f"sum_j phi(2^-j r) at r = 1: {sum(phi(2.0**-j * 1.0) for j in range(-12, 12)):.15f}")
print(f"max partition defect on the lattice: {part.partition_error():.2e}")
print(f"block range on this grid: j in [{min(part.js)}, {max(part.js)}]")

print("\n== block structure ==")
f = random_field(grid, Annulus(2), seed=7)
for j in (0, 1, 2, 3, 4):
    print(f"  ||block_{j} f||_2 = {dyadic_block(f, j).l2():.4f}")
print("(an annulus-2 field only touches blocks 1..3)")

print("\n== Besov norms ==")
g = random_field(grid, Ball(3), seed=8)
b11 = besov_norm(g, BesovSpec(s=0.0, p=2.0, r=1))
b22 = besov_norm(g, BesovSpec(s=0.0, p=2.0, r=2))
print(f"Besov(0,2,1) = {b11:.4f} >= L2 = {lp_norm(g, 2):.4f} >= Besov(0,2,2)/1 = {b22:.4f}")
low = besov_norm(g, BesovSpec(s=1.0, p=2.0, r=1, restriction="low", j0=0))
high = besov_norm(g, BesovSpec(s=1.0, p=2.0, r=1, restriction="high", j0=0))
full = besov_norm(g, BesovSpec(s=1.0, p=2.0, r=1))
print(f"low(j<=0) {low:.4f} + high(j>=-1) {high:.4f} vs full {full:.4f} "
      "(one overlap block, so the split over-counts slightly)")

print("\n== time-inside-the-sum norms ==")
times = np.linspace(0.0, 2.0, 200)
series = [f * np.exp(-t) for t in times]
spec = BesovSpec(s=0.5, p=2.0, r=1)
sup_norm = chemin_lerner_norm(times, series, np.inf, spec)
int_norm = chemin_lerner_norm(times, series, 1.0, spec)
print(f"theta = inf: {sup_norm:.4f} (equals the t = 0 norm {besov_norm(f, spec):.4f})")
print(f"theta = 1:   {int_norm:.4f} "
      f"(closed form (1 - e^-2) * norm = {(1 - np.exp(-2.0)) * besov_norm(f, spec):.4f})")
