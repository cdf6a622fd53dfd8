"""Randomized stress tests of the dyadic-calculus estimates.

Each inequality gets reproducible random fields; the empirical max/median
ratios and their stability under grid refinement stand in for a
grid-independent constant. This is evidence, never proof.
"""

from nsplab.inequalities import (check_bernstein_derivative,
                                 check_bernstein_multiplier, check_commutator,
                                 check_composition, check_embedding,
                                 check_interpolation,
                                 check_nonclassical_product,
                                 check_product_algebra,
                                 check_product_negative_index,
                                 check_product_two_indices,
                                 check_time_convolution)

ns = (64, 128)

print("== derivative and multiplier bounds on band-limited fields ==")
rep = check_bernstein_derivative(ns=ns, trials=30)
print(f"{rep.case}: max ratio {rep.max_ratio(64):.4f} -> {rep.max_ratio(128):.4f} "
      f"(growth {rep.refinement_growth():.3f})")
rep = check_bernstein_multiplier(ns=ns, trials=30)
lo, hi = rep.meta["band"]
print(f"{rep.case}: ratios confined to the annulus band [{lo:.3f}, {hi:.3f}]")

print("\n== product laws ==")
for rep in (check_product_algebra(ns=ns, trials=20),
            check_product_two_indices(ns=ns, trials=20),
            check_product_negative_index(ns=ns, trials=20)):
    print(f"{rep.case}: max {rep.max_ratio(64):.4f}, median {rep.median_ratio(64):.4f}, "
          f"stable: {rep.grid_stable()}")

print("\n== low-frequency control of high-frequency products ==")
rep = check_nonclassical_product(ns=ns, trials=12)
print(f"{rep.case}: max ratio {rep.max_ratio(64):.4f}, "
      f"smallest stabilizing cutoff shift N0 = {rep.meta['stable_n0']}")

print("\n== composition bounds (F(0) = 0 is load-bearing) ==")
for which in ("rational", "pressure", "sin"):
    rep = check_composition(which, ns=ns, trials=20)
    print(f"F = {rep.meta['F']:<32} max ratio {rep.max_ratio(64):.4f}")

print("\n== commutator ==")
rep = check_commutator(ns=ns, trials=10)
print(f"fitted constant {rep.meta['fitted_constant']:.4f}, "
      f"max normalized block-sum {rep.meta['max_normalized_l1']:.3f} (<= 1.5)")

print("\n== embeddings and interpolation ==")
rep = check_embedding(ns=ns, trials=30)
print(f"{rep.case}: max ratio {rep.max_ratio(64):.6f} (<= 1)")
rep = check_interpolation(ns=ns, trials=20)
print(f"{rep.case}: max ratio {rep.max_ratio(64):.6f} (exactly Hoelder, <= 1)")

print("\n== weighted time convolution ==")
out = check_time_convolution(1.0, 2.0, 0.0)
print(f"sup over t of the weighted integral: {out['sup']:.4f} (finite, flat: {out['flat']})")
