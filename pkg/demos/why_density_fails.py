"""
Low density is the wrong question
=================================

The cleanest version of the failure mode, in one dimension with every
density known exactly. Outliers drawn from N(0, 0.01) sit dead center
inside N(0, 1): their in-distribution density is HIGHER than a typical
inlier's, so thresholding p_in flags the wrong tail. The likelihood ratio
p_out / p_in uses the same information and gets it right.
"""

import math

import numpy as np

from flats import (
    SynthRun,
    analytic_lr_score,
    auroc,
    gaussian_log_density,
    neg_ind_density_scorer,
    nested_gaussian_specs,
    sample,
    ump_auroc_check,
)

in_spec, out_spec = nested_gaussian_specs()
print(f"inliers  ~ N({in_spec.mean[0]}, {in_spec.stddev[0]}^2)")
print(f"outliers ~ N({out_spec.mean[0]}, {out_spec.stddev[0]}^2)")

# At the origin the ratio already says "10x more likely under the
# outlier model"; one standard deviation out it collapses.
for x in (0.0, 0.5, 1.0):
    lr = analytic_lr_score(in_spec, out_spec, x)
    print(f"log ratio at x={x}: {lr:+.4f}")
print(f"(ln 10 = {math.log(10):.4f})")

# Score both populations with the density-only detector and the ratio.
run = SynthRun(seed=7, n_per_side=10_000, in_spec=in_spec, out_spec=out_spec)
auroc_density, auroc_lr = ump_auroc_check(run, neg_ind_density_scorer(in_spec))
print(f"\nauroc of -log p_in : {auroc_density:.4f}  (worse than coin flip)")
print(f"auroc of log ratio : {auroc_lr:.4f}")

# The two numbers are exact mirrors here: on this pair the ratio is a
# strictly decreasing function of -log p_in, so it reverses every rank.
print(f"sum = {auroc_density + auroc_lr:.12f}")

# Sanity: a typical outlier draw really does have high p_in.
xs = np.asarray(sample(out_spec, 5, seed=1).values, dtype=np.float64).ravel()
print("\nlog p_in at outlier draws:", np.round(gaussian_log_density(in_spec, xs[:, None]), 3))
print("log p_in at x = 2.0      :", round(float(gaussian_log_density(in_spec, np.array([2.0]))), 3))
