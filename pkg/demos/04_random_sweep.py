"""
Stress-testing the inequalities on random instances
===================================================

Every pointwise inequality in the package holds for any state and any pair of
Hermitian operators, so we can hammer them with random draws: Haar-random
states and Gaussian unitary ensemble matrices, in dimensions 2 through 8.

The relative slack (rhs - lhs) / max(|lhs|, |rhs|, 1) must never be
meaningfully negative. The same sweep is available on the command line as
``qaccel sweep --seed 42``.
"""

from qaccel.runner import random_sweep

arts = random_sweep(seed=42, dims=range(2, 9), count=1000)
for check, stats in arts.summary["checks"].items():
    q = stats["quantiles"]
    print(f"{check:24s} min {stats['min_relative_slack']:+.2e}  median {q['0.5']:.3f}  "
          f"violations {stats['violations']}")
    if "min_dominance_gap" in stats:
        print(f"{'':24s} squared bound never exceeds the plain one: gap >= {stats['min_dominance_gap']:.2e}")

# Some instances come within round-off of equality: the relations are tight.
worst = min(arts.tables["instances"].rows, key=lambda r: r[7])
print(f"tightest instance: {worst[0]} #{worst[1]} (dim {worst[2]}), relative slack {worst[7]:.2e}")
