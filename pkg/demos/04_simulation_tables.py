"""Desk-scale preview of the three benchmark settings.

The acceptance suite runs these settings at full scale (50-100 reps);
this preview uses a handful of reps so it finishes in about a minute.
With so few reps each fraction moves in steps of 1/reps, so read the
numbers as a smoke signal rather than an estimate. The chains run past
the 5000-iteration library default because the lasso initialization
carries dozens of extra columns at p >= 500 and the sampler needs time
to strip them before the inclusion averages settle.
"""

import time

from ebsparse.sampler import ChainConfig
from ebsparse.simharness import preset_setting, run_setting

CONFIGS = (
    (1, 8, 20000),
    (2, 4, 20000),
    (3, 8, 20000),
)


def main():
    header = f"{'setting':8s} {'p_bar_0':>8s} {'p_bar_1':>8s} {'exact':>6s} {'contain':>8s} {'fdr':>6s} {'secs':>6s}"
    print(header)
    for number, reps, iterations in CONFIGS:
        spec = preset_setting(number, reps=reps, seed=17)
        start = time.perf_counter()
        m = run_setting(spec, ChainConfig(iterations=iterations))
        secs = time.perf_counter() - start
        print(
            f"{number:<8d} {m.p_bar_0:8.4f} {m.p_bar_1:8.4f} {m.pr_exact:6.2f} "
            f"{m.pr_contain:8.2f} {m.fdr:6.3f} {secs:6.1f}"
        )
    print("(acceptance-scale reference: setting 1 exact ~0.62, setting 2 ~0.94, setting 3 ~0.34)")


if __name__ == "__main__":
    main()
