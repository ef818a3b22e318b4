"""Seed sweep used to pick the default Private and Ropsten timing parameters.

For each candidate profile, run the default scenario (10 repetitions) for
seeds 1..10 and report the median of the per-seed full-cycle medians, the
spread across seeds, and how often Private < candidate holds. Targets:
Private near 44.3 s and Ropsten near 69.9 s full-cycle medians.

    python scripts/calibrate_profiles.py
"""

from __future__ import annotations

import itertools
import statistics

from vaxchain import bench
from vaxchain.ledger import DEFAULT_PROFILES, DifficultyClass, NetworkName, NetworkProfile
from vaxchain.scenario import default_scenario

SEEDS = range(1, 11)


def sweep(profile: NetworkProfile) -> list[float]:
    return [bench.run(default_scenario(seed=s), profile).full_cycle_median / 1000 for s in SEEDS]


def main() -> None:
    print("private candidates")
    for mean in (15.0, 16.0, 16.5, 17.0):
        p = NetworkProfile(NetworkName.PRIVATE, mean, DifficultyClass.SETTABLE, False)
        meds = sweep(p)
        print(f"  mean={mean:5.1f}  centre={statistics.median(meds):6.1f}s  range=[{min(meds):.1f}, {max(meds):.1f}]")

    private = sweep(DEFAULT_PROFILES[NetworkName.PRIVATE])
    print("ropsten candidates (vs default private)")
    for mean, p_cong, extra in itertools.product((16.5, 17.0, 18.0, 19.0), (0.1, 0.2, 0.3), (10.0, 20.0, 30.0, 40.0)):
        p = NetworkProfile(NetworkName.ROPSTEN, mean, DifficultyClass.MEDIUM, True, p_cong, extra)
        meds = sweep(p)
        seed42 = bench.run(default_scenario(seed=42), p).full_cycle_median / 1000
        wins = sum(a < b for a, b in zip(private, meds))
        print(
            f"  mean={mean:5.1f} p={p_cong} extra={extra:5.1f}  centre={statistics.median(meds):6.1f}s"
            f"  range=[{min(meds):.1f}, {max(meds):.1f}]  seed42={seed42:.1f}s  private<ropsten {wins}/10"
        )


if __name__ == "__main__":
    main()
