"""Compare landing criteria against a blind baseline over seeded batches.

Runs the same seeds under the biggest-zone policy, the oldest-zone policy,
and a random-touchdown baseline, then prints a side-by-side table of
success rate and risk metrics.
"""

import argparse

from slzsim import ScenarioConfig, aggregate, simulate_mission


def run_batch(policy, criterion, frac_moving, seeds):
    logs = []
    for seed in seeds:
        cfg = ScenarioConfig(seed=seed, criterion=criterion,
                             frac_moving=frac_moving)
        logs.append(simulate_mission(cfg, policy=policy))
    return aggregate(logs)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--frac-moving", type=float, default=0.2)
    args = parser.parse_args()

    seeds = range(args.runs)
    rows = [
        ("biggest", run_batch("slz", "biggest", args.frac_moving, seeds)),
        ("oldest", run_batch("slz", "oldest", args.frac_moving, seeds)),
        ("random", run_batch("random", "biggest", args.frac_moving, seeds)),
    ]

    print(f"{args.runs} missions each, {args.frac_moving:.0%} of actors "
          f"moving\n")
    print(f"{'policy':<8} {'success':>8} {'warning':>8} {'danger':>7} "
          f"{'nearest':>8}")
    for name, rep in rows:
        print(f"{name:<8} {rep.success_rate:>8.2f} {rep.warning_avg:>8.2f} "
              f"{rep.danger_avg:>7.2f} {rep.nearest_person_avg:>7.2f}m")


if __name__ == "__main__":
    main()
