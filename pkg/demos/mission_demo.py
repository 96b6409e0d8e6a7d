"""Fly one autonomous landing mission and narrate what happened.

Simulates a seeded crowd, runs the perception loop every tick, and prints
the command timeline plus the safety metrics of the selected landing zone.
"""

import argparse

from slzsim import ScenarioConfig, aggregate, simulate_mission


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--criterion", choices=("biggest", "oldest"),
                        default="biggest")
    parser.add_argument("--frac-moving", type=float, default=0.2)
    args = parser.parse_args()

    cfg = ScenarioConfig(seed=args.seed, criterion=args.criterion,
                         frac_moving=args.frac_moving)
    log = simulate_mission(cfg)

    print(f"seed {args.seed}, criterion {args.criterion}, "
          f"{len(log.frames[0].actors)} actors "
          f"({args.frac_moving:.0%} moving)")

    last = None
    for f in log.frames:
        phase = f.command.split()[0]
        if phase != last:
            tgt = ""
            if f.target is not None:
                tgt = (f"  target ({f.target[0]:.1f}, {f.target[1]:.1f}) "
                       f"r={f.target[2]:.2f} m")
            print(f"  t={f.t:5.1f}s  alt={f.drone[2]:4.1f} m  {phase}{tgt}")
            last = phase

    print(f"outcome: {log.outcome}", end="")
    if log.touchdown:
        print(f" at ({log.touchdown[0]:.2f}, {log.touchdown[1]:.2f})")
    else:
        print()

    rep = aggregate([log])
    nearest = [f.nearest_person for f in log.frames
               if f.nearest_person is not None]
    print(f"warning {rep.warning_avg:.2f}/frame, danger {rep.danger_avg:.2f}"
          f"/frame, best IoU {rep.best_iou_avg:.2f}")
    if nearest:
        print(f"closest horizontal approach to a person: {min(nearest):.2f} m")
    print(f"perception time {1e3 * rep.exec_time_avg:.1f} ms/frame "
          f"(max {1e3 * rep.exec_time_max:.1f})")


if __name__ == "__main__":
    main()
