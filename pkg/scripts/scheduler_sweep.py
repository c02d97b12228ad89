"""Guarded vs. unguarded scheduler over a range of seeds."""

import argparse

from scenguard.demos import run_scheduler


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--steps", type=int, default=1000)
    args = ap.parse_args()

    print("seed  guarded_invalid  unguarded_invalid  unguarded_allocations  guarded_end")
    worst = 0
    for seed in range(args.seeds):
        g = run_scheduler(seed, args.steps, guarded=True)
        u = run_scheduler(seed, args.steps, guarded=False)
        worst = max(worst, g.invalid)
        print(f"{seed:>4}  {g.invalid:>15}  {u.invalid:>17}  {u.allocations:>21}  {g.reason}")
    print(f"max guarded invalid allocations: {worst}")


if __name__ == "__main__":
    main()
