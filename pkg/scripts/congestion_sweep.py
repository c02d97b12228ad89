"""Round at which the steady-state guard first forces a different output, for several n."""

import argparse

from scenguard.demos import run_congestion


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 5, 10, 20])
    args = ap.parse_args()
    for n in args.n:
        r = run_congestion(n=n, rounds=3 * n)
        print(f"n={n:<3} forced_round={r.forced_round}  outputs={' '.join(r.outputs[: n + 2])} ...")


if __name__ == "__main__":
    main()
