"""Walk through the Asia diagnosis scenarios and print the interval at each step."""

import argparse
import time

from ipcir.networks import asia_walkthrough


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--scenario", type=int, choices=(1, 2, 3, 4), nargs="*", default=[1, 2, 3, 4])
    args = p.parse_args()
    for sc in args.scenario:
        t0 = time.perf_counter()
        steps = asia_walkthrough(sc)
        print(f"scenario {sc} ({time.perf_counter() - t0:.3f}s)")
        for s in steps:
            c, t = s["cancer"], s["tuberculosis"]
            print(f"  {s['step']:<45} cancer [{c[0]:.3f}, {c[1]:.3f}]  tuberculosis [{t[0]:.3f}, {t[1]:.3f}]")


if __name__ == "__main__":
    main()
