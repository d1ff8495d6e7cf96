"""Compare CIR with regular extension on the explicit joint model over random instances."""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from ipcir.cir import cir_lower, theorem1_oracle
from ipcir.errors import ObservationImpossible, ZeroUpperProbability

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from conftest import random_ip_instance  # noqa: E402


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--instances", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()
    rng = np.random.default_rng(args.seed)
    diffs, impossible = [], 0
    t0 = time.perf_counter()
    while len(diffs) < args.instances:
        K1, g, ip, w = random_ip_instance(rng)
        try:
            direct = cir_lower(K1, g, ip.observation(*w))
        except ObservationImpossible:
            try:
                theorem1_oracle(K1, g, w, ip, check=False)
                raise SystemExit("the joint route found a positive-probability observation")
            except ZeroUpperProbability:
                impossible += 1
                continue
        lo = theorem1_oracle(K1, g, w, ip, check=False)
        hi = -theorem1_oracle(K1, -g, w, ip, check=False)
        diffs.append(max(abs(lo - direct.lower), abs(hi - direct.upper)))
    d = np.array(diffs)
    print(f"instances {len(d)}, impossible observations skipped {impossible}, "
          f"time {time.perf_counter() - t0:.2f}s")
    print(f"max |difference| {d.max():.3e}, mean {d.mean():.3e}, above 1e-9: {(d > 1e-9).sum()}")


if __name__ == "__main__":
    main()
