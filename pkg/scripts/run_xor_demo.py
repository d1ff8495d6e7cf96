"""Accuracy of naive Bayes on the pattern (A=1, B hidden) when the hiding process changes."""

import argparse

from ipcir.classifier import IpDriftScenario, xor_demo


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--n", type=int, default=1000)
    args = p.parse_args()
    print("seed  units(train/deploy)  nb-value train/deploy  nb-mar train/deploy  cir containment  cir set")
    for seed in range(args.seeds):
        r = xor_demo(IpDriftScenario(seed, args.n, args.n))
        tr, de = r["train"], r["deploy"]
        print(f"{seed:>4}  {tr['pattern_units']:>6}/{de['pattern_units']:<6}       "
              f"{tr['nb_value_accuracy']:.2f}/{de['nb_value_accuracy']:.2f}              "
              f"{tr['nb_mar_accuracy']:.2f}/{de['nb_mar_accuracy']:.2f}            "
              f"{tr['cir_containment']:.2f}/{de['cir_containment']:.2f}        {r['cir_class_set']}")


if __name__ == "__main__":
    main()
