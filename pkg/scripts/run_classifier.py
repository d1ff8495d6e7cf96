"""Naive Bayes and the naive credal classifier on the ten-unit R, H -> K example."""

from ipcir.classifier import complete_sample, incomplete_sample, nb_predict, nb_train, ncc2_predict
from ipcir.incompleteness import CAR, UNKNOWN


def main():
    full = complete_sample()
    nb = nb_train(full)
    print("complete training set")
    for inst in (("yes", "yes"), ("yes", "no"), ("no", "yes"), ("no", "no")):
        c, post = nb_predict(nb, inst)
        print(f"  R={inst[0]:<3} H={inst[1]:<3}  nb {c} ({post[c]:.3f})  ncc2 {list(ncc2_predict(full, inst).class_set)}")
    for h in ("yes", "no"):
        print(f"  R=?   H={h:<3}  ncc2 {list(ncc2_predict(full, (UNKNOWN, h)).class_set)}")
    print("H hidden in six units")
    mar = nb_train(incomplete_sample(CAR))
    for h in ("yes", "no"):
        c, post = nb_predict(mar, (CAR, h))
        cred = ncc2_predict(incomplete_sample(UNKNOWN), (CAR, h)).class_set
        print(f"  R=?   H={h:<3}  nb (MAR) {c} ({post[c]:.3f})  ncc2 {list(cred)}")


if __name__ == "__main__":
    main()
