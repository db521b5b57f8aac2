"""Seeded binary stand-ins with the shapes of the Flags and Ask Ubuntu tables.

Each class gets a random prototype bit vector; every instance copies the
prototype of its class and flips each bit independently with probability 0.2.
Output rows are `x_1,...,x_F,label`.
"""
import random


def generate(path, features, classes, instances, seed):
    rng = random.Random(seed)
    prototypes = [[int(rng.random() < 0.4) for _ in range(features)] for _ in range(classes)]
    with open(path, "w") as out:
        for _ in range(instances):
            label = rng.randrange(classes)
            bits = [b ^ int(rng.random() < 0.2) for b in prototypes[label]]
            out.write(",".join(map(str, bits + [label])) + "\n")


generate("synthetic/flags_like.csv", 43, 5, 143, 1)
generate("synthetic/ubuntu48_like.csv", 48, 5, 162, 2)
generate("synthetic/ubuntu93_like.csv", 93, 5, 162, 3)
generate("synthetic/ubuntu153_like.csv", 153, 5, 162, 4)
