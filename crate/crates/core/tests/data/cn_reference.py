"""Regenerates cn_reference.txt: 50-digit check-node outputs.

Case i draws from one splitmix64 stream seeded with 2024: degree
2 + next % 11, then `degree` values (next >> 11) / 2^53 * 16 - 8, then the
excluded slot next % degree. tests/oracles.rs replays the same stream.
"""
import mpmath

mpmath.mp.dps = 50
MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)


def main():
    rng = SplitMix64(2024)
    with open("cn_reference.txt", "w") as out:
        for _ in range(10_000):
            d = 2 + rng.next() % 11
            xs = [(rng.next() >> 11) / 2.0**53 * 16.0 - 8.0 for _ in range(d)]
            k = rng.next() % d
            p = mpmath.mpf(1)
            for j, x in enumerate(xs):
                if j != k:
                    p *= mpmath.tanh(mpmath.mpf(x) / 2)
            out.write(mpmath.nstr(2 * mpmath.atanh(p), 20, min_fixed=-1, max_fixed=-1) + "\n")


if __name__ == "__main__":
    main()
