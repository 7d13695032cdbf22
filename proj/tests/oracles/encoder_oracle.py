# Copyright 2026 The dst-retrieval Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
"""Independent forward pass for the toy encoder golden vector.

Re-implements MT19937-64, the FNV-1a feature hash, featurization and
tanh(W * pooled + b) in plain Python. Prints values frozen in test_encoder.cpp.
"""
import math

MASK = (1 << 64) - 1


class MT64:
    def __init__(self, seed):
        self.mt = [0] * 312
        self.mt[0] = seed & MASK
        for i in range(1, 312):
            prev = self.mt[i - 1]
            self.mt[i] = (6364136223846793005 * (prev ^ (prev >> 62)) + i) & MASK
        self.idx = 312

    def _twist(self):
        upper, lower = 0xFFFFFFFF80000000, 0x7FFFFFFF
        for i in range(312):
            x = (self.mt[i] & upper) | (self.mt[(i + 1) % 312] & lower)
            xa = x >> 1
            if x & 1:
                xa ^= 0xB5026F5AA96619E9
            self.mt[i] = self.mt[(i + 156) % 312] ^ xa
        self.idx = 0

    def next(self):
        if self.idx >= 312:
            self._twist()
        y = self.mt[self.idx]
        self.idx += 1
        y ^= (y >> 29) & 0x5555555555555555
        y ^= (y << 17) & 0x71D67FFFEDA60000
        y ^= (y << 37) & 0xFFF7EEE000000000
        y ^= y >> 43
        return y & MASK

    def uniform01(self):
        return (self.next() >> 11) * 2.0 ** -53

    def normal(self):
        u1 = self.uniform01()
        while u1 <= 0.0:
            u1 = self.uniform01()
        u2 = self.uniform01()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


def fnv_bucket(ns, s, buckets):
    h = 0xCBF29CE484222325
    for c in (ns + s).encode():
        h ^= c
        h = (h * 0x100000001B3) & MASK
    return h % buckets


def featurize(text, buckets, nmin, nmax):
    counts = {}
    for w in text.lower().split():
        marked = "#" + w + "#"
        for n in range(nmin, nmax + 1):
            for i in range(len(marked) - n + 1):
                b = fnv_bucket("g", marked[i:i + n], buckets)
                counts[b] = counts.get(b, 0.0) + 1.0
        b = fnv_bucket("w", w, buckets)
        counts[b] = counts.get(b, 0.0) + 1.0
    return counts


def initialize(buckets, dim, seed, scale):
    rng = MT64(seed)
    emb = [[-scale + 2 * scale * rng.uniform01() for _ in range(dim)] for _ in range(buckets)]
    proj = [[(1.0 if i == j else 0.0) + 0.01 * rng.normal() for j in range(dim)] for i in range(dim)]
    return emb, proj, [0.0] * dim


def encode(text, emb, proj, bias, nmin=2, nmax=4):
    counts = featurize(text, len(emb), nmin, nmax)
    total = sum(counts.values())
    dim = len(proj)
    pooled = [0.0] * dim
    for b in sorted(counts):
        for j in range(dim):
            pooled[j] += counts[b] / math.sqrt(total) * emb[b][j]
    return [math.tanh(sum(proj[i][j] * pooled[j] for j in range(dim)) + bias[i]) for i in range(dim)]


if __name__ == "__main__":
    print("features('ab', 2..2, V=64):", sorted(featurize("ab", 64, 2, 2).items()))
    emb, proj, bias = initialize(64, 4, 42, 0.5)
    print("first draws:", emb[0][:2], proj[0][:2])
    print("encode('abc', V=64, d=4, seed=42, scale=0.5):")
    for v in encode("abc", emb, proj, bias):
        print(repr(v))
