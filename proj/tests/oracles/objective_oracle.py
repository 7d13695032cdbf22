# Copyright 2026 The dst-retrieval Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
"""Term-by-term loss values for the frozen toy batch in test_objective.cpp.

Two queries, three passages (positives at 0 and 2), two misspelled sets.
"""
import numpy as np

Q = np.array([[0.3, -0.2, 0.5], [-0.4, 0.1, 0.2]])
V = [np.array([[0.25, -0.1, 0.45], [-0.3, 0.2, 0.1]]),
     np.array([[0.35, -0.3, 0.4], [-0.5, 0.0, 0.3]])]
P = np.array([[0.6, -0.1, 0.4], [0.1, 0.5, -0.2], [-0.5, 0.2, 0.3]])
Y_P = [0, 2]
ANCHORS = [0, 2]
Y_Q = [0, 1]


def softmax(s):
    e = np.exp(s - s.max())
    return e / e.sum()


def kl(t, s):
    return float(np.sum(t * (np.log(t) - np.log(s))))


def terms(q, v, p):
    s_p = [softmax(p @ x) for x in q]
    s_q = [softmax(q @ p[a]) for a in ANCHORS]
    ce_p = np.mean([-np.log(s_p[n][Y_P[n]]) for n in range(len(q))])
    ce_q = np.mean([-np.log(s_q[j][Y_Q[j]]) for j in range(len(ANCHORS))])
    kl_p, kl_q = [], []
    for vk in v:
        kl_p.append(np.mean([kl(s_p[n], softmax(p @ vk[n])) for n in range(len(q))]))
        kl_q.append(np.mean([kl(s_q[j], softmax(vk @ p[a])) for j, a in enumerate(ANCHORS)]))
    return ce_p, ce_q, kl_p, kl_q


if __name__ == "__main__":
    beta, gamma, sigma = 0.5, 0.5, 0.2
    ce_p, ce_q, kl_p, kl_q = terms(Q, V, P)
    dce = (1 - gamma) * ce_p + gamma * ce_q
    k1 = [(1 - sigma) * a + sigma * b for a, b in zip(kl_p, kl_q)]
    dkl = np.mean(k1)
    print("ce_p", repr(ce_p))
    print("ce_q", repr(ce_q))
    print("dual_ce", repr(dce))
    print("dual_kl K=1 (set 0)", repr(k1[0]))
    print("dual_kl K=1 (set 1)", repr(k1[1]))
    print("dual_kl K=2", repr(dkl))
    print("dst_loss", repr((1 - beta) * dce + beta * dkl))
