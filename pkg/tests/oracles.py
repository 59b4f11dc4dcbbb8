"""Brute-force double-loop oracles over the dense adjacency."""

import math

import numpy as np


def oracle_edge_homophily(a, y):
    same = total = 0
    for i in range(len(y)):
        for j in range(i + 1, len(y)):
            if a[i, j]:
                total += 1
                same += y[i] == y[j]
    return same, total


def oracle_node_homophily(a, y):
    out = []
    for i in range(len(y)):
        nb = [j for j in range(len(y)) if a[i, j]]
        out.append(1.0 if not nb else sum(y[j] == y[i] for j in nb) / len(nb))
    return np.array(out)


def oracle_tv(a, s):
    n, m = s.shape
    deg = [1 + sum(a[i]) for i in range(n)]
    total = 0.0
    for i in range(n):
        for c in range(m):
            smooth = 0.0
            for j in range(n):
                w = (a[i, j] + (i == j)) / math.sqrt(deg[i] * deg[j])
                smooth += w * s[j, c]
            total += abs(s[i, c] - smooth)
    return total / m


def oracle_q_hat(a, y):
    edges = pairs = 0
    for i in range(len(y)):
        for j in range(i + 1, len(y)):
            if y[i] != y[j]:
                pairs += 1
                edges += int(a[i, j])
    return edges, pairs
