#!/usr/bin/env python3
"""Designs the four bundled archetype utility functions for data/mini_panda.json.

Each archetype is the closest vector to a hand-written base profile such that
its target strategy beats every competitor in every history by a robust margin:
    sum_o (P_t - P_s)(o) u(o) >= margin * sum_{o not anchor} |P_t - P_s|(o)
Any per-coordinate perturbation smaller than `margin` then keeps the target
strategy optimal, so noisy samples of one archetype share its best strategy.
"""
import json
import pathlib
import sys

import numpy as np
from scipy.optimize import linprog

ROOT = pathlib.Path(__file__).resolve().parents[2]
MARGIN = 0.03

# base profiles: outcome index -> utility (anchors 16 = healthy_reference, 21 = death)
BASE = {
    # relaxed about Down's syndrome, dislikes invasive procedures
    0: [0.97, 0.90, 0.88, 0.80, 0.70, 0.60, 0.72, 0.25, 0.10, 0.20, 0.08, 0.15, 0.20,
        0.15, 0.20, 0.40, 1, 0.85, 0.70, 0.18, 0.68, 0],
    # equally afraid of a Down's baby and of losing a healthy fetus
    1: [0.88, 0.90, 0.95, 0.80, 0.35, 0.30, 0.38, 0.55, 0.20, 0.50, 0.15, 0.30, 0.45,
        0.35, 0.50, 0.40, 1, 0.90, 0.75, 0.48, 0.36, 0],
    # afraid of terminating a healthy fetus, values knowing early
    2: [0.85, 0.96, 0.88, 0.75, 0.35, 0.25, 0.40, 0.70, 0.05, 0.45, 0.05, 0.35, 0.45,
        0.30, 0.40, 0.40, 1, 0.92, 0.88, 0.42, 0.30, 0],
    # very averse to a Down's baby
    3: [0.80, 0.90, 0.88, 0.70, 0.05, 0.03, 0.06, 0.80, 0.40, 0.65, 0.30, 0.45, 0.60,
        0.40, 0.55, 0.40, 1, 0.97, 0.70, 0.60, 0.05, 0],
}
TARGET = {0: 0, 1: 1, 2: 5, 3: 9}
# nobody values terminating an unaffected pregnancy above these
CAPS = {8: 0.35, 10: 0.35}


def design(P, best, worst, base, target, margin):
    S, H, D = P.shape
    free = [o for o in range(D) if o not in (best, worst)]
    n = len(free)
    # variables: u_free (n), t (n) for |u - base| ; minimize sum t
    A, b = [], []
    for h in range(H):
        for s in range(S):
            if s == target:
                continue
            diff = P[target, h] - P[s, h]
            l1 = np.abs(diff[free]).sum()
            const = diff[best] * 1.0
            row = np.zeros(2 * n)
            row[:n] = -diff[free]
            A.append(row)
            b.append(const - margin * l1)
    for i, o in enumerate(free):
        row = np.zeros(2 * n); row[i] = 1; row[n + i] = -1
        A.append(row); b.append(base[o])
        row = np.zeros(2 * n); row[i] = -1; row[n + i] = -1
        A.append(row); b.append(-base[o])
    c = np.concatenate([np.zeros(n), np.ones(n)])
    bounds = [(0.02, CAPS.get(o, 0.98)) for o in free] + [(0, None)] * n
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), bounds=bounds, method="highs")
    if res.status != 0:
        return None
    u = np.zeros(D)
    u[best] = 1.0
    u[free] = np.round(res.x[:n], 3)
    return u


def robust_slack(P, best, worst, u, target):
    S, H, D = P.shape
    free = [o for o in range(D) if o not in (best, worst)]
    worst_ratio = np.inf
    for h in range(H):
        eu = P[:, h] @ u
        assert int(np.argmax(eu)) == target, (h, eu)
        for s in range(S):
            if s == target:
                continue
            diff = P[target, h] - P[s, h]
            worst_ratio = min(worst_ratio, (diff @ u) / np.abs(diff[free]).sum())
    return worst_ratio


def main():
    model = json.loads((ROOT / "data" / "mini_panda.json").read_text())
    P = np.array(model["prob"])
    best, worst = model["best_anchor"], model["worst_anchor"]
    archetypes = []
    for a in sorted(BASE):
        u = design(P, best, worst, np.array(BASE[a]), TARGET[a], MARGIN + 0.005)
        if u is None:
            sys.exit(f"archetype {a}: infeasible")
        print(f"archetype {a} -> strategy {TARGET[a]}: slack {robust_slack(P, best, worst, u, TARGET[a]):.4f}")
        print("  ", [float(x) for x in u])
        archetypes.append([float(x) for x in u])
    gaps = [np.abs(np.array(x) - np.array(y)).max()
            for i, x in enumerate(archetypes) for y in archetypes[i + 1:]]
    print("min pairwise max-coordinate gap", min(gaps))
    for name, sigma, n, seed in (("archetypes4", 0.02, 60, 20240601),
                                 ("archetypes4_noisy", 0.15, 60, 20240602)):
        spec = {"archetypes": archetypes, "weights": [0.25] * 4, "sigma": sigma,
                "samples": n, "seed": seed, "best_anchor": best, "worst_anchor": worst,
                "id_prefix": "syn"}
        (ROOT / "data" / f"{name}.json").write_text(json.dumps(spec, indent=1) + "\n")


if __name__ == "__main__":
    main()
