#!/usr/bin/env python3
"""Regenerates the frozen oracle fixtures used by the C++ tests.

Every value here comes from tools independent of the C++ library: exact
rational arithmetic for binomial quantities and cvxpy (Clarabel) for the
convex programs. Run from any directory; fixtures land next to this file.
"""

import itertools
import json
import math
from fractions import Fraction
from pathlib import Path

import cvxpy as cp
import numpy as np

HERE = Path(__file__).resolve().parent
TIGHT = dict(tol_gap_abs=1e-14, tol_gap_rel=1e-14, tol_feas=1e-14, max_iter=500)


def grid_features(m, k_max):
    x = np.arange(m + 1) / m
    return np.array([x ** k for k in range(1, k_max + 1)])


def solve_program(features, targets, weights, objective):
    q = cp.Variable(features.shape[1], nonneg=True)
    resid = cp.multiply(weights, features @ q - targets)
    expr = cp.norm1(resid) if objective == "l1" else cp.sum_squares(resid)
    problem = cp.Problem(cp.Minimize(expr), [cp.sum(q) == 1])
    problem.solve(solver="CLARABEL", **TIGHT)
    masses = np.maximum(q.value, 0.0)
    masses /= masses.sum()
    return float(problem.value), masses


def emd_1d(locs_a, mass_a, locs_b, mass_b):
    points = sorted(set(locs_a) | set(locs_b))
    total = 0.0
    for left, right in zip(points, points[1:]):
        ca = sum(m for l, m in zip(locs_a, mass_a) if l <= left)
        cb = sum(m for l, m in zip(locs_b, mass_b) if l <= left)
        total += abs(ca - cb) * (right - left)
    return total


def univariate_cases():
    rng = np.random.default_rng(20240611)
    cases = []

    # Exact moments of three equal spikes with ten moments.
    m, k = 100, 10
    truth = np.zeros(m + 1)
    truth[[25, 50, 75]] = 1.0 / 3.0
    f = grid_features(m, k)
    targets = f @ truth
    value, masses = solve_program(f, targets, np.ones(k), "l2")
    x = np.arange(m + 1) / m
    cases.append(dict(name="three_spike_exact", grid_size=m, objective="l2", targets=targets.tolist(),
                      weights=[1.0] * k, optimum=value,
                      reference_emd=emd_1d(x.tolist(), masses.tolist(), [0.25, 0.5, 0.75], [1 / 3] * 3)))

    # Moments violating Jensen: beta_2 < beta_1^2.
    for objective in ("l1", "l2"):
        f = grid_features(100, 2)
        value, _ = solve_program(f, np.array([0.5, 0.2]), np.ones(2), objective)
        cases.append(dict(name=f"jensen_violation_{objective}", grid_size=100, objective=objective,
                          targets=[0.5, 0.2], weights=[1.0, 1.0], optimum=value))

    # Noisy moment vectors with unequal weights.
    for index, k in enumerate([3, 4, 5, 6, 8, 10]):
        m = max(100, 10 * k)
        base = rng.dirichlet(np.ones(m + 1) * 0.05)
        f = grid_features(m, k)
        targets = np.clip(f @ base + rng.normal(0.0, 0.01, k), 0.0, 1.0)
        weights = rng.uniform(1.0, 20.0, k)
        for objective in ("l1", "l2"):
            value, _ = solve_program(f, targets, weights, objective)
            cases.append(dict(name=f"noisy_{index}_{objective}", grid_size=m, objective=objective,
                              targets=targets.tolist(), weights=weights.tolist(), optimum=value))

    # A floored weight dominates the program.
    targets = [0.30033333333333351, 0.088133333333333314, 0.024899999999999988, 0.0065333333333333337,
               0.0013333333333333348, 0.0]
    weights = [1.0, 1.5421818649398198, 2.8275768067428304, 5.4921242299884048, 12.29056401104838,
               8169.0418205754358]
    value, _ = solve_program(grid_features(100, 6), np.array(targets), np.array(weights), "l2")
    cases.append(dict(name="dominant_weight_l2", grid_size=100, objective="l2", targets=targets,
                      weights=weights, optimum=value))
    return cases


def jensen_grid_search():
    # Best two-spike fit to (0.5, 0.2) over the grid, L2 with unit weights.
    x = np.arange(101) / 100
    best = math.inf
    for i, j in itertools.combinations_with_replacement(range(101), 2):
        for w in np.linspace(0.0, 1.0, 201):
            m1 = w * x[i] + (1 - w) * x[j]
            m2 = w * x[i] ** 2 + (1 - w) * x[j] ** 2
            best = min(best, (m1 - 0.5) ** 2 + (m2 - 0.2) ** 2)
    return best


def multi_indices(dim, max_degree):
    out = []
    for degree in range(1, max_degree + 1):
        level = [e for e in itertools.product(range(degree + 1), repeat=dim) if sum(e) == degree]
        out.extend(sorted(level, reverse=True))
    return out


def multivariate_cases():
    dim, m, k = 2, 20, 6
    axis = np.arange(m + 1) / m
    cells = list(itertools.product(range(m + 1), repeat=dim))
    a = {5: 0.5, 15: 0.5}
    b = {4: 0.4, 14: 0.6}
    truth = np.array([a.get(i, 0.0) * b.get(j, 0.0) for i, j in cells])
    indices = multi_indices(dim, k)
    features = np.array([[axis[i] ** e0 * axis[j] ** e1 for i, j in cells] for e0, e1 in indices])
    exact = features @ truth
    value, masses = solve_program(features, exact, np.ones(len(indices)), "l2")

    rng = np.random.default_rng(7)
    noisy = np.clip(exact + rng.normal(0.0, 0.002, len(indices)), 0.0, 1.0)
    noisy_value, _ = solve_program(features, noisy, np.ones(len(indices)), "l2")
    return [
        dict(name="product_two_spikes_exact", dim=dim, grid_per_axis=m, k_max=k, objective="l2",
             indices=[list(e) for e in indices], targets=exact.tolist(), optimum=value),
        dict(name="product_two_spikes_noisy", dim=dim, grid_per_axis=m, k_max=k, objective="l2",
             indices=[list(e) for e in indices], targets=noisy.tolist(), optimum=noisy_value),
    ]


def binomial_oracles():
    def pmf(t, p, x):
        return Fraction(math.comb(t, x)) * p ** x * (1 - p) ** (t - x)

    half = Fraction(1, 2)
    empirical_point_mass = {}
    for t in (4, 6, 8, 10, 12, 14):
        value = sum(pmf(t, half, x) * abs(Fraction(x, t) - half) for x in range(t + 1))
        empirical_point_mass[str(t)] = float(value)
    return dict(empirical_emd_point_mass_half=empirical_point_mass,
                radius_10000_5_005=math.sqrt(3 * math.log(200) / 10000))


def main():
    univariate = univariate_cases()
    oracles = dict(univariate=univariate, jensen_grid_search_l2=jensen_grid_search(),
                   multivariate=multivariate_cases(), binomial=binomial_oracles())
    (HERE / "oracles.json").write_text(json.dumps(oracles, indent=1) + "\n")


if __name__ == "__main__":
    main()
