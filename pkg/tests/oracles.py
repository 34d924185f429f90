"""Independent reference implementations used as test oracles.

Everything here recomputes quantities along a different path from the
package: probabilities come straight from the raw covariate arrays through a
plain (unshifted) softmax, the reference MNL fit is a derivative-free
multi-start optimization, and derivatives come from central differences.
Keep this module free of hetmnl.likelihood / hetmnl.estimate internals.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize


def dataset_arrays(dataset, z_names, s_names, j):
    """Raw per-chooser arrays straight from the rows: (z, s, choices, ids)."""
    groups: dict[str, list] = {}
    for row in dataset.rows:
        groups.setdefault(row.chooser_id, []).append(row)
    ids = sorted(groups)
    n, k, m = len(ids), len(z_names), len(s_names)
    z = np.zeros((n, j, k))
    s = np.zeros((n, m))
    choices = np.zeros(n, dtype=int)
    for i, cid in enumerate(ids):
        rows = sorted(groups[cid], key=lambda r: r.alternative)
        assert len(rows) == j
        for a, row in enumerate(rows):
            for t, name in enumerate(z_names):
                z[i, a, t] = row.covariates[name]
            if row.chosen:
                choices[i] = a
        for t, name in enumerate(s_names):
            s[i, t] = rows[0].covariates[name]
    return z, s, choices, ids


def mnl_block_probabilities(constants, alpha, betas, z_block, s_vec):
    """Plain-MNL probabilities for one chooser, computed the direct way."""
    constants = np.asarray(constants, float)
    alpha = np.asarray(alpha, float)
    betas = np.asarray(betas, float)
    u = constants + np.asarray(z_block, float) @ alpha + betas @ np.asarray(s_vec, float)
    expu = np.exp(u)
    return expu / expu.sum()


def _theta_parts(theta, j, k, m, ref):
    nonref = [a for a in range(j) if a != ref - 1]
    constants = np.zeros(j)
    constants[nonref] = theta[: j - 1]
    alpha = theta[j - 1 : j - 1 + k]
    betas = np.zeros((j, m))
    if m:
        betas[nonref] = theta[j - 1 + k :].reshape(j - 1, m)
    return constants, alpha, betas


def mnl_loglike(theta, z, s, choices, j, ref=1):
    """Plain-MNL log-likelihood from raw arrays (no shifting, no shared code)."""
    n, _, k = z.shape
    m = s.shape[1]
    constants, alpha, betas = _theta_parts(theta, j, k, m, ref)
    u = constants[None, :] + z @ alpha + s @ betas.T
    expu = np.exp(u)
    p = expu / expu.sum(axis=1, keepdims=True)
    return float(np.sum(np.log(p[np.arange(n), choices])))


def mnl_bruteforce_fit(z, s, choices, j, ref=1, seed=0, n_starts=5):
    """Multi-start numeric-gradient optimization of the plain-MNL likelihood."""
    n, _, k = z.shape
    m = s.shape[1]
    p_dim = (j - 1) + k + (j - 1) * m

    def negative(theta):
        return -mnl_loglike(theta, z, s, choices, j, ref)

    rng = np.random.default_rng(seed)
    starts = [np.zeros(p_dim)] + [
        rng.uniform(-0.5, 0.5, p_dim) for _ in range(n_starts - 1)
    ]
    best = None
    for start in starts:
        res = minimize(negative, start, method="BFGS",
                       options={"gtol": 1e-9, "maxiter": 1000})
        if best is None or res.fun < best.fun:
            best = res
    return best.x, -best.fun


def binary_logit_information(x, p):
    """Closed-form binary-logit information: sum_i p_i (1 - p_i) x_i x_i'."""
    x = np.asarray(x, float)
    p = np.asarray(p, float)
    return (x * (p * (1 - p))[:, None]).T @ x


def central_difference_gradient(fn, theta, rel_step=1e-5):
    """Central differences with the per-coordinate step 1e-5 * (1 + |theta_t|)."""
    theta = np.asarray(theta, float)
    grad = np.empty_like(theta)
    for t in range(theta.size):
        h = rel_step * (1.0 + abs(theta[t]))
        up = theta.copy()
        up[t] += h
        down = theta.copy()
        down[t] -= h
        grad[t] = (fn(up) - fn(down)) / (2.0 * h)
    return grad
