"""Numpy implementation of the path loop, vectorised across paths.

Used when the compiled ``_ckernel`` extension is unavailable. The arithmetic
follows the compiled kernel step by step; results agree to rounding.

Arguments (P paths, N steps, M assets, K quadrature nodes):

    s0           (M,)        initial mid-prices
    gauss        (P, N, M)   standard normal draws for the price step
    unif         (P, N, M, 2) uniforms for sell (0) and buy (1) fills
    chol_sd      (M, M)      Cholesky factor of Lambda times sqrt(dt)
    drift_a, drift_mu (M,)   mean reversion of the simulated prices
    pmu          (M,)        mean level believed by the policy
    dcoef        (N, M)      directional bet = dcoef * (pmu - s)
    pen          (N, M, M)   penalty matrix per step
    bias_w, bias_b (N, M, K) bias = sum_m w * sinh(b * (pmu - s))
    inv_k, A, k, z (M,)      intensity parameters
    alpha_quote  (M,)        cost added to both half spreads
    alpha_cash   (M,)        cost charged per fill
    rec          (N, M, 5)   if non-empty, (s, dp, dm, q, x) of path 0
"""

from __future__ import annotations

import numpy as np


def simulate(s0, gauss, unif, chol_sd, drift_a, drift_mu, pmu, dcoef, pen, bias_w, bias_b,
             inv_k, A, k, z, alpha_quote, alpha_cash, eps, dt,
             out_pnl, out_qmin, out_qmax, out_nbuy, out_nsell, rec):
    P, N, M = gauss.shape
    K = bias_w.shape[2]
    recording = rec.shape[0] > 0 and P > 0
    s = np.tile(np.asarray(s0, dtype=float), (P, 1))
    q = np.zeros((P, M), dtype=np.int64)
    x = np.zeros(P)
    qmin = np.zeros((P, M), dtype=np.int64)
    qmax = np.zeros((P, M), dtype=np.int64)
    nbuy = np.zeros((P, M), dtype=np.int64)
    nsell = np.zeros((P, M), dtype=np.int64)
    dp = np.empty((P, M))
    dm = np.empty((P, M))
    qf = q.astype(float)

    for n in range(N):
        for i in range(M):
            xm = pmu[i] - s[:, i]
            delta = dcoef[n, i] * xm
            bias = np.zeros(P)
            for m in range(K):
                bias += bias_w[n, i, m] * np.sinh(bias_b[n, i, m] * xm)
            pq = np.zeros(P)
            for j in range(M):
                pq += pen[n, i, j] * qf[:, j]
            pii = pen[n, i, i]
            dp[:, i] = inv_k[i] + alpha_quote[i] + delta + eps * (-bias - 2.0 * pq + pii)
            dm[:, i] = inv_k[i] + alpha_quote[i] - delta + eps * (bias + 2.0 * pq + pii)
            if recording:
                rec[n, i] = (s[0, i], dp[0, i], dm[0, i], q[0, i], x[0])
        for i in range(M):
            prob = -np.expm1(-(A[i] * np.exp(-k[i] * (z[i] + dp[:, i]))) * dt)
            sell = unif[:, n, i, 0] < prob
            q[sell, i] -= 1
            x[sell] += s[sell, i] + dp[sell, i] - alpha_cash[i]
            nsell[sell, i] += 1
            prob = -np.expm1(-(A[i] * np.exp(-k[i] * (z[i] + dm[:, i]))) * dt)
            buy = unif[:, n, i, 1] < prob
            q[buy, i] += 1
            x[buy] -= (s[buy, i] - dm[buy, i]) + alpha_cash[i]
            nbuy[buy, i] += 1
            np.minimum(qmin[:, i], q[:, i], out=qmin[:, i])
            np.maximum(qmax[:, i], q[:, i], out=qmax[:, i])
        qf = q.astype(float)
        s_next = np.empty_like(s)
        for i in range(M):
            noise = np.zeros(P)
            for j in range(M):
                noise += chol_sd[i, j] * gauss[:, n, j]
            s_next[:, i] = s[:, i] + drift_a[i] * (drift_mu[i] - s[:, i]) * dt + noise
        s = s_next

    acc = x.copy()
    for i in range(M):
        acc += q[:, i] * s[:, i]
    out_pnl[:] = acc
    out_qmin[:] = qmin
    out_qmax[:] = qmax
    out_nbuy[:] = nbuy
    out_nsell[:] = nsell
