# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernels: the hot per-path loops of the Monte-Carlo core.

Mirrors fgpsim.kernels._ref operation-for-operation; see that module for
the documented contracts.  Transcendentals on arrays go through numpy so
both backends evaluate the identical function.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()

LEDGER_OK = 0
LEDGER_COST_EXCEEDS_WEALTH = 1
LEDGER_NONPOSITIVE_WEALTH = 2


def gbm_milstein(double[::1] s0, double[::1] b, double[::1] sigma, double dt,
                 double[:, ::1] z):
    cdef Py_ssize_t m = z.shape[0]
    cdef Py_ssize_t d = z.shape[1]
    cdef double sqdt = np.sqrt(dt)
    out_arr = np.empty((m + 1, d))
    cdef double[:, ::1] out = out_arr
    prod_arr = np.ones(d)
    cdef double[::1] prod = prod_arr
    cdef Py_ssize_t n, i
    cdef double zv, factor
    for i in range(d):
        out[0, i] = s0[i]
    for n in range(m):
        for i in range(d):
            zv = z[n, i]
            factor = 1.0 + b[i] * dt + sigma[i] * sqdt * zv \
                + 0.5 * sigma[i] * sigma[i] * (dt * zv * zv - dt)
            prod[i] = prod[i] * factor
            out[n + 1, i] = s0[i] * prod[i]
    return out_arr


def gbm_exact_log(double[::1] s0, double[::1] b, double[::1] sigma, double dt,
                  double[:, ::1] z):
    cdef Py_ssize_t m = z.shape[0]
    cdef Py_ssize_t d = z.shape[1]
    cdef double sqdt = np.sqrt(dt)
    g_arr = np.empty((m, d))
    cdef double[:, ::1] g = g_arr
    cdef Py_ssize_t n, i
    for n in range(m):
        for i in range(d):
            g[n, i] = (b[i] - 0.5 * sigma[i] * sigma[i]) * dt + sigma[i] * sqdt * z[n, i]
    factor_arr = np.exp(g_arr)
    cdef double[:, ::1] factor = factor_arr
    out_arr = np.empty((m + 1, d))
    cdef double[:, ::1] out = out_arr
    prod_arr = np.ones(d)
    cdef double[::1] prod = prod_arr
    for i in range(d):
        out[0, i] = s0[i]
    for n in range(m):
        for i in range(d):
            prod[i] = prod[i] * factor[n, i]
            out[n + 1, i] = s0[i] * prod[i]
    return out_arr


def ou_exact(double kappa0, double kappa_bar, double decay,
             double[::1] noise_amp, double[::1] zeta, double kappa_min):
    cdef Py_ssize_t m = zeta.shape[0]
    out_arr = np.empty(m + 1)
    cdef double[::1] out = out_arr
    cdef double k = kappa0
    cdef Py_ssize_t n
    out[0] = k
    for n in range(m):
        k = kappa_bar + (k - kappa_bar) * decay + noise_amp[n] * zeta[n]
        if k < kappa_min:
            k = kappa_min
        out[n + 1] = k
    return out_arr


def ledger_evolve(double[:, ::1] S, double[::1] mu0, double[::1] kappa,
                  double[:, ::1] targets, Py_ssize_t k, int convention,
                  int charge_initial):
    cdef Py_ssize_t m = S.shape[0] - 1
    cdef Py_ssize_t d = S.shape[1]
    cdef Py_ssize_t n_reb = m // k

    V_arr = np.empty(m + 1)
    V_mkt_arr = np.empty(m + 1)
    C_arr = np.empty(m + 1)
    turnover_arr = np.zeros(n_reb + 1)
    drifted_arr = np.empty((n_reb + 1, d))
    V_pre_arr = np.empty(n_reb + 1)
    h_arr = np.empty(d)
    hm_arr = np.empty(d)

    cdef double[::1] V = V_arr
    cdef double[::1] V_mkt = V_mkt_arr
    cdef double[::1] C = C_arr
    cdef double[::1] turnover = turnover_arr
    cdef double[:, ::1] drifted = drifted_arr
    cdef double[::1] V_pre = V_pre_arr
    cdef double[::1] h = h_arr
    cdef double[::1] hm = hm_arr

    cdef Py_ssize_t n, t, i, rs
    cdef double acc, v, c, turn0, turn, x, diff

    for i in range(d):
        hm[i] = mu0[i] / S[0, i]
    V_mkt[0] = 1.0
    for t in range(1, m + 1):
        acc = 0.0
        for i in range(d):
            acc += hm[i] * S[t, i]
        V_mkt[t] = acc

    for i in range(d):
        drifted[0, i] = targets[0, i]
    V_pre[0] = 1.0
    turn0 = 0.0
    if charge_initial:
        for i in range(d):
            turn0 += fabs(targets[0, i])
    if convention == 1 and n_reb >= 1:
        for i in range(d):
            turn0 += fabs(targets[1, i] - targets[0, i])
    x = kappa[0] * turn0
    if x >= 1.0:
        return (V_arr, V_mkt_arr, C_arr, turnover_arr, drifted_arr, V_pre_arr,
                LEDGER_COST_EXCEEDS_WEALTH, 0)
    v = 1.0 - x
    c = kappa[0] * turn0
    V[0] = v
    C[0] = c
    turnover[0] = turn0
    for i in range(d):
        h[i] = v * targets[0, i] / S[0, i]

    for n in range(1, n_reb + 1):
        rs = n * k
        for t in range((n - 1) * k + 1, rs + 1):
            acc = 0.0
            for i in range(d):
                acc += h[i] * S[t, i]
            V[t] = acc
            C[t] = c
        v = V[rs]
        if not v > 0.0:
            return (V_arr, V_mkt_arr, C_arr, turnover_arr, drifted_arr, V_pre_arr,
                    LEDGER_NONPOSITIVE_WEALTH, rs)
        V_pre[n] = v
        for i in range(d):
            drifted[n, i] = h[i] * S[rs, i] / v
        if n < n_reb:
            turn = 0.0
            if convention == 1:
                for i in range(d):
                    turn += fabs(targets[n + 1, i] - targets[n, i])
            else:
                for i in range(d):
                    turn += fabs(targets[n, i] - drifted[n, i])
            x = kappa[rs] * turn
            if x >= 1.0:
                return (V_arr, V_mkt_arr, C_arr, turnover_arr, drifted_arr, V_pre_arr,
                        LEDGER_COST_EXCEEDS_WEALTH, rs)
            v = v * (1.0 - x)
            c = c + kappa[rs] * turn
            V[rs] = v
            C[rs] = c
            turnover[n] = turn
            for i in range(d):
                h[i] = v * targets[n, i] / S[rs, i]

    return (V_arr, V_mkt_arr, C_arr, turnover_arr, drifted_arr, V_pre_arr,
            LEDGER_OK, -1)


cdef extern from "math.h":
    double fabs(double x) nogil
