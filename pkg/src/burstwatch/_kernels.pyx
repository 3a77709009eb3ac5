# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled statistic kernels.  Same contract as ``_kernels_py``."""
from libc.math cimport sqrt, NAN, isnan

cdef enum:
    C2 = 0
    C3 = 1
    W2 = 2
    FSTAT = 3
    EWMA = 4
    C3_LAGS = 2


cdef inline void _baseline(const double[::1] c, const unsigned char[::1] weekend,
                           Py_ssize_t t, Py_ssize_t blen, Py_ssize_t glen,
                           double min_sigma, bint skip_weekend,
                           double* mu_out, double* sigma_out) noexcept nogil:
    cdef Py_ssize_t lo = t - glen - blen
    cdef Py_ssize_t j, n = 0
    cdef double total = 0.0, ss = 0.0, mu, sigma
    if lo < 0:
        mu_out[0] = NAN
        sigma_out[0] = NAN
        return
    for j in range(lo, t - glen):
        if skip_weekend and weekend[j]:
            continue
        total += c[j]
        n += 1
    if n < 2:
        mu_out[0] = NAN
        sigma_out[0] = NAN
        return
    mu = total / n
    for j in range(lo, t - glen):
        if skip_weekend and weekend[j]:
            continue
        ss += (c[j] - mu) * (c[j] - mu)
    sigma = sqrt(ss / (n - 1))
    if sigma < min_sigma:
        sigma = min_sigma
    mu_out[0] = mu
    sigma_out[0] = sigma


cdef inline double _c2(double ct, double mu, double sigma, double k) noexcept nogil:
    cdef double s = (ct - (mu + k * sigma)) / sigma
    return s if s > 0.0 else 0.0


def fill_statistics(const double[::1] counts, const unsigned char[::1] weekend,
                    double[::1] out, int model, Py_ssize_t blen, Py_ssize_t glen,
                    double k, double lam, double min_sigma, double gate_sigma,
                    Py_ssize_t test_len, bint ratio):
    cdef Py_ssize_t n = counts.shape[0]
    cdef Py_ssize_t t, i, j, lo
    cdef double y, mu, sigma, mu_i, sigma_i, s, var_b, var_t, floor
    cdef double ewma_scale = 1.0

    if model < C2 or model > EWMA:
        raise ValueError(f"unknown model code {model}")
    if weekend.shape[0] != n or out.shape[0] != n:
        raise ValueError("counts, weekend and out must have equal length")
    if model == EWMA:
        ewma_scale = sqrt(lam / (2.0 - lam))
    y = counts[0] if n > 0 else 0.0

    with nogil:
        for t in range(n):
            if model == EWMA and t > 0:
                y = lam * counts[t] + (1.0 - lam) * y
            if t < blen + glen:
                out[t] = NAN
                continue

            if model == C2 or model == W2:
                _baseline(counts, weekend, t, blen, glen, min_sigma, model == W2, &mu, &sigma)
                out[t] = NAN if isnan(mu) else _c2(counts[t], mu, sigma, k)

            elif model == C3:
                _baseline(counts, weekend, t, blen, glen, min_sigma, False, &mu, &sigma)
                s = _c2(counts[t], mu, sigma, k)
                for i in range(1, C3_LAGS + 1):
                    _baseline(counts, weekend, t - i, blen, glen, min_sigma, False,
                              &mu_i, &sigma_i)
                    if isnan(mu_i):
                        continue
                    if counts[t - i] < mu_i + gate_sigma * sigma_i:
                        s += _c2(counts[t - i], mu_i, sigma_i, k)
                out[t] = s

            elif model == FSTAT:
                if t - test_len + 1 < 0:
                    out[t] = NAN
                    continue
                lo = t - glen - blen
                mu = 0.0
                for j in range(lo, t - glen):
                    mu += counts[j]
                mu /= blen
                var_b = 0.0
                for j in range(lo, t - glen):
                    var_b += (counts[j] - mu) * (counts[j] - mu)
                var_b /= blen
                var_t = 0.0
                for j in range(t - test_len + 1, t + 1):
                    var_t += (counts[j] - mu) * (counts[j] - mu)
                var_t /= test_len
                if ratio:
                    floor = min_sigma * min_sigma
                    out[t] = var_t / (var_b if var_b > floor else floor)
                else:
                    out[t] = var_t + var_b

            else:
                _baseline(counts, weekend, t, blen, glen, min_sigma, False, &mu, &sigma)
                out[t] = (y - mu) / (sigma * ewma_scale)
    return out
