"""Pure-Python statistic kernels.

Mirrors ``_kernels.pyx`` line for line; used when the compiled module is
unavailable or ``BURSTWATCH_PURE=1`` is set.
"""
from math import isnan, nan, sqrt

C2, C3, W2, FSTAT, EWMA = range(5)
C3_LAGS = 2


def _baseline(c, weekend, t, blen, glen, min_sigma, skip_weekend):
    """Return (mu, sigma) for the window ending ``glen`` days before ``t``.

    (nan, nan) when the window starts before the series or, with weekend
    filtering, fewer than two samples remain.
    """
    lo = t - glen - blen
    if lo < 0:
        return nan, nan
    n = 0
    total = 0.0
    for j in range(lo, t - glen):
        if skip_weekend and weekend[j]:
            continue
        total += c[j]
        n += 1
    if n < 2:
        return nan, nan
    mu = total / n
    ss = 0.0
    for j in range(lo, t - glen):
        if skip_weekend and weekend[j]:
            continue
        ss += (c[j] - mu) * (c[j] - mu)
    sigma = sqrt(ss / (n - 1))
    if sigma < min_sigma:
        sigma = min_sigma
    return mu, sigma


def _c2(ct, mu, sigma, k):
    s = (ct - (mu + k * sigma)) / sigma
    return s if s > 0.0 else 0.0


def fill_statistics(counts, weekend, out, model, blen, glen, k, lam, min_sigma,
                    gate_sigma, test_len, ratio):
    c = [float(x) for x in counts]
    wk = [bool(x) for x in weekend]
    n = len(c)
    y = c[0] if n else 0.0
    ewma_scale = sqrt(lam / (2.0 - lam)) if model == EWMA else 1.0

    for t in range(n):
        if model == EWMA and t > 0:
            y = lam * c[t] + (1.0 - lam) * y
        if t < blen + glen:
            out[t] = nan
            continue

        if model == C2 or model == W2:
            mu, sigma = _baseline(c, wk, t, blen, glen, min_sigma, model == W2)
            out[t] = nan if isnan(mu) else _c2(c[t], mu, sigma, k)

        elif model == C3:
            mu, sigma = _baseline(c, wk, t, blen, glen, min_sigma, False)
            s = _c2(c[t], mu, sigma, k)
            for i in range(1, C3_LAGS + 1):
                mu_i, sigma_i = _baseline(c, wk, t - i, blen, glen, min_sigma, False)
                if isnan(mu_i):
                    continue
                if c[t - i] < mu_i + gate_sigma * sigma_i:
                    s += _c2(c[t - i], mu_i, sigma_i, k)
            out[t] = s

        elif model == FSTAT:
            if t - test_len + 1 < 0:
                out[t] = nan
                continue
            lo = t - glen - blen
            mu = 0.0
            for j in range(lo, t - glen):
                mu += c[j]
            mu /= blen
            var_b = 0.0
            for j in range(lo, t - glen):
                var_b += (c[j] - mu) * (c[j] - mu)
            var_b /= blen
            var_t = 0.0
            for j in range(t - test_len + 1, t + 1):
                var_t += (c[j] - mu) * (c[j] - mu)
            var_t /= test_len
            if ratio:
                floor = min_sigma * min_sigma
                out[t] = var_t / (var_b if var_b > floor else floor)
            else:
                out[t] = var_t + var_b

        elif model == EWMA:
            mu, sigma = _baseline(c, wk, t, blen, glen, min_sigma, False)
            out[t] = (y - mu) / (sigma * ewma_scale)

        else:
            raise ValueError(f"unknown model code {model}")
    return out
