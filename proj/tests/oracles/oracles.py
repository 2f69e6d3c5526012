"""Offline reference values for the C++ tests.

Run: python3 tests/oracles/oracles.py > tests/oracles/oracle_values.json
The numbers are copied into tests/unit/oracle_values.h.
"""
import json
import math

import numpy as np
from scipy import integrate, stats


def gamma21_survival():
    closed = 2.0 / math.e
    quad = 1.0 - integrate.quad(lambda s: s * math.exp(-s), 0.0, 1.0, epsabs=1e-14)[0]
    return {"closed": closed, "quad": quad}


def gamma21_equilibrium_cdf_at_1():
    surv = lambda s: stats.gamma(a=2.0, scale=1.0).sf(s)
    quad = 0.5 * integrate.quad(surv, 0.0, 1.0, epsabs=1e-14)[0]
    return {"closed": 1.0 - 1.5 / math.e, "quad": quad}


def exp_exp_phi():
    out = {}
    for t in (0.5, 1.0, 2.0):
        quad = integrate.quad(lambda u: (1 - math.exp(-(t - u))) * math.exp(-u), 0.0, t, epsabs=1e-14)[0]
        out[str(t)] = {"closed": 1 - math.exp(-t) - t * math.exp(-t), "quad": quad}
    return out


def markov_sir(lam=1.5, mu=1.0, i0=0.05, t_eval=(1.0, 2.0, 5.0, 10.0, 20.0)):
    def rhs(_, y):
        s, i, r, a = y
        inf = lam * s * i
        return [-inf, inf - mu * i, mu * i, inf]

    sol = integrate.solve_ivp(rhs, (0, max(t_eval)), [1 - i0, i0, 0, 0], method="DOP853",
                              rtol=1e-13, atol=1e-15, t_eval=t_eval, dense_output=True)
    return sol


def var_i1_at_1(lam=1.5, mu=1.0, i0=0.05, samples=1_000_000, seed=20240501):
    sol = markov_sir(lam, mu, i0)
    si = lambda s: sol.sol(s)[0] * sol.sol(s)[1]
    analytic = lam * integrate.quad(lambda s: math.exp(-mu * (1 - s)) * si(s), 0.0, 1.0, epsabs=1e-14)[0]
    # Brute-force white noise: cell increments of W_F on a fine (s, eta) lattice, then
    # I1(1) = sum over cells with s <= 1 < s + eta.
    rng = np.random.default_rng(seed)
    m = 400
    edges = np.linspace(0.0, 1.0, m + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    w = lam * np.array([si(s) for s in mids]) * (1.0 / m)
    p_alive = np.exp(-mu * (1.0 - mids))
    # W_F(cell x {eta > 1 - s}) ~ N(0, w p_alive); sum of independent normals.
    var_cells = w * p_alive
    draws = np.zeros(samples)
    chunk = 50_000
    for start in range(0, samples, chunk):
        z = rng.standard_normal((min(chunk, samples - start), m))
        draws[start:start + z.shape[0]] = z @ np.sqrt(var_cells)
    mc = float(np.var(draws, ddof=1))
    return {"analytic": analytic, "monte_carlo": mc, "mc_rel_se": math.sqrt(2.0 / (samples - 1))}


def lognormal_mean1():
    sigma = 0.5
    mu = -sigma * sigma / 2
    d = stats.lognorm(s=sigma, scale=math.exp(mu))
    return {"mu": mu, "mean": d.mean(), "int_surv_2": integrate.quad(d.sf, 0, 2, epsabs=1e-14)[0],
            "cdf_1": d.cdf(1.0)}


def weibull():
    k, lam = 1.5, 1.1
    d = stats.weibull_min(c=k, scale=lam)
    return {"mean": d.mean(), "int_surv_1": integrate.quad(d.sf, 0, 1, epsabs=1e-14)[0]}


def main():
    sol = markov_sir()
    out = {
        "gamma21_survival_1": gamma21_survival(),
        "gamma21_equilibrium_cdf_1": gamma21_equilibrium_cdf_at_1(),
        "exp_exp_phi": exp_exp_phi(),
        "markov_sir_fluid": {str(t): {"S": float(s), "I": float(i), "R": float(r), "A": float(a)}
                             for t, s, i, r, a in zip(sol.t, *sol.y)},
        "var_I1_at_1": var_i1_at_1(),
        "lognormal_mean1_sigma05": lognormal_mean1(),
        "weibull_1.5_1.1": weibull(),
        "ks_critical_1pct_n10000": 1.62762 / math.sqrt(10000),
    }
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
