"""Independent high-precision oracles for the frozen values in the C++ tests.

Run with: python3 tests/oracles/compute_oracles.py
Nothing here shares code with the library; values are recomputed from
closed forms with mpmath at 50 digits.
"""
import math
import mpmath as mp

mp.mp.dps = 50


def Phi(x):
    return mp.ncdf(x)


def Phi_inv(u):
    return mp.findroot(lambda x: Phi(x) - u, mp.sqrt(2) * mp.erfinv(2 * u - 1))


def exp_h(x):
    return -mp.log(Phi(-x))


def exp_hinv(s):
    return Phi_inv(1 - mp.exp(-s))


print("exp_h(1)            =", mp.nstr(exp_h(1), 20))
print("exp_g(1.0, 0.5)     =", mp.nstr(exp_h(exp_hinv(mp.mpf(1)) + mp.mpf("0.5")), 20))
print("exp_g(2.0, -0.3)    =", mp.nstr(exp_h(exp_hinv(mp.mpf(2)) - mp.mpf("0.3")), 20))

# Gamma(2,1) median by bisection on P(2,x) = 1 - e^{-x}(1+x).
lo, hi = mp.mpf(0), mp.mpf(10)
for _ in range(200):
    mid = (lo + hi) / 2
    if 1 - mp.exp(-mid) * (1 + mid) < mp.mpf("0.5"):
        lo = mid
    else:
        hi = mid
print("gamma21_median      =", mp.nstr(lo, 20))
# Gamma(2,1) quantile at 0.9
lo, hi = mp.mpf(0), mp.mpf(50)
for _ in range(200):
    mid = (lo + hi) / 2
    if 1 - mp.exp(-mid) * (1 + mid) < mp.mpf("0.9"):
        lo = mid
    else:
        hi = mid
print("gamma21_q90         =", mp.nstr(lo, 20))

print("tau(256,1,k=4)      =", mp.nstr(1 / (16 * mp.sqrt(mp.log(256))), 20))
print("r0(256, d0=0.5)     =", mp.nstr(16 / mp.sqrt(mp.log(256)), 20))

# Minimum ratio (g_tau(s)-s)/tau for Exp(1) at s = ln 2 over a 1000-point grid of (0,1].
s = mp.log(2)
x0 = exp_hinv(s)
best = min((exp_h(x0 + t) - s) / t for t in [mp.mpf(i) / 1000 for i in range(1, 1001)])
print("exp_minratio(ln2)   =", mp.nstr(best, 20))


# Annulus sizes by enumeration of nearest-neighbour edges.
def lam_size(k):
    m, M = 2 ** k, 2 ** (k + 1)
    cnt = 0
    for x in range(-M, M + 1):
        for y in range(-M, M + 1):
            for dx, dy in ((1, 0), (0, 1)):
                u, v = (x, y), (x + dx, y + dy)
                if max(abs(v[0]), abs(v[1])) > M:
                    continue
                nu = max(abs(u[0]), abs(u[1]))
                nv = max(abs(v[0]), abs(v[1]))
                in_ann_u = m < nu <= M
                in_ann_v = m < nv <= M
                if (in_ann_u and in_ann_v) or (in_ann_u and nv <= m) or (in_ann_v and nu <= m):
                    cnt += 1
    return cnt


print("annulus sizes k=0..6 =", [lam_size(k) for k in range(7)])


# Simple paths of 2^k edges inside Lambda_k, counted once per undirected path.
def count_pk(k):
    m, M = 2 ** k, 2 ** (k + 1)
    L = 2 ** k

    def norm(p):
        return max(abs(p[0]), abs(p[1]))

    def in_lam(u, v):
        a = max(norm(u), norm(v))
        return m < a <= M

    verts = [(x, y) for x in range(-M, M + 1) for y in range(-M, M + 1)]
    directed = 0

    def dfs(v, depth, seen):
        nonlocal directed
        if depth == L:
            directed += 1
            return
        for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            w = (v[0] + dx, v[1] + dy)
            if w in seen or not in_lam(v, w):
                continue
            seen.add(w)
            dfs(w, depth + 1, seen)
            seen.remove(w)

    for v in verts:
        dfs(v, 0, {v})
    return directed // 2


print("P_k counts k=0..2    =", [count_pk(k) for k in range(3)])


# delta0 oracle: integrate membership of B_delta over the latent line.
def delta0_oracle(h, target=mp.mpf("0.999")):
    geo = [mp.mpf(2) ** (-16 + 16 * i / mp.mpf(63)) for i in range(64)]
    lin = [mp.mpf(i) / 63 for i in range(1, 64)]
    taus = sorted(set(geo + lin))
    xs = [mp.mpf(-8.5) + 17 * mp.mpf(i) / 4000 for i in range(4001)]
    mp.mp.dps = 30
    ratios = []
    for x in xs:
        s = h(x)
        r = min((h(min(x + t, mp.mpf(8.5))) - s) / t for t in taus)
        ratios.append(r)
    out = None
    for j in range(0, 21):
        d = mp.mpf(2) ** (-j)
        mass = mp.mpf(0)
        for i in range(len(xs) - 1):
            if ratios[i] >= d and ratios[i + 1] >= d:
                mass += Phi(xs[i + 1]) - Phi(xs[i])
        if mass >= target:
            out = (j, d, mass)
            break
    mp.mp.dps = 50
    return out


print("delta0 uniform(1,3)  =", delta0_oracle(lambda x: 1 + 2 * Phi(x)))
print("delta0 exp(1)        =", delta0_oracle(exp_h))
