#!/usr/bin/env python3
"""Independent high-precision oracle for the per-epoch parameter formulas.

Evaluates the epoch-parameter formulas with mpmath at 60 significant digits,
entirely separately from the C++ implementation, and prints the values that
are frozen into tests/params_test.cpp and the acceptance suite.

Run:  python3 tests/oracle/param_oracle.py
"""

import math
from mpmath import mp, mpf, ceil, ln, log, floor

mp.dps = 60

E_CONST = mp.e


def derive(k, ell, eps):
    k = mpf(k)
    ell = mpf(ell)
    eps = mpf(eps)
    raw = k ** (1 + eps)
    d = int(ceil(raw))
    gamma = log(d, k)
    alpha = 1 + gamma + log(3, k)
    delta = 2 * gamma + mpf("0.05")
    beta = log(d * (2 * k ** delta + 1), k)
    tau = ell * (1 - ell / raw)
    r_arg = 2 * d * k * k * ln(k) * max(
        alpha,
        beta * k ** (2 * eps),
        2 + eps - ln(k ** eps - 1) / ln(k),
    )
    r = int(ceil(r_arg))
    p_arg = (2 * ln(k) / ell) * max(
        gamma / (1 / k + k ** (-alpha)),
        delta / (mpf(1) / d + k ** (-beta)),
    )
    p = int(ceil(p_arg))
    return dict(d=d, gamma=gamma, alpha=alpha, delta=delta, beta=beta,
                tau=tau, r=r, p=p, r_arg=r_arg, p_arg=p_arg)


def check_conditions(k, ell, eps):
    """The four exponent conditions, verified symbolically at high precision."""
    v = derive(k, ell, eps)
    k = mpf(k)
    d = v["d"]
    ok = [
        v["alpha"] >= 1 + v["gamma"] + log(3, k),
        v["beta"] >= log(d * (2 * k ** v["delta"] + 1), k),
        v["gamma"] > log(d - 1, k),
        v["delta"] > log(d * k ** v["gamma"] / (k ** v["gamma"] + 1 - d), k),
    ]
    return all(ok), ok


def schedule(n, ell, eps):
    """Doubling estimates, worst-case (rightmost) binary-search descent,
    and the per-epoch/total round bound."""
    E = []
    k = ell + 1
    E.append(k)
    while k < n:
        k *= 2
        E.append(k)
    B = []
    if E[-1] != n:
        lo, hi = E[-2] + 1, E[-1] - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            B.append(mid)
            lo = mid + 1
    per = {}
    for kk in sorted(set(E) | set(B)):
        v = derive(kk, ell, eps)
        per[kk] = v["p"] * v["r"] + v["d"]
    return E, B, per, sum(per.values())


def mmct_round_max(K, ell_prime, eps, scale=None):
    """Sync horizon: doubling estimates up to K plus the costliest
    (rightmost) binary-search descent of the top range, so that every
    possible thread execution fits regardless of the true n."""
    E = []
    k = ell_prime + 1
    E.append(k)
    while k < K:
        k *= 2
        E.append(k)
    B = []
    if len(E) >= 2:
        lo, hi = E[-2] + 1, E[-1] - 1
        while lo <= hi:
            mid = (lo + hi) // 2
            B.append(mid)
            lo = mid + 1
    tot = 0
    for kk in sorted(set(E) | set(B)):
        v = derive(kk, ell_prime, eps)
        if scale is None:
            tot += v["p"] * v["r"] + v["d"]
        else:
            ps = max(1, int(floor(mpf(scale) * v["p"])))
            rs = max(1, int(floor(mpf(scale) * v["r"])))
            tot += ps * rs + v["d"]
    return sorted(set(E) | set(B)), tot


def visited(n, ell):
    """Estimate sequence the deterministic search actually visits."""
    seq = []
    k, lo, hi = ell + 1, ell + 1, None
    while True:
        seq.append(k)
        if k == n:
            return seq
        if k < n:
            lo = k + 1
            k = 2 * k if hi is None else (lo + hi) // 2
        else:
            hi = k - 1
            k = (lo + hi) // 2


def fmt(x):
    return mp.nstr(x, 20)


def main():
    print("== derive_epoch_params(k=2, ell=1, eps=1) ==")
    v = derive(2, 1, 1)
    for key in ("d", "gamma", "alpha", "delta", "beta", "tau"):
        print(f"  {key} = {fmt(v[key]) if not isinstance(v[key], int) else v[key]}")
    print(f"  r_arg = {fmt(v['r_arg'])}  -> r = {v['r']}")
    print(f"  p_arg = {fmt(v['p_arg'])}  -> p = {v['p']}")
    print(f"  scaled s=0.01: p = {max(1, int(floor(mpf('0.01') * v['p'])))}, "
          f"r = {max(1, int(floor(mpf('0.01') * v['r'])))}")

    print("\n== derive_epoch_params(k=2, ell=1, eps=0.5) ==")
    v = derive(2, 1, "0.5")
    for key in ("d", "gamma", "alpha", "delta", "beta", "tau"):
        print(f"  {key} = {fmt(v[key]) if not isinstance(v[key], int) else v[key]}")
    print(f"  r = {v['r']}, p = {v['p']}")

    print("\n== derive_epoch_params(k=8, ell=2, eps=0.5) ==")
    v = derive(8, 2, "0.5")
    print(f"  d={v['d']} tau={fmt(v['tau'])} r={v['r']} p={v['p']}")

    print("\n== condition check over k=2..256 (ell=1, eps in {0.1,0.5,1,2}) ==")
    bad = []
    for eps in ("0.1", "0.5", "1", "2"):
        for k in range(2, 257):
            ok, flags = check_conditions(k, 1, mpf(eps))
            if not ok:
                bad.append((k, eps, flags))
    print(f"  violations: {bad if bad else 'none'}")

    print("\n== monotonicity p,r,d over k=2..256 (ell=1, eps=0.5) ==")
    prev = None
    mono = True
    for k in range(2, 257):
        v = derive(k, 1, "0.5")
        cur = (v["d"], v["p"], v["r"])
        if prev and any(c < pp for c, pp in zip(cur, prev)):
            mono = False
            print(f"  NON-MONOTONE at k={k}: {prev} -> {cur}")
        prev = cur
    print(f"  monotone: {mono}")

    for (n, ell, eps) in [(8, 1, "0.5"), (5, 2, "0.5"), (2, 1, "0.5"),
                          (4, 1, "1"), (3, 1, "0.5"), (4, 2, "0.5")]:
        E, B, per, tot = schedule(n, int(ell), eps)
        print(f"\n== schedule(n={n}, ell={ell}, eps={eps}) ==")
        print(f"  E = {E}")
        print(f"  B = {B}")
        for kk, c in per.items():
            print(f"    k={kk}: p*r+d = {c}")
        print(f"  total_bound = {tot}")
        vis = visited(n, int(ell))
        cost_vis = 0
        for kk in vis:
            vv = derive(kk, int(ell), eps)
            cost_vis += vv["p"] * vv["r"] + vv["d"]
        print(f"  visited {vis} cost = {cost_vis}  (<= bound: {cost_vis <= tot})")

    print("\n== bound covers every n in the acceptance grid ==")
    allok = True
    for n in range(2, 9):
        for ell in range(1, n):
            _, _, _, tot = schedule(n, ell, "0.5")
            vis = visited(n, ell)
            cost = sum(derive(kk, ell, "0.5")["p"] * derive(kk, ell, "0.5")["r"]
                       + derive(kk, ell, "0.5")["d"] for kk in vis)
            if cost > tot:
                allok = False
                print(f"  VIOLATION n={n} ell={ell}: {cost} > {tot}")
    print(f"  all covered: {allok}")

    print("\n== llmc formula units ==")
    lg = ln(E_CONST / (E_CONST - 2))
    print(f"  ln(e/(e-2)) = {fmt(lg)}")
    for K, zeta in [(32, "0.5"), (2, "1"), (64, "0.25"), (32, "0.25")]:
        val = 64 * ln(mpf(K) / mpf(zeta)) / lg
        print(f"  f(K={K}, zeta={zeta}) = {fmt(val)} -> {int(ceil(val))}")

    def initial_K(zeta):
        x = mpf(12) / mpf(zeta)
        K = 2
        while K <= x:
            K *= 2
        return K

    for z in ("0.5", "0.75", "0.9", "0.25"):
        print(f"  initial_K(zeta={z}) = {initial_K(z)}")

    print("\n== mmct round_max (paper mode, eps=0.5, ell'=1) ==")
    for K in (4, 8):
        sched, tot = mmct_round_max(K, 1, "0.5")
        print(f"  K={K}: schedule {sched} round_max = {tot}")

    print("\n== llmc acceptance scaling (K=64, ell'=1, eps=0.5) ==")
    for s in ("3e-5", "2e-5", "1e-5"):
        sched, tot = mmct_round_max(64, 1, "0.5", scale=s)
        print(f"  s_p=s_r={s}: scaled round_max = {tot} (<=1e6: {tot <= 10**6})")

    print("\n== ceiling knife-edge audit (acceptance grid) ==")
    worst = mpf(1)
    for ell in range(1, 8):
        for k in range(2, 17):
            v = derive(k, ell, "0.5")
            for arg in (v["r_arg"], v["p_arg"]):
                frac = arg - floor(arg)
                dist = min(frac, 1 - frac)
                if dist < worst:
                    worst = dist
                    wk, wl = k, ell
    print(f"  min distance of p/r args to an integer: {fmt(worst)} at k={wk} ell={wl}")

    print("\n== full-grid cost table (eps=0.5) ==")
    grand = 0
    for n in range(2, 9):
        for ell in range(1, n):
            vis = visited(n, ell)
            cost = sum(derive(kk, ell, "0.5")["p"] * derive(kk, ell, "0.5")["r"]
                       + derive(kk, ell, "0.5")["d"] for kk in vis)
            _, _, _, tot = schedule(n, ell, "0.5")
            grand += cost * n
            print(f"  n={n} ell={ell}: visited={vis} rounds={cost} bound={tot}")
    print(f"  grid node-rounds for ONE run of each config: {grand}")


if __name__ == "__main__":
    main()
