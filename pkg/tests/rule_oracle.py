"""Independent brute-force evaluation of the scheduling rules.

Plain Python floats and lists, written from the weight formulas without
reusing any library helper. Conventions shared with the library: rate
floor on divisors, normalized short rate clamped to [0.05, 1], freeze
floor, queue sizes in megabits inside the exponent, lowest index on ties.
"""

import math

RULES = ["MR", "PF-Short", "PF-Long", "EXP", "LL-PF-Exp", "LL-PF-Sig", "LL-EXP", "LL-EXP-Freeze"]


def brute_force_select(rule, r, short, long, q, a, freeze, alpha, beta=0.5, c=10.0, mirrored=False,
                       rate_floor=1e3, freeze_floor=0.01, scale=1e-6):
    n = len(r)
    if n == 0:
        return -1
    peak = max(short)
    aq = [a[i] * q[i] * scale for i in range(n)]
    mean_aq = sum(aq) / n
    scores = []
    for i in range(n):
        expo = math.exp((aq[i] - mean_aq) / (1 + math.sqrt(mean_aq)))
        rn = 0.05 if peak <= 0 else min(1.0, max(0.05, short[i] / peak))
        if rule == "MR":
            s = r[i]
        elif rule == "PF-Short":
            s = r[i] / max(short[i], rate_floor)
        elif rule == "PF-Long":
            s = r[i] / max(long[i], rate_floor)
        elif rule == "EXP":
            s = r[i] / max(short[i], rate_floor) * expo
        elif rule == "LL-PF-Exp":
            s = r[i] / max(long[i], rate_floor) * math.exp(alpha[i] / rn)
        elif rule == "LL-PF-Sig":
            sig = math.exp(-c * (rn - beta))
            s = r[i] / max(long[i], rate_floor) * ((1 + sig) if mirrored else (1 - sig))
        elif rule == "LL-EXP":
            s = r[i] / max(long[i], rate_floor) * expo
        else:
            s = r[i] * max(freeze[i], freeze_floor) * expo
        scores.append(s)
    best = 0
    for i in range(1, n):
        if scores[i] > scores[best]:
            best = i
    return best
