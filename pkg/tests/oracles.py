"""Brute-force reference implementations used as test oracles.

Deliberately naive: thresholds come from ``sorted(set(...))`` and every rate
is recounted by direct comparison at every candidate threshold.
"""

import math

import numpy as np


def candidates(*classes):
    pooled = sorted(set(float(x) for c in classes for x in c))
    mids = [(a + b) / 2 for a, b in zip(pooled, pooled[1:])]
    return [pooled[0] - 1.0] + mids + [pooled[-1] + 1.0]


def _rate_below(scores, th):
    scores = np.asarray(scores, dtype=float)
    return (scores[None, :] < th[:, None]).sum(axis=1) / scores.size


def _rate_at_or_above(scores, th):
    scores = np.asarray(scores, dtype=float)
    if scores.size == 0:
        return np.zeros(th.size)
    return (scores[None, :] >= th[:, None]).sum(axis=1) / scores.size


def eer(pos, neg):
    th = np.array(candidates(pos, neg))
    p_miss = _rate_below(pos, th)
    p_fa = _rate_at_or_above(neg, th)
    for i in range(th.size):
        if p_miss[i] >= p_fa[i]:
            return (p_miss[i] + p_fa[i]) / 2, th[i]
    raise AssertionError("no crossing found")


def rates(tar, non, spoof):
    th = np.array(candidates(tar, non, spoof))
    return th, _rate_below(tar, th), _rate_at_or_above(non, th), _rate_at_or_above(spoof, th)


def adcf(tar, non, spoof, p, swept=None):
    """Minimum a-DCF, earliest threshold on ties; ``p`` is an AdcfParams."""
    th, pm, pn, ps = swept if swept is not None else rates(tar, non, spoof)
    # plain Python floats: same IEEE doubles, faster scalar loop
    th, pm, pn, ps = (np.asarray(a).tolist() for a in (th, pm, pn, ps))
    best, best_th = math.inf, None
    for i in range(len(th)):
        cost = p.c_miss * p.pi_tar * pm[i] + p.c_fa_non * p.pi_non * pn[i] + p.c_fa_spoof * p.pi_spoof * ps[i]
        if cost < best:
            best, best_th = cost, th[i]
    if p.normalize:
        best /= min(p.c_miss * p.pi_tar, p.c_fa_non * p.pi_non + p.c_fa_spoof * p.pi_spoof)
    return best, best_th


def cosine_mean(vectors, enroll_utts, test_utt):
    t = vectors[test_utt]
    total = 0.0
    for u in enroll_utts:
        e = vectors[u]
        dot = sum(a * b for a, b in zip(e, t))
        total += dot / math.sqrt(sum(a * a for a in e) * sum(b * b for b in t))
    return total / len(enroll_utts)
