"""Brute-force reference walk used only by the tests.

Amplitudes live in plain dicts keyed by (m, n, coin) on an unbounded
lattice, plates are applied term by term with math module arithmetic, and
pair statistics are summed directly from their definitions.  Nothing here
is shared with the package; this is the independent implementation the
fast one is checked against.
"""
from __future__ import annotations

import math

UP, DOWN = 0, 1

BALANCED_STEP = [("C", math.pi / 4), ("TX", math.pi), ("C", math.pi / 4), ("TY", math.pi)]


def localized(site, a_up=1.0, a_down=0.0):
    m, n = site
    amps = {}
    if a_up != 0:
        amps[(m, n, UP)] = complex(a_up)
    if a_down != 0:
        amps[(m, n, DOWN)] = complex(a_down)
    return amps


def _add(amps, key, value):
    amps[key] = amps.get(key, 0j) + value


def apply_coin(amps, omega):
    c = math.cos(omega)
    s = math.sin(omega)
    out = {}
    for (m, n, coin), a in amps.items():
        if coin == UP:
            _add(out, (m, n, UP), c * a)
            _add(out, (m, n, DOWN), 1j * s * a)
        else:
            _add(out, (m, n, UP), 1j * s * a)
            _add(out, (m, n, DOWN), c * a)
    return out


def apply_shift(amps, axis, delta):
    c = math.cos(delta / 2.0)
    s = math.sin(delta / 2.0)
    dm, dn = (1, 0) if axis == "x" else (0, 1)
    out = {}
    for (m, n, coin), a in amps.items():
        _add(out, (m, n, coin), c * a)
        if coin == UP:
            _add(out, (m + dm, n + dn, DOWN), 1j * s * a)
        else:
            _add(out, (m - dm, n - dn, UP), 1j * s * a)
    return out


def apply_plates(amps, plates):
    for name, angle in plates:
        if name == "C":
            amps = apply_coin(amps, angle)
        elif name == "TX":
            amps = apply_shift(amps, "x", angle)
        elif name == "TY":
            amps = apply_shift(amps, "y", angle)
        else:
            raise ValueError(f"unknown plate {name!r}")
    return amps


def evolve(amps, step_plates, steps):
    for _ in range(steps):
        amps = apply_plates(amps, step_plates)
    return amps


def norm_sq(amps):
    return sum(abs(a) ** 2 for a in amps.values())


def mode_probs(amps):
    return {key: abs(a) ** 2 for key, a in amps.items()}


def position_probs(amps):
    out = {}
    for (m, n, _coin), a in amps.items():
        out[(m, n)] = out.get((m, n), 0.0) + abs(a) ** 2
    return out


def overlap(a, b):
    """<a|b> over the union of both supports."""
    keys = set(a) | set(b)
    return sum(a.get(k, 0j).conjugate() * b.get(k, 0j) for k in keys)


def _pair_key(k1, k2):
    return (k1, k2) if k1 <= k2 else (k2, k1)


def pair_probs_ind(a, b):
    """Bosonic unordered mode-pair probabilities and their raw total.

    The raw (unnormalized) weight of the unordered pair {p, q} is
    |a_p b_q + a_q b_p|^2 for p != q and 2 |a_p b_p|^2 for p = q; the total
    equals 1 + |<a|b>|^2 and the returned probabilities divide it out.
    """
    modes = sorted(set(a) | set(b))
    weights = {}
    total = 0.0
    for i, p in enumerate(modes):
        for q in modes[i:]:
            if p == q:
                w = 2.0 * abs(a.get(p, 0j) * b.get(p, 0j)) ** 2
            else:
                w = abs(a.get(p, 0j) * b.get(q, 0j) + a.get(q, 0j) * b.get(p, 0j)) ** 2
            if w:
                weights[(p, q)] = w
            total += w
    return {k: w / total for k, w in weights.items()}, total


def pair_probs_dis(a, b):
    """Distinguishable unordered mode-pair probabilities (sum to 1)."""
    pa = mode_probs(a)
    pb = mode_probs(b)
    out = {}
    for p, wa in pa.items():
        for q, wb in pb.items():
            key = _pair_key(p, q)
            out[key] = out.get(key, 0.0) + wa * wb
    return out


def pair_probs(a, b, c0):
    """c0 mixture of bosonic and distinguishable unordered pair statistics."""
    ind, _total = pair_probs_ind(a, b)
    dis = pair_probs_dis(a, b)
    out = {}
    for key in set(ind) | set(dis):
        out[key] = c0 * ind.get(key, 0.0) + (1.0 - c0) * dis.get(key, 0.0)
    return out


def site_pair_probs(mode_pairs):
    """Trace coins out of an unordered mode-pair distribution."""
    out = {}
    for ((m1, n1, _c1), (m2, n2, _c2)), p in mode_pairs.items():
        key = _pair_key((m1, n1), (m2, n2))
        out[key] = out.get(key, 0.0) + p
    return out


def site_pair_prob(site_pairs, r1, r2):
    return site_pairs.get(_pair_key(tuple(r1), tuple(r2)), 0.0)
