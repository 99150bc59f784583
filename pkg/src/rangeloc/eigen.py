"""Eigenvalues of small dense real matrices.

Isolation of eigenvalues exposed by a permutation, balancing, Householder
reduction to upper Hessenberg form, then the Francis implicit double-shift
QR iteration on the Hessenberg matrix. Cluster blocks are tiny (a handful of sensors), so the iteration works on plain Python
lists, which is faster than numpy element indexing at this size.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import NoConvergence

MAX_ORDER = 64
MAX_ITS = 100
_RADIX = 2.0


def isolate(a: np.ndarray) -> tuple[list[float], np.ndarray]:
    """Split off eigenvalues revealed by a symmetric permutation.

    A row (or column) whose off-diagonal entries vanish inside the active
    block contributes its diagonal entry as an exact eigenvalue and leaves
    the block. Returns those eigenvalues and the remaining core matrix.
    """
    a = np.asarray(a, dtype=float)
    active = list(range(a.shape[0]))
    found: list[float] = []
    changed = True
    while changed and len(active) > 1:
        changed = False
        sub = a[np.ix_(active, active)]
        off = sub != 0.0
        np.fill_diagonal(off, False)
        for r in range(len(active)):
            if not off[r].any() or not off[:, r].any():
                found.append(float(sub[r, r]))
                del active[r]
                changed = True
                break
    return found, a[np.ix_(active, active)]


def balance(a: np.ndarray) -> np.ndarray:
    """Diagonal similarity scaling that equalizes row and column norms."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    sqrdx = _RADIX * _RADIX
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.abs(a[:, i]).sum() - abs(a[i, i])
            r = np.abs(a[i, :]).sum() - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / _RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= _RADIX
                c *= sqrdx
            g = r * _RADIX
            while c > g:
                f /= _RADIX
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Orthogonally similar upper Hessenberg matrix (Householder reflections)."""
    h = np.array(a, dtype=float)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(alpha, x[0])
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _hqr(h: np.ndarray) -> list[complex]:
    n = h.shape[0]
    # 1-based working copy keeps the index arithmetic of the classic routine.
    a = [[0.0] * (n + 1)] + [[0.0] + [float(v) for v in row] for row in h]
    wr = [0.0] * (n + 1)
    wi = [0.0] * (n + 1)
    anorm = sum(abs(a[i][j]) for i in range(1, n + 1) for j in range(max(i - 1, 1), n + 1))
    nn = n
    t = 0.0
    while nn >= 1:
        its = 0
        while True:
            # Look for a single small subdiagonal element.
            l = nn
            while l >= 2:
                s = abs(a[l - 1][l - 1]) + abs(a[l][l])
                if s == 0.0:
                    s = anorm
                if abs(a[l][l - 1]) + s == s:
                    a[l][l - 1] = 0.0
                    break
                l -= 1
            x = a[nn][nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
            else:
                y = a[nn - 1][nn - 1]
                w = a[nn][nn - 1] * a[nn - 1][nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = math.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + math.copysign(z, p)
                        wr[nn - 1] = wr[nn] = x + z
                        if z != 0.0:
                            wr[nn] = x - w / z
                        wi[nn - 1] = wi[nn] = 0.0
                    else:
                        wr[nn - 1] = wr[nn] = x + p
                        wi[nn - 1] = -z
                        wi[nn] = z
                    nn -= 2
                else:
                    if its == MAX_ITS:
                        raise NoConvergence(f"QR iteration stalled after {its} steps")
                    if its % 10 == 0 and its > 0:
                        # Exceptional shift.
                        t += x
                        for i in range(1, nn + 1):
                            a[i][i] -= x
                        s = abs(a[nn][nn - 1]) + abs(a[nn - 1][nn - 2])
                        y = x = 0.75 * s
                        w = -0.4375 * s * s
                    its += 1
                    m = nn - 2
                    while m >= l:
                        z = a[m][m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / a[m + 1][m] + a[m][m + 1]
                        q = a[m + 1][m + 1] - z - r - s
                        r = a[m + 2][m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(a[m][m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(a[m - 1][m - 1]) + abs(z) + abs(a[m + 1][m + 1]))
                        if u + v == v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        a[i][i - 2] = 0.0
                        if i != m + 2:
                            a[i][i - 3] = 0.0
                    for k in range(m, nn):
                        if k != m:
                            p = a[k][k - 1]
                            q = a[k + 1][k - 1]
                            r = a[k + 2][k - 1] if k != nn - 1 else 0.0
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                        if s == 0.0:
                            continue
                        if k == m:
                            if l != m:
                                a[k][k - 1] = -a[k][k - 1]
                        else:
                            a[k][k - 1] = -s * x
                        p += s
                        x = p / s
                        y = q / s
                        z = r / s
                        q /= p
                        r /= p
                        ak, ak1 = a[k], a[k + 1]
                        ak2 = a[k + 2] if k != nn - 1 else None
                        for j in range(k, nn + 1):
                            p = ak[j] + q * ak1[j]
                            if ak2 is not None:
                                p += r * ak2[j]
                                ak2[j] -= p * z
                            ak1[j] -= p * y
                            ak[j] -= p * x
                        for i in range(l, min(nn, k + 3) + 1):
                            ai = a[i]
                            p = x * ai[k] + y * ai[k + 1]
                            if ak2 is not None:
                                p += z * ai[k + 2]
                                ai[k + 2] -= p * r
                            ai[k + 1] -= p * q
                            ai[k] -= p
            if nn < 1 or l >= nn - 1:
                break
    return [complex(wr[i], wi[i]) for i in range(1, n + 1)]


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a real square matrix, as a complex array."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_ORDER:
        raise ValueError(f"order {m.shape[0]} exceeds {MAX_ORDER}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    found, core = isolate(m)
    values = [complex(v) for v in found]
    if core.shape[0] == 1:
        values.append(complex(core[0, 0]))
    elif core.shape[0] > 1:
        # Power-of-two scaling keeps the sweep clear of under/overflow exactly.
        peak = float(np.abs(core).max())
        scale = 2.0 ** math.frexp(peak)[1] if peak > 0 else 1.0
        values.extend(v * scale for v in _hqr(hessenberg(balance(core / scale))))
    return np.array(values, dtype=complex)


def spectral_radius(m) -> float:
    sp = eigenvalues(m)
    return float(np.max(np.abs(sp))) if sp.size else 0.0


def all_in_open_rhp(spectrum) -> bool:
    return bool(np.all(np.real(spectrum) > 0))


def all_in_unit_disk_at_one(spectrum) -> bool:
    return bool(np.all(np.abs(np.asarray(spectrum) - 1.0) < 1.0))
