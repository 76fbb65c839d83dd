"""Smith reduction over Z/N and the kernel / quotient computations built on it.

Matrices are numpy int64 arrays reduced mod N; N is a small torsion bound,
so products of residues never overflow.  Only unimodular row and column
operations are used, which keeps every step exact.
"""
from __future__ import annotations

from math import gcd

import numpy as np


def _egcd(a: int, b: int):
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def _unit_lift(p: int, N: int) -> int:
    """A unit u mod N with u * p = gcd(p, N) mod N."""
    g = gcd(p, N)
    m = N // g
    if m == 1:
        return 1
    u = pow(p // g, -1, m)
    while gcd(u, N) != 1:
        u += m
    return u % N


class Smith:
    """U A V = diag(d) over Z/N, with U, U^-1 and V tracked on request."""

    def __init__(self, A, N: int, left: bool = False, right: bool = True):
        A = np.array(A, dtype=np.int64).reshape(len(A), -1) if len(A) else np.zeros((0, 0), np.int64)
        self.N = N
        self.A = A % N
        m, n = self.A.shape
        self.U = np.eye(m, dtype=np.int64) if left else None
        self.Uinv = np.eye(m, dtype=np.int64) if left else None
        self.V = np.eye(n, dtype=np.int64) if right else None
        self.diag: list[int] = []
        self._run()

    # row operations -------------------------------------------------------
    def _swap_rows(self, i, j):
        if i == j:
            return
        self.A[[i, j]] = self.A[[j, i]]
        if self.U is not None:
            self.U[[i, j]] = self.U[[j, i]]
            self.Uinv[:, [i, j]] = self.Uinv[:, [j, i]]

    def _scale_row(self, i, u):
        N = self.N
        self.A[i] = self.A[i] * u % N
        if self.U is not None:
            self.U[i] = self.U[i] * u % N
            self.Uinv[:, i] = self.Uinv[:, i] * pow(u, -1, N) % N

    def _add_rows(self, rows, q, r):
        """row[rows] -= q * row[r]."""
        N = self.N
        self.A[rows] = (self.A[rows] - np.outer(q, self.A[r])) % N
        if self.U is not None:
            self.U[rows] = (self.U[rows] - np.outer(q, self.U[r])) % N
            self.Uinv[:, r] = (self.Uinv[:, r] + self.Uinv[:, rows] @ q) % N

    def _pair_rows(self, r, i, a, b):
        N = self.N
        g, s, t = _egcd(a, b)
        a2, b2 = a // g, b // g
        Ar, Ai = self.A[r].copy(), self.A[i].copy()
        self.A[r] = (s * Ar + t * Ai) % N
        self.A[i] = (-b2 * Ar + a2 * Ai) % N
        if self.U is not None:
            Ur, Ui = self.U[r].copy(), self.U[i].copy()
            self.U[r] = (s * Ur + t * Ui) % N
            self.U[i] = (-b2 * Ur + a2 * Ui) % N
            Cr, Ci = self.Uinv[:, r].copy(), self.Uinv[:, i].copy()
            self.Uinv[:, r] = (a2 * Cr + b2 * Ci) % N
            self.Uinv[:, i] = (-t * Cr + s * Ci) % N

    # column operations ----------------------------------------------------
    def _swap_cols(self, i, j):
        if i == j:
            return
        self.A[:, [i, j]] = self.A[:, [j, i]]
        if self.V is not None:
            self.V[:, [i, j]] = self.V[:, [j, i]]

    def _add_cols(self, cols, q, r):
        N = self.N
        self.A[:, cols] = (self.A[:, cols] - np.outer(self.A[:, r], q)) % N
        if self.V is not None:
            self.V[:, cols] = (self.V[:, cols] - np.outer(self.V[:, r], q)) % N

    def _pair_cols(self, r, j, a, b):
        N = self.N
        g, s, t = _egcd(a, b)
        a2, b2 = a // g, b // g
        for M in (self.A, self.V):
            if M is None:
                continue
            Cr, Cj = M[:, r].copy(), M[:, j].copy()
            M[:, r] = (s * Cr + t * Cj) % N
            M[:, j] = (-b2 * Cr + a2 * Cj) % N

    # main loop ------------------------------------------------------------
    def _run(self):
        N = self.N
        A = self.A
        m, n = A.shape
        for r in range(min(m, n)):
            sub = A[r:, r:]
            rows, cols = np.nonzero(sub)
            if len(rows) == 0:
                break
            gs = np.gcd(sub[rows, cols], N)
            k = int(np.argmin(gs))
            self._swap_rows(r, r + int(rows[k]))
            self._swap_cols(r, r + int(cols[k]))
            while True:
                p = int(A[r, r])
                u = _unit_lift(p, N)
                if u != 1:
                    self._scale_row(r, u)
                p = int(A[r, r])  # now p divides N
                col = A[r + 1:, r]
                bad = np.nonzero(col % p)[0]
                if len(bad):
                    i = r + 1 + int(bad[0])
                    self._pair_rows(r, i, p, int(A[i, r]))
                    continue
                idx = np.nonzero(col)[0]
                if len(idx):
                    self._add_rows(r + 1 + idx, col[idx] // p, r)
                row = A[r, r + 1:]
                bad = np.nonzero(row % p)[0]
                if len(bad):
                    j = r + 1 + int(bad[0])
                    self._pair_cols(r, j, p, int(A[r, j]))
                    continue
                idx = np.nonzero(row)[0]
                if len(idx):
                    self._add_cols(r + 1 + idx, row[idx] // p, r)
                break
            self.diag.append(int(A[r, r]))

    @property
    def rank(self) -> int:
        return len(self.diag)


def kernel_mod(A, N: int, ncols: int | None = None) -> np.ndarray:
    """Generators (as columns) of {x : A x = 0 mod N}."""
    A = np.array(A, dtype=np.int64)
    if A.size == 0:
        n = ncols if ncols is not None else A.shape[-1]
        return np.eye(n, dtype=np.int64)
    S = Smith(A, N)
    gens = []
    n = S.A.shape[1]
    for i in range(n):
        mult = N // gcd(S.diag[i], N) if i < S.rank else 1
        if mult % N:
            gens.append(S.V[:, i] * mult % N)
    if not gens:
        return np.zeros((n, 0), dtype=np.int64)
    return np.array(gens, dtype=np.int64).T


def _solve_scalar(d: int, c: int, N: int) -> int | None:
    g = gcd(d, N)
    if c % g:
        return None
    m = N // g
    return (c // g) * pow(d // g, -1, m) % m if m > 1 else 0


def solve_mod(A, b, N: int) -> np.ndarray | None:
    """Some x with A x = b mod N, or None."""
    S = Smith(A, N, left=True)
    c = S.U @ (np.array(b, dtype=np.int64) % N) % N
    y = np.zeros(S.A.shape[1], dtype=np.int64)
    for i, d in enumerate(S.diag):
        yi = _solve_scalar(d, int(c[i]), N)
        if yi is None:
            return None
        y[i] = yi
    if np.any(c[S.rank:] % N):
        return None
    return S.V @ y % N


def quotient_mod(K, Ngens, N: int) -> list[tuple[int, np.ndarray]]:
    """Cyclic decomposition of <K columns> / <Ngens columns> inside (Z/N)^a.

    Requires every column of Ngens to lie in the span of K.  Returns
    (order, representative) pairs for the non-trivial cyclic factors.
    """
    K = np.array(K, dtype=np.int64) % N
    a, r = K.shape
    if r == 0:
        return []
    S = Smith(K, N, left=True)
    rels = []
    for i in range(r):
        if i < S.rank:
            mult = N // gcd(S.diag[i], N)
        else:
            mult = 1
        e = np.zeros(r, dtype=np.int64)
        e[i] = mult % N
        rels.append(e)
    Ngens = np.array(Ngens, dtype=np.int64).reshape(a, -1) % N
    for j in range(Ngens.shape[1]):
        c = S.U @ Ngens[:, j] % N
        if np.any(c[S.rank:] % N):
            raise ValueError("relation generator outside the subgroup")
        z = np.zeros(r, dtype=np.int64)
        for i, d in enumerate(S.diag):
            zi = _solve_scalar(d, int(c[i]), N)
            if zi is None:
                raise ValueError("relation generator outside the subgroup")
            z[i] = zi
        rels.append(z)
    R = np.array(rels, dtype=np.int64).T
    T = Smith(R, N, left=True, right=False)
    out = []
    KV = K @ S.V % N
    for i in range(r):
        e = T.diag[i] if i < T.rank else 0
        order = gcd(e, N) if e else N
        if order == 1:
            continue
        z = T.Uinv[:, i]
        out.append((order, KV @ z % N))
    return out


def invariant_factors(orders) -> list[int]:
    """Normalise a list of cyclic orders into invariant factors d1 | d2 | ..."""
    from sympy import factorint

    by_prime: dict[int, list[int]] = {}
    for o in orders:
        for p, e in factorint(o).items():
            by_prime.setdefault(p, []).append(p ** e)
    length = max((len(v) for v in by_prime.values()), default=0)
    facs = [1] * length
    for p, powers in by_prime.items():
        powers.sort(reverse=True)
        for i, q in enumerate(powers):
            facs[i] *= q
    return sorted(facs)
