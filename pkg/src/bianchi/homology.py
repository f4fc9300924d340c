"""Integer homology of finitely presented groups via Smith normal form.

The abelianization of a presentation is the cokernel of its exponent-sum
relation matrix; the torsion-free quotient additionally kills every edge-cycle
word that carries a torsion power and every finite-order generator, which for
these groups realizes the quotient by the normal closure of the torsion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple


@dataclass
class IntMatrix:
    """Dense integer matrix (arbitrary precision)."""

    rows: int
    cols: int
    data: List[List[int]]

    @staticmethod
    def zero(rows: int, cols: int) -> "IntMatrix":
        return IntMatrix(rows, cols, [[0] * cols for _ in range(rows)])

    @staticmethod
    def identity(n: int) -> "IntMatrix":
        m = IntMatrix.zero(n, n)
        for i in range(n):
            m.data[i][i] = 1
        return m

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]]) -> "IntMatrix":
        data = [list(map(int, r)) for r in rows]
        cols = len(data[0]) if data else 0
        assert all(len(r) == cols for r in data)
        return IntMatrix(len(data), cols, data)

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [row[:] for row in self.data])

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        assert self.cols == other.rows
        out = IntMatrix.zero(self.rows, other.cols)
        for i in range(self.rows):
            ai = self.data[i]
            oi = out.data[i]
            for k in range(self.cols):
                a = ai[k]
                if a:
                    bk = other.data[k]
                    for j in range(other.cols):
                        oi[j] += a * bk[j]
        return out

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def diagonal(self) -> list:
        return [self.data[i][i] for i in range(min(self.rows, self.cols))]


def smith_normal_form(a: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """(U, S, V) with S = U @ A @ V diagonal, U and V unimodular, and the
    diagonal entries non-negative with d1 | d2 | ... .
    """
    S = a.copy()
    U = IntMatrix.identity(a.rows)
    V = IntMatrix.identity(a.cols)
    m, n = a.rows, a.cols

    def swap_rows(i, j):
        S.data[i], S.data[j] = S.data[j], S.data[i]
        U.data[i], U.data[j] = U.data[j], U.data[i]

    def swap_cols(i, j):
        for r in S.data:
            r[i], r[j] = r[j], r[i]
        for r in V.data:
            r[i], r[j] = r[j], r[i]

    def addmul_row(dst, src, q):
        S.data[dst] = [x - q * y for x, y in zip(S.data[dst], S.data[src])]
        U.data[dst] = [x - q * y for x, y in zip(U.data[dst], U.data[src])]

    def addmul_col(dst, src, q):
        for r in S.data:
            r[dst] -= q * r[src]
        for r in V.data:
            r[dst] -= q * r[src]

    def negate_row(i):
        S.data[i] = [-x for x in S.data[i]]
        U.data[i] = [-x for x in U.data[i]]

    for k in range(min(m, n)):
        while True:
            # pivot: smallest nonzero magnitude in the remaining block
            piv = None
            best = None
            for i in range(k, m):
                for j in range(k, n):
                    v = abs(S.data[i][j])
                    if v and (best is None or v < best):
                        best, piv = v, (i, j)
            if piv is None:
                break
            if piv != (k, k):
                if piv[0] != k:
                    swap_rows(k, piv[0])
                if piv[1] != k:
                    swap_cols(k, piv[1])
            p = S.data[k][k]
            dirty = False
            for i in range(k + 1, m):
                if S.data[i][k]:
                    addmul_row(i, k, S.data[i][k] // p)
                    if S.data[i][k]:
                        dirty = True
            for j in range(k + 1, n):
                if S.data[k][j]:
                    addmul_col(j, k, S.data[k][j] // p)
                    if S.data[k][j]:
                        dirty = True
            if dirty:
                continue
            # enforce divisibility of the remaining block by the pivot
            offender = None
            for i in range(k + 1, m):
                for j in range(k + 1, n):
                    if S.data[i][j] % p:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            addmul_row(k, offender, -1)
        if S.data[k][k] < 0:
            negate_row(k)
    for i in range(min(m, n)):
        if S.data[i][i] < 0:
            negate_row(i)
    assert U @ a @ V == S, "Smith reduction lost the transform"
    diag = S.diagonal()
    for i in range(len(diag) - 1):
        if diag[i + 1]:
            assert diag[i] != 0 and diag[i + 1] % diag[i] == 0, "divisibility chain"
    return U, S, V


@dataclass(frozen=True)
class AbelianInvariants:
    """free_rank copies of Z plus the cyclic factors in torsion."""

    free_rank: int
    torsion: tuple  # invariant factors d1 | d2 | ..., each >= 2

    def __str__(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion


def invariants_of_matrix(rel: IntMatrix, n_gens: int) -> AbelianInvariants:
    """Invariants of Z^n_gens modulo the row span of rel."""
    if rel.rows == 0:
        return AbelianInvariants(n_gens, ())
    _u, s, _v = smith_normal_form(rel)
    diag = [d for d in s.diagonal() if d != 0]
    torsion = tuple(d for d in diag if d > 1)
    return AbelianInvariants(n_gens - len(diag), torsion)


def _exponent_row(word: Sequence[int], power: int, n_gens: int) -> list:
    row = [0] * n_gens
    for tok in word:
        row[abs(tok) - 1] += power if tok > 0 else -power
    return row


def abelianization(pres) -> AbelianInvariants:
    """H_1 of the presented group: cokernel of the exponent-sum matrix."""
    n = len(pres.generators)
    rows = [_exponent_row(r.word, r.power, n) for r in pres.relators]
    return invariants_of_matrix(IntMatrix.from_rows(rows) if rows
                                else IntMatrix.zero(0, n), n)


def torsion_free_h1(pres) -> AbelianInvariants:
    """H_1 of the group modulo the normal closure of its torsion.

    Kills, on top of the relators, the word of every relator of the form
    w^n with n >= 2 and every generator of finite projective order.
    """
    n = len(pres.generators)
    rows = [_exponent_row(r.word, r.power, n) for r in pres.relators]
    for word in pres.torsion_words:
        rows.append(_exponent_row(word, 1, n))
    for g in pres.generators:
        if g.proj_order is not None:
            rows.append(_exponent_row((g.index,), 1, n))
    return invariants_of_matrix(IntMatrix.from_rows(rows) if rows
                                else IntMatrix.zero(0, n), n)


def cuspidal_defect(D: int, psl_invariants: AbelianInvariants, cusp_count: int,
                    torus_cusps: Optional[bool] = None) -> int:
    """free rank of H_1(PSL quotient) minus the number of torus cusps.

    Zero means the restriction to the boundary is injective (no cuspidal
    cohomology).  The cusp cross-sections are tori except for D = -3, -4,
    where they stay spheres and contribute nothing.
    """
    if torus_cusps is None:
        torus_cusps = D not in (-3, -4)
    s = psl_invariants.free_rank - (cusp_count if torus_cusps else 0)
    if s < 0:
        raise ArithmeticError(
            f"negative cuspidal defect {s} for D={D}: rank "
            f"{psl_invariants.free_rank} below cusp count {cusp_count}")
    return s


# ---------------------------------------------------------------------------
# the plain-text presentation format emitted by the poincare layer
# ---------------------------------------------------------------------------


@dataclass
class ParsedPresentation:
    generators: list  # objects with .index and .proj_order, order as parsed
    relators: list    # objects with .word and .power
    torsion_words: list


@dataclass(frozen=True)
class _Gen:
    index: int
    name: str
    proj_order: Optional[int]


@dataclass(frozen=True)
class _Rel:
    word: tuple
    power: int


def parse_presentation(text: str) -> ParsedPresentation:
    """Parse the `gen` / `ord` / `rel` format; see format_presentation."""
    gens: List[_Gen] = []
    orders: Dict[int, int] = {}
    rels: List[_Rel] = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "gen":
            gens = [_Gen(i + 1, name, None) for i, name in enumerate(parts[1:])]
        elif parts[0] == "ord":
            orders[int(parts[1])] = int(parts[2])
        elif parts[0] == "rel":
            m = re.fullmatch(r"\^(\d+)", parts[-1])
            if not m:
                raise ValueError(f"rel line missing power: {line!r}")
            word = tuple(int(t) for t in parts[1:-1])
            rels.append(_Rel(word, int(m.group(1))))
        else:
            raise ValueError(f"unknown line in presentation: {line!r}")
    gens = [_Gen(g.index, g.name, orders.get(g.index)) for g in gens]
    torsion = [r.word for r in rels if r.power >= 2]
    return ParsedPresentation(gens, rels, torsion)
