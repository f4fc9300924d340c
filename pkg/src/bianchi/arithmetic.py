"""Exact arithmetic in imaginary quadratic orders and their fraction fields.

The order O_D of discriminant D < 0 (D = 0 or 1 mod 4) is Z[omega] with

    omega = sqrt(D)/2       if D = 0 mod 4,   trace T = 0, norm N = |D|/4
    omega = (1+sqrt(D))/2   if D = 1 mod 4,   trace T = 1, norm N = (1+|D|)/4

so omega^2 = T*omega - N.  Points of the boundary plane C are kept in the
rational chart (x, y) <-> x + y*sqrt(|D|)*i, in which every element of
Q(sqrt(D)) has rational coordinates and squared distances are rational:
dist2 = dx^2 + |D|*dy^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from .rational import QQ


class ExactPoint(NamedTuple):
    """The point x + y*sqrt(|D|)*i of C, with x and y rational."""

    x: "QQ"
    y: "QQ"


@dataclass(frozen=True)
class Order:
    """The quadratic order O_D, carrying the omega basis data."""

    D: int
    T: int  # trace of omega
    N: int  # norm of omega

    def __repr__(self) -> str:
        return f"Order(D={self.D})"

    @property
    def abs_D(self) -> int:
        return -self.D

    # -- element constructors -------------------------------------------------

    def elem(self, a: int, b: int = 0) -> "QuadInt":
        return QuadInt(int(a), int(b), self)

    def zero(self) -> "QuadInt":
        return self.elem(0)

    def one(self) -> "QuadInt":
        return self.elem(1)

    def omega(self) -> "QuadInt":
        return self.elem(0, 1)

    # -- chart <-> basis coordinate conversions -------------------------------

    def point_of_coeffs(self, alpha, beta) -> ExactPoint:
        """Chart point of alpha + beta*omega (alpha, beta rational)."""
        alpha = QQ(alpha)
        beta = QQ(beta)
        return ExactPoint(alpha + beta * self.T / 2, beta / 2)

    def coeffs_of_point(self, p: ExactPoint) -> tuple:
        """Inverse of point_of_coeffs."""
        beta = 2 * p.y
        return (p.x - self.T * p.y, beta)

    def point_of_elem(self, x: "QuadInt") -> ExactPoint:
        return self.point_of_coeffs(x.a, x.b)

    def point_of_field(self, num: "QuadInt", den: int) -> ExactPoint:
        if den == 0:
            raise ZeroDivisionError("field element with zero denominator")
        return self.point_of_coeffs(QQ(num.a, den), QQ(num.b, den))

    def field_of_point(self, p: ExactPoint) -> tuple:
        """Return (num: QuadInt, den: int > 0) with p = num/den, in lowest terms."""
        alpha, beta = self.coeffs_of_point(p)
        den = _lcm(_den_of(alpha), _den_of(beta))
        num = self.elem(int(alpha * den), int(beta * den))
        g = math.gcd(math.gcd(abs(num.a), abs(num.b)), den)
        if g > 1:
            num = self.elem(num.a // g, num.b // g)
            den //= g
        return num, den

    # -- metric ----------------------------------------------------------------

    def dist2(self, p: ExactPoint, q: ExactPoint) -> "QQ":
        dx = p.x - q.x
        dy = p.y - q.y
        return dx * dx + self.abs_D * dy * dy

    def norm2_point(self, p: ExactPoint) -> "QQ":
        return p.x * p.x + self.abs_D * p.y * p.y

    def coeff_mul(self, x: "QuadInt", v: tuple) -> tuple:
        """Multiply the field element with basis coeffs v by the integer x."""
        alpha, beta = v
        return (x.a * alpha - x.b * beta * self.N,
                x.a * beta + x.b * alpha + x.b * beta * self.T)

    def coeff_conj(self, v: tuple) -> tuple:
        alpha, beta = v
        return (alpha + beta * self.T, -beta)

    def coeff_norm(self, v: tuple):
        alpha, beta = v
        return alpha * alpha + alpha * beta * self.T + beta * beta * self.N


def make_order(D: int) -> Order:
    """Validate a discriminant and return its order with omega's (T, N)."""
    if D >= 0:
        raise ValueError(f"D = {D}: discriminant must be negative")
    if D % 4 == 0:
        return Order(D, 0, (-D) // 4)
    if D % 4 == 1:
        return Order(D, 1, (1 - D) // 4)
    raise ValueError(f"D = {D}: not a discriminant (need D = 0 or 1 mod 4)")


@dataclass(frozen=True)
class QuadInt:
    """Element a + b*omega of O_D."""

    a: int
    b: int
    order: Order

    def __repr__(self) -> str:
        return f"({self.a}{self.b:+}w)"

    def key(self) -> tuple:
        return (self.a, self.b)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __add__(self, other: "QuadInt") -> "QuadInt":
        return QuadInt(self.a + other.a, self.b + other.b, self.order)

    def __sub__(self, other: "QuadInt") -> "QuadInt":
        return QuadInt(self.a - other.a, self.b - other.b, self.order)

    def __neg__(self) -> "QuadInt":
        return QuadInt(-self.a, -self.b, self.order)

    def __mul__(self, other: "QuadInt") -> "QuadInt":
        o = self.order
        a, b, c, d = self.a, self.b, other.a, other.b
        return QuadInt(a * c - b * d * o.N, a * d + b * c + b * d * o.T, o)

    def conj(self) -> "QuadInt":
        return QuadInt(self.a + self.b * self.order.T, -self.b, self.order)

    def norm(self) -> int:
        o = self.order
        return self.a * self.a + self.a * self.b * o.T + self.b * self.b * o.N

    def divides(self, other: "QuadInt") -> bool:
        return not self.is_zero() and self.exact_div_or_none(other) is not None

    def exact_div_or_none(self, num: "QuadInt") -> Optional["QuadInt"]:
        """num / self when the quotient lies in O_D, else None."""
        n = self.norm()
        if n == 0:
            return None
        t = num * self.conj()
        if t.a % n or t.b % n:
            return None
        return QuadInt(t.a // n, t.b // n, self.order)

    def __pow__(self, k: int) -> "QuadInt":
        r = self.order.one()
        x = self
        while k > 0:
            if k & 1:
                r = r * x
            x = x * x
            k >>= 1
        return r


def norm(x: QuadInt) -> int:
    """Field norm x * conj(x); multiplicative and non-negative."""
    return x.norm()


def units(order: Order) -> tuple:
    """Unit group of O_D: {±1} except for the Gaussian and Eisenstein orders."""
    one = order.one()
    w = order.omega()
    if order.D == -4:
        return (one, -one, w, -w)
    if order.D == -3:
        return (one, -one, w, -w, w - one, one - w)
    return (one, -one)


def canonical_unit_multiple(x: QuadInt) -> QuadInt:
    """Deterministic representative of x up to units (lex-min on (a, b))."""
    return min((u * x for u in units(x.order)), key=QuadInt.key)


# ---------------------------------------------------------------------------
# Integer row HNF over Z^2 (used for ideal arithmetic)
# ---------------------------------------------------------------------------


def hnf_rows(rows: Iterable[tuple]) -> tuple:
    """Row-style Hermite form of a sublattice of Z^2.

    Returns ((d1, t), (0, d2)) with d1, d2 >= 0; the zero lattice gives
    ((0, 0), (0, 0)) and rank-1 lattices a zero diagonal entry.
    """
    work = [(int(r[0]), int(r[1])) for r in rows if r[0] or r[1]]
    # Clear the first column down to one pivot by gcd steps.
    pivot = None
    rest = []
    for r in work:
        if r[0] == 0:
            rest.append(r[1])
            continue
        if pivot is None:
            pivot = r
            continue
        a, b = pivot, r
        while b[0]:
            q = a[0] // b[0]
            a = (a[0] - q * b[0], a[1] - q * b[1])
            a, b = b, a
        pivot = a
        rest.append(b[1])
    d2 = 0
    for v in rest:
        d2 = math.gcd(d2, abs(v))
    if pivot is None:
        return ((0, 0), (0, d2))
    d1, t = pivot
    if d1 < 0:
        d1, t = -d1, -t
    if d2:
        t %= d2
    return ((d1, t), (0, d2))


def ideal_index(c: QuadInt, d: QuadInt) -> int:
    """Index [O_D : (c, d)] of the O-ideal generated by c and d.

    Computed as the determinant of the Hermite form of the Z-module spanned by
    {c, c*omega, d, d*omega}.  Equals 1 exactly when (c, d) = O_D.
    """
    if c.is_zero() and d.is_zero():
        raise ValueError("ideal_index requires (c, d) != (0, 0)")
    w = c.order.omega()
    rows = [(x.a, x.b) for x in (c, c * w, d, d * w)]
    (d1, _), (_, d2) = hnf_rows(rows)
    return d1 * d2


def _xgcd(a: int, b: int) -> tuple:
    """(g, x, y) with a*x + b*y = g = gcd(a, b)."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def coprime_witness(c: QuadInt, d: QuadInt) -> tuple:
    """(x, y) in O_D^2 with x*d + y*c = 1, for a coprime pair (c, d).

    This is the determinant-one completion witness: [[x, -y], [c, d]] has
    determinant x*d + y*c = 1.
    """
    order = c.order
    w = order.omega()
    gens = [c, c * w, d, d * w]
    rows = [[x.a, x.b] for x in gens]
    n = 4
    # Row-reduce [rows | I] to Hermite form, tracking the transform.
    aug = [rows[i] + [1 if j == i else 0 for j in range(n)] for i in range(n)]

    def reduce_col(col: int, start: int) -> Optional[int]:
        piv = None
        for i in range(start, n):
            if aug[i][col]:
                if piv is None:
                    piv = i
                    continue
                while aug[i][col]:
                    q = aug[piv][col] // aug[i][col]
                    for k in range(len(aug[piv])):
                        aug[piv][k] -= q * aug[i][k]
                    aug[piv], aug[i] = aug[i], aug[piv]
        if piv is not None and aug[piv][col] < 0:
            for k in range(len(aug[piv])):
                aug[piv][k] = -aug[piv][k]
        if piv is not None and piv != start:
            aug[start], aug[piv] = aug[piv], aug[start]
            piv = start
        return piv

    reduce_col(0, 0)
    reduce_col(1, 1)
    if aug[0][0] != 1 or aug[0][1] != 0:
        # Clear the (0,1) entry with row 1 if possible, then re-check.
        if aug[1][1] and aug[0][1] % aug[1][1] == 0:
            q = aug[0][1] // aug[1][1]
            for k in range(len(aug[0])):
                aug[0][k] -= q * aug[1][k]
    if aug[0][0] != 1 or aug[0][1] != 0:
        raise ValueError(f"(c, d) = ({c}, {d}) is not a coprime pair")
    u = aug[0][2:]
    y = order.elem(u[0], u[1])
    x = order.elem(u[2], u[3])
    assert x * d + y * c == order.one()
    return x, y


def reduce_mod_lattice(p: ExactPoint, order: Order) -> tuple:
    """Translate p into the half-open centred fundamental parallelogram.

    Returns (p', lam) with p' = p - lam, lam in O_D, and the basis coefficients
    of p' in [-1/2, 1/2).  Idempotent.
    """
    alpha, beta = order.coeffs_of_point(p)
    a = _round_half_up(alpha)
    b = _round_half_up(beta)
    lam = order.elem(a, b)
    p2 = order.point_of_coeffs(alpha - a, beta - b)
    return p2, lam


def _round_half_up(x) -> int:
    """Nearest integer with .5 rounded up (so residues live in [-1/2, 1/2))."""
    num, den = x.numerator, x.denominator
    return (2 * num + den) // (2 * den)


def _den_of(x) -> int:
    return int(x.denominator)


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


@dataclass(frozen=True)
class FieldElem:
    """Element of Q(sqrt(D)) as num/den in lowest terms with den >= 1."""

    num: QuadInt
    den: int

    @staticmethod
    def make(num: QuadInt, den: int) -> "FieldElem":
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num, den = -num, -den
        g = math.gcd(math.gcd(abs(num.a), abs(num.b)), den)
        if g > 1:
            num = QuadInt(num.a // g, num.b // g, num.order)
            den //= g
        return FieldElem(num, den)

    @staticmethod
    def from_point(p: ExactPoint, order: Order) -> "FieldElem":
        num, den = order.field_of_point(p)
        return FieldElem(num, den)

    def point(self) -> ExactPoint:
        return self.num.order.point_of_field(self.num, self.den)


# ---------------------------------------------------------------------------
# 2x2 matrices over O_D and their action on hyperbolic 3-space
# ---------------------------------------------------------------------------

INFINITY = "inf"  # marker for the ideal point at infinity


@dataclass(frozen=True)
class Mat2:
    """Matrix [[a, b], [c, d]] over O_D with unit determinant."""

    a: QuadInt
    b: QuadInt
    c: QuadInt
    d: QuadInt

    def __repr__(self) -> str:
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"

    @property
    def order(self) -> Order:
        return self.a.order

    def key(self) -> tuple:
        return (self.a.a, self.a.b, self.b.a, self.b.b,
                self.c.a, self.c.b, self.d.a, self.d.b)

    def det(self) -> QuadInt:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inv(self) -> "Mat2":
        u = self.det()
        if u.norm() != 1:
            raise ValueError("matrix determinant is not a unit")
        ui = u.conj()  # inverse of a norm-one unit
        return Mat2(ui * self.d, -(ui * self.b), -(ui * self.c), ui * self.a)

    def is_scalar(self) -> bool:
        return self.b.is_zero() and self.c.is_zero() and self.a == self.d

    def scale(self, u: QuadInt) -> "Mat2":
        return Mat2(u * self.a, u * self.b, u * self.c, u * self.d)

    # -- actions ---------------------------------------------------------------

    def apply_h3(self, p: ExactPoint, h2) -> tuple:
        """Image of the upper-half-space point over p at height t (t^2 = h2 > 0
        or h2 = 0 with c*z + d != 0).  Returns (point, new h2), exactly.
        """
        o = self.order
        z = o.coeffs_of_point(p)
        h2 = QQ(h2)
        cz_d = _coeff_add(o.coeff_mul(self.c, z), (QQ(self.d.a), QQ(self.d.b)))
        az_b = _coeff_add(o.coeff_mul(self.a, z), (QQ(self.b.a), QQ(self.b.b)))
        delta = o.coeff_norm(cz_d) + self.c.norm() * h2
        if delta == 0:
            raise ZeroDivisionError("point maps to infinity")
        num = _coeff_add(
            _coeff_mul_pair(o, az_b, o.coeff_conj(cz_d)),
            _coeff_scale(o.coeff_mul(self.a, _coeffs_of(o, self.c.conj())), h2),
        )
        w = (num[0] / delta, num[1] / delta)
        return o.point_of_coeffs(w[0], w[1]), h2 / (delta * delta)

    def apply_boundary(self, p) -> object:
        """Moebius action on the boundary P^1: chart points or INFINITY."""
        o = self.order
        if p == INFINITY:
            if self.c.is_zero():
                return INFINITY
            num, den = self.a, self.c
            return o.point_of_coeffs(*_coeff_div(o, _coeffs_of(o, num), _coeffs_of(o, den)))
        z = o.coeffs_of_point(p)
        cz_d = _coeff_add(o.coeff_mul(self.c, z), (QQ(self.d.a), QQ(self.d.b)))
        if cz_d[0] == 0 and cz_d[1] == 0:
            return INFINITY
        az_b = _coeff_add(o.coeff_mul(self.a, z), (QQ(self.b.a), QQ(self.b.b)))
        return o.point_of_coeffs(*_coeff_div(o, az_b, cz_d))

    def apply_cusp(self, pq: tuple) -> tuple:
        """Projective action on a cusp (p : q) with p, q in O_D."""
        p, q = pq
        return (self.a * p + self.b * q, self.c * p + self.d * q)


def _coeffs_of(order: Order, x: QuadInt) -> tuple:
    return (QQ(x.a), QQ(x.b))


def _coeff_add(u: tuple, v: tuple) -> tuple:
    return (u[0] + v[0], u[1] + v[1])


def _coeff_scale(u: tuple, s) -> tuple:
    return (u[0] * s, u[1] * s)


def _coeff_mul_pair(order: Order, u: tuple, v: tuple) -> tuple:
    a, b = u
    c, d = v
    return (a * c - b * d * order.N, a * d + b * c + b * d * order.T)


def _coeff_div(order: Order, u: tuple, v: tuple) -> tuple:
    n = order.coeff_norm(v)
    w = _coeff_mul_pair(order, u, order.coeff_conj(v))
    return (w[0] / n, w[1] / n)


def identity_mat(order: Order) -> Mat2:
    one, zero = order.one(), order.zero()
    return Mat2(one, zero, zero, one)


def translation_mat(lam: QuadInt) -> Mat2:
    o = lam.order
    return Mat2(o.one(), lam, o.zero(), o.one())


# ---------------------------------------------------------------------------
# Ideals as Z-modules (Hermite bases), principality and class equivalence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ideal:
    """Nonzero integral O_D-ideal with Hermite Z-basis {a1, b1 + b2*omega}."""

    a1: int
    b1: int
    b2: int
    order: Order

    @staticmethod
    def from_gens(gens: Sequence[QuadInt], order: Order) -> "Ideal":
        w = order.omega()
        rows = []
        for g in gens:
            # swapped coordinates (omega first) so the Hermite form comes out
            # with a pure-integer second basis vector
            rows.append((g.b, g.a))
            gw = g * w
            rows.append((gw.b, gw.a))
        (d1, t), (_, d2) = hnf_rows(rows)
        if d1 == 0 or d2 == 0:
            raise ValueError("zero ideal")
        return Ideal(d2, t, d1, order)

    def norm(self) -> int:
        return self.a1 * self.b2

    def contains(self, x: QuadInt) -> bool:
        if x.b % self.b2:
            return False
        j = x.b // self.b2
        return (x.a - j * self.b1) % self.a1 == 0

    def gens(self) -> tuple:
        o = self.order
        return (o.elem(self.a1, 0), o.elem(self.b1, self.b2))

    def conj(self) -> "Ideal":
        return Ideal.from_gens([g.conj() for g in self.gens()], self.order)

    def mul(self, other: "Ideal") -> "Ideal":
        gens = [g * h for g in self.gens() for h in other.gens()]
        return Ideal.from_gens(gens, self.order)

    def scale_down(self, n: int) -> "Ideal":
        """Divide every basis entry by the integer n (must divide exactly)."""
        if self.a1 % n or self.b1 % n or self.b2 % n:
            raise ValueError("not divisible")
        return Ideal(self.a1 // n, self.b1 // n, self.b2 // n, self.order)

    def principal_gen(self) -> Optional[QuadInt]:
        """A generator when the ideal is principal, else None.

        An integral ideal I is principal iff it contains an element of norm
        equal to N(I); the search space is the finite set of lattice points
        x = i*a1 + j*(b1 + b2*omega) with norm N(I).
        """
        o = self.order
        target = self.norm()
        # norm(u + v*omega) >= |D|/4 * v^2, so v = j*b2 is bounded.
        vmax = math.isqrt(4 * target // o.abs_D) if o.abs_D else 0
        jmax = vmax // self.b2
        for j in range(-jmax, jmax + 1):
            v = j * self.b2
            # solve u^2 + u*v*T + v^2*N = target for integer u
            disc = v * v * o.T * o.T - 4 * (v * v * o.N - target)
            if disc < 0:
                continue
            s = math.isqrt(disc)
            if s * s != disc:
                continue
            for sgn in (1, -1) if s else (1,):
                num = -v * o.T + sgn * s
                if num % 2:
                    continue
                u = num // 2
                x = o.elem(u, v)
                if (u - j * self.b1) % self.a1 == 0 and x.norm() == target:
                    assert self.contains(x)
                    return x
        return None

    def is_principal(self) -> bool:
        return self.principal_gen() is not None


def cusp_ideal(p: QuadInt, q: QuadInt) -> Ideal:
    """The integral ideal (p, q) attached to the cusp p/q ((1,0) = infinity)."""
    return Ideal.from_gens([p, q], p.order)


def ideals_equivalent(i1: Ideal, i2: Ideal) -> bool:
    """Same ideal class test: I1 * conj(I2) principal (J*conj(J) = N(J)*O)."""
    prod = i1.mul(i2.conj())
    return prod.is_principal()


def cusps_equivalent(pq1: tuple, pq2: tuple) -> bool:
    """Ideal-class equivalence of two cusps of P^1(Q(sqrt(D)))."""
    return ideals_equivalent(cusp_ideal(*pq1), cusp_ideal(*pq2))


def ideals_of_norm(order: Order, n: int) -> list:
    """All integral ideals of norm n (Hermite enumeration)."""
    out = []
    for d in range(1, math.isqrt(n) + 1):
        if n % (d * d):
            continue
        a0 = n // (d * d)
        for b0 in range(a0):
            # O-module condition: a0 divides norm(b0 + omega)
            if (b0 * b0 + b0 * order.T + order.N) % a0 == 0:
                out.append(Ideal(a0 * d, b0 * d, d, order))
    return out
