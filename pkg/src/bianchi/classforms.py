"""Class numbers and cusp representatives via reduced binary quadratic forms.

This is the number-theoretic side of the cusp count: the number of reduced
primitive positive forms of discriminant D equals the ideal class number h_D,
and each non-principal form (a, b, c) yields the cusp ((-b + sqrt(D))/2) / a
whose ideal (a, (-b + sqrt(D))/2) lies in the corresponding class.  The
geometric pipeline is checked against these counts, never the other way round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .arithmetic import Ideal, Order, QuadInt, cusp_ideal, ideals_equivalent


@dataclass(frozen=True)
class QuadForm:
    """Reduced primitive positive definite form a*x^2 + b*xy + c*y^2."""

    a: int
    b: int
    c: int

    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def is_ambiguous(self) -> bool:
        return self.b == 0 or self.a == self.b or self.a == self.c


def reduced_forms(order: Order) -> list:
    """All reduced primitive forms of discriminant D, sorted."""
    D = order.D
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a, a + 1):
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a:
                continue
            if (abs(b) == a or a == c) and b < 0:
                continue
            if math.gcd(math.gcd(a, abs(b)), c) != 1:
                continue
            out.append(QuadForm(a, b, c))
        a += 1
    out.sort(key=lambda f: (f.a, f.b, f.c))
    return out


def class_number(order: Order) -> int:
    return len(reduced_forms(order))


def genus_rank(order: Order) -> int:
    """Z_2-rank of the genus group: one less than the number of prime divisors."""
    n = order.abs_D
    count = 0
    p = 2
    while p * p <= n:
        if n % p == 0:
            count += 1
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        count += 1
    return count - 1


def ambiguous_form_two_rank(order: Order) -> int:
    """2-rank of the form class group, from the count of ambiguous reduced forms.

    The ambiguous reduced forms biject with the 2-torsion classes, so their
    count is 2^rank; used as an independent cross-check of genus_rank.
    """
    count = sum(1 for f in reduced_forms(order) if f.is_ambiguous())
    rank = count.bit_length() - 1
    if 1 << rank != count:
        raise ArithmeticError(f"ambiguous form count {count} is not a power of two")
    return rank


@dataclass(frozen=True)
class CuspRep:
    """Cusp (p : q) of P^1(Q(sqrt(D))) tagged with its form-class index."""

    p: QuadInt
    q: QuadInt
    ideal_class_tag: int

    def ideal(self) -> Ideal:
        return cusp_ideal(self.p, self.q)

    def is_infinity(self) -> bool:
        return self.q.is_zero()


def cusp_representatives(order: Order) -> list:
    """One cusp per ideal class; the principal class is represented by infinity.

    The form (a, b, c) corresponds to the ideal (a, (-b + sqrt(D))/2), giving
    the finite cusp ((-b + sqrt(D))/2) / a.
    """
    forms = reduced_forms(order)
    reps = []
    for tag, f in enumerate(forms):
        if f.a == 1:
            reps.append(CuspRep(order.one(), order.zero(), tag))
            continue
        # (-b + sqrt(D))/2 = (-b - T)/2 + omega, integral since b = D = T mod 2
        mu = order.elem((-f.b - order.T) // 2, 1)
        reps.append(CuspRep(mu, order.elem(f.a), tag))
    return reps


def match_cusp_class(point_pq: tuple, reps: list) -> int:
    """Index of the representative ideal-class containing the given cusp.

    Raises if no representative matches (which would mean a broken cusp).
    """
    ideal = cusp_ideal(*point_pq)
    for i, rep in enumerate(reps):
        if ideals_equivalent(ideal, rep.ideal()):
            return i
    raise ArithmeticError(f"cusp {point_pq} matches no ideal class")
