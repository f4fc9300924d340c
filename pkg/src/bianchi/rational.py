"""Exact rational arithmetic backend.

Everything geometric in this package is computed over Q.  gmpy2.mpq is used
when available (noticeably faster on the envelope computations); the stdlib
Fraction is a drop-in fallback.  Both expose .numerator/.denominator, exact
comparisons, and str() of the form "p/q" (or "p" when q == 1), which is the
serialization format used throughout.
"""

try:
    from gmpy2 import mpq as QQ
except ImportError:  # pragma: no cover
    from fractions import Fraction as QQ

ZERO = QQ(0)
ONE = QQ(1)


def qq(value) -> "QQ":
    """Coerce ints, strings like '3/4', or rationals to the backend type."""
    return QQ(value)


def qq_str(x) -> str:
    """Canonical string form, parseable by qq()."""
    return str(QQ(x))
