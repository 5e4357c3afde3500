"""Cohomology-valued Laurent polynomials in the equivariant parameter z."""

from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from src.coh_ring import CohClass, CohRing, RationalLike, parse_rational
from src.errors import InvalidArgumentError, NotInvertibleError


class ZLaurent:
    """
    Finite association z-exponent -> CohClass with no stored zero classes.

    Values are immutable; every operation returns a new ZLaurent.
    """

    __slots__ = ("ring", "terms")

    def __init__(self, ring: CohRing, terms: Optional[Mapping[int, CohClass]] = None):
        self.ring = ring
        clean: Dict[int, CohClass] = {}
        for k, cls in (terms or {}).items():
            if not isinstance(k, int):
                raise InvalidArgumentError(f"z-exponent must be an integer, got {k!r}")
            if not cls.is_zero():
                clean[k] = cls
        self.terms = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, ring: CohRing) -> "ZLaurent":
        return cls(ring, {})

    @classmethod
    def one(cls, ring: CohRing) -> "ZLaurent":
        return cls(ring, {0: ring.unit()})

    @classmethod
    def monomial(cls, value: CohClass, exponent: int = 0) -> "ZLaurent":
        return cls(value.ring, {exponent: value})

    @classmethod
    def z_power(cls, ring: CohRing, exponent: int, scalar: RationalLike = 1) -> "ZLaurent":
        return cls(ring, {exponent: ring.scalar(scalar)})

    @classmethod
    def linear(cls, value: CohClass, z_coefficient: RationalLike) -> "ZLaurent":
        """value + c*z."""
        c = parse_rational(z_coefficient)
        return cls(value.ring, {0: value, 1: value.ring.scalar(c)}) if c else cls(value.ring, {0: value})

    # -- inspection -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def exponents(self) -> List[int]:
        return sorted(self.terms)

    def min_exponent(self) -> Optional[int]:
        return min(self.terms) if self.terms else None

    def max_exponent(self) -> Optional[int]:
        return max(self.terms) if self.terms else None

    def coeff(self, k: int) -> CohClass:
        return self.terms.get(k) or self.ring.zero()

    def items(self) -> Iterable[Tuple[int, CohClass]]:
        return sorted(self.terms.items())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ZLaurent):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        return hash(tuple(sorted((k, v.coeffs) for k, v in self.terms.items())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({v})z^{k}" for k, v in self.items())

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "ZLaurent") -> None:
        if not isinstance(other, ZLaurent):
            raise InvalidArgumentError(f"expected a ZLaurent, got {type(other).__name__}")
        if other.ring is not self.ring and other.ring != self.ring:
            raise InvalidArgumentError("Laurent polynomials live in different rings")

    def __add__(self, other: "ZLaurent") -> "ZLaurent":
        self._check(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return ZLaurent(self.ring, out)

    def __sub__(self, other: "ZLaurent") -> "ZLaurent":
        return self + (-other)

    def __neg__(self) -> "ZLaurent":
        return ZLaurent(self.ring, {k: -v for k, v in self.terms.items()})

    def __mul__(self, other) -> "ZLaurent":
        if isinstance(other, ZLaurent):
            return zl_mul(self, other)
        if isinstance(other, CohClass):
            return zl_mul(self, ZLaurent.monomial(other))
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, scalar: RationalLike) -> "ZLaurent":
        s = parse_rational(scalar)
        if not s:
            return ZLaurent.zero(self.ring)
        return ZLaurent(self.ring, {k: v * s for k, v in self.terms.items()})

    def shift(self, k: int) -> "ZLaurent":
        """Multiplication by z^k."""
        return ZLaurent(self.ring, {e + k: v for e, v in self.terms.items()})

    def truncate_below(self, low: Optional[int]) -> "ZLaurent":
        if low is None:
            return self
        return ZLaurent(self.ring, {k: v for k, v in self.terms.items() if k >= low})

    def nonnegative_part(self) -> "ZLaurent":
        return ZLaurent(self.ring, {k: v for k, v in self.terms.items() if k >= 0})

    def negative_part(self) -> "ZLaurent":
        return ZLaurent(self.ring, {k: v for k, v in self.terms.items() if k < 0})

    def power(self, exponent: int) -> "ZLaurent":
        result = ZLaurent.one(self.ring)
        for _ in range(exponent):
            result = zl_mul(result, self)
        return result

    def invert_unit(self, low: Optional[int] = None) -> "ZLaurent":
        return zl_invert_unit(self, low)


def zl_add(a: ZLaurent, b: ZLaurent) -> ZLaurent:
    """Termwise sum; cancelled exponents are dropped."""
    return a + b


def zl_mul(a: ZLaurent, b: ZLaurent) -> ZLaurent:
    """Cauchy product on z-exponents with class products from the ring table."""
    a._check(b)
    ring = a.ring
    sparse = ring._sparse
    rank = ring.rank
    acc: Dict[int, List[Fraction]] = {}
    for ea, ca in a.terms.items():
        a_support = [(i, x) for i, x in enumerate(ca.coeffs) if x]
        for eb, cb in b.terms.items():
            b_support = [(j, y) for j, y in enumerate(cb.coeffs) if y]
            vec = acc.get(ea + eb)
            if vec is None:
                vec = acc[ea + eb] = [Fraction(0)] * rank
            for i, x in a_support:
                row = sparse[i]
                for j, y in b_support:
                    w = x * y
                    for k, c in row[j]:
                        vec[k] += w * c
    return ZLaurent(ring, {e: CohClass(ring, vec) for e, vec in acc.items()})


def zl_coeff(a: ZLaurent, k: int) -> CohClass:
    return a.coeff(k)


def zl_invert_unit(a: ZLaurent, low: Optional[int] = None) -> ZLaurent:
    """
    Inverse of a = c*z^d*(1 + u) where z^d is the top exponent, c a nonzero
    rational and u has nilpotent z^0 part and otherwise negative exponents.

    With nilpotent u the expansion is finite and exact. A scalar part in the
    negative exponents of u makes the expansion infinite; `low` is then
    required and terms below z^low are dropped.
    """
    if a.is_zero():
        raise NotInvertibleError("zero has no inverse")
    ring = a.ring
    d = a.max_exponent()
    lead = a.coeff(d)
    c = lead.scalar_part()
    if not c:
        raise NotInvertibleError(f"leading coefficient {lead} at z^{d} is not an invertible scalar")
    inv_c = 1 / c
    u = (a - ZLaurent.z_power(ring, d, c)).shift(-d).scale(inv_c)
    infinite = any(
        v.coeffs[0] for k, v in u.terms.items() if k < 0
    )
    if infinite and low is None:
        raise InvalidArgumentError("inverse is an infinite expansion; a z-window `low` is required")
    window = None if low is None else low + d
    result = ZLaurent.one(ring)
    term = ZLaurent.one(ring)
    minus_u = -u
    for _ in range(_expansion_cap(ring, window)):
        term = zl_mul(term, minus_u).truncate_below(window)
        if term.is_zero():
            break
        result = result + term
    else:
        if window is None:
            raise NotInvertibleError("non-leading part is not nilpotent")
    return result.shift(-d).scale(inv_c).truncate_below(low)


def _expansion_cap(ring: CohRing, window: Optional[int]) -> int:
    # nilpotent parts vanish after dim+1 factors; scalar tails need -window more
    return ring.dimension + 2 + (abs(window) * (ring.dimension + 1) if window is not None else 0)
