"""Truncated series in Novikov classes and insertion variables with ZLaurent values."""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from src.coh_ring import CohClass, CohRing, RationalLike, parse_rational
from src.errors import InvalidArgumentError, NonNilpotentExponentError
from src.laurent import ZLaurent, zl_add, zl_mul

logger = logging.getLogger(__name__)

Beta = Tuple[int, ...]
Exponent = Tuple[int, ...]
Index = Tuple[Beta, Exponent]


@dataclass(frozen=True)
class Truncation:
    """Window of a series: beta(L_theta) <= max_degree and |m| <= max_insertions."""

    max_degree: Fraction
    max_insertions: int

    def __post_init__(self):
        object.__setattr__(self, "max_degree", parse_rational(self.max_degree))
        if self.max_degree < 0 or self.max_insertions < 0:
            raise InvalidArgumentError("truncation bounds must be nonnegative")


def add_tuples(a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def sub_tuples(a: Sequence[int], b: Sequence[int]) -> Tuple[int, ...]:
    return tuple(x - y for x, y in zip(a, b))


def multi_factorial(m: Sequence[int]) -> int:
    out = 1
    for k in m:
        for j in range(2, k + 1):
            out *= j
    return out


class MultiSeries:
    """
    Sparse association (beta, m) -> ZLaurent within a Truncation.

    `variables` lists the ring-basis indices carried as insertion variables
    t_i; the exponent tuple m follows that order. `theta` pairs with beta to
    give the Novikov degree. `saturated` records that some nonzero product
    term fell outside the window.
    """

    __slots__ = ("ring", "theta", "variables", "truncation", "terms", "saturated")

    def __init__(
        self,
        ring: CohRing,
        theta: Sequence[RationalLike],
        variables: Sequence[int],
        truncation: Truncation,
        terms: Optional[Mapping[Index, ZLaurent]] = None,
        saturated: bool = False,
    ):
        self.ring = ring
        self.theta = tuple(parse_rational(x) for x in theta)
        self.variables = tuple(variables)
        self.truncation = truncation
        self.saturated = saturated
        clean: Dict[Index, ZLaurent] = {}
        for (beta, m), value in (terms or {}).items():
            beta, m = tuple(beta), tuple(m)
            self._check_index(beta, m)
            if not value.is_zero():
                clean[(beta, m)] = value
        self.terms = clean

    # -- shape ----------------------------------------------------------

    def beta_degree(self, beta: Sequence[int]) -> Fraction:
        return sum((b * t for b, t in zip(beta, self.theta)), Fraction(0))

    def in_window(self, beta: Beta, m: Exponent) -> bool:
        return (
            self.beta_degree(beta) <= self.truncation.max_degree
            and sum(m) <= self.truncation.max_insertions
        )

    def _check_index(self, beta: Beta, m: Exponent) -> None:
        if len(beta) != len(self.theta) or len(m) != len(self.variables):
            raise InvalidArgumentError(f"index {(beta, m)} does not match the series shape")
        if any(k < 0 for k in m):
            raise InvalidArgumentError(f"insertion exponent {m} has negative entries")
        if self.beta_degree(beta) < 0:
            raise InvalidArgumentError(f"class {list(beta)} has negative degree against theta")
        if not self.in_window(beta, m):
            raise InvalidArgumentError(f"index {(beta, m)} lies outside the truncation window")

    def order_key(self, index: Index) -> Tuple:
        beta, m = index
        return (self.beta_degree(beta), sum(m), beta, m)

    def same_shape(self, other: "MultiSeries") -> bool:
        return (
            (self.ring is other.ring or self.ring == other.ring)
            and self.theta == other.theta
            and self.variables == other.variables
            and self.truncation == other.truncation
        )

    def _check(self, other: "MultiSeries") -> None:
        if not isinstance(other, MultiSeries) or not self.same_shape(other):
            raise InvalidArgumentError("series have different targets, variables or truncation")

    def like(self, terms: Optional[Mapping[Index, ZLaurent]] = None, saturated: bool = False) -> "MultiSeries":
        return MultiSeries(self.ring, self.theta, self.variables, self.truncation, terms, saturated)

    @property
    def zero_beta(self) -> Beta:
        return (0,) * len(self.theta)

    @property
    def zero_m(self) -> Exponent:
        return (0,) * len(self.variables)

    def one(self) -> "MultiSeries":
        return self.like({(self.zero_beta, self.zero_m): ZLaurent.one(self.ring)})

    def constant(self, value: ZLaurent) -> "MultiSeries":
        return self.like({(self.zero_beta, self.zero_m): value})

    def variable_exponent(self, basis_index: int) -> Exponent:
        if basis_index not in self.variables:
            raise InvalidArgumentError(f"basis index {basis_index} is not an insertion variable")
        pos = self.variables.index(basis_index)
        return tuple(1 if k == pos else 0 for k in range(len(self.variables)))

    # -- inspection -----------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, beta: Sequence[int], m: Sequence[int]) -> ZLaurent:
        return self.terms.get((tuple(beta), tuple(m))) or ZLaurent.zero(self.ring)

    def indices(self) -> List[Index]:
        return sorted(self.terms, key=self.order_key)

    def items(self) -> List[Tuple[Index, ZLaurent]]:
        return [(k, self.terms[k]) for k in self.indices()]

    def equals(self, other: "MultiSeries") -> bool:
        self._check(other)
        return self.terms == other.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.same_shape(other) and self.terms == other.terms

    __hash__ = None

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other: "MultiSeries") -> "MultiSeries":
        return series_add(self, other)

    def __sub__(self, other: "MultiSeries") -> "MultiSeries":
        return series_add(self, series_scale(other, -1))

    def __neg__(self) -> "MultiSeries":
        return series_scale(self, -1)

    def __mul__(self, other: Union["MultiSeries", ZLaurent, RationalLike]) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            return series_mul(self, other)
        return series_scale(self, other)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"MultiSeries({len(self.terms)} terms, D={self.truncation.max_degree}, T={self.truncation.max_insertions})"


def series_add(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    a._check(b)
    out = dict(a.terms)
    for k, v in b.terms.items():
        out[k] = out[k] + v if k in out else v
    return a.like(out, a.saturated or b.saturated)


def series_scale(a: MultiSeries, factor: Union[ZLaurent, CohClass, RationalLike]) -> MultiSeries:
    """Multiplies every coefficient by a rational, a class or a ZLaurent."""
    if isinstance(factor, CohClass):
        factor = ZLaurent.monomial(factor)
    if isinstance(factor, ZLaurent):
        return a.like({k: zl_mul(v, factor) for k, v in a.terms.items()}, a.saturated)
    scalar = parse_rational(factor)
    return a.like({k: v.scale(scalar) for k, v in a.terms.items()}, a.saturated)


def series_mul(a: MultiSeries, b: MultiSeries) -> MultiSeries:
    """Convolution over (beta, m); nonzero products outside the window are dropped and flagged."""
    a._check(b)
    out: Dict[Index, ZLaurent] = {}
    saturated = a.saturated or b.saturated
    max_deg = a.truncation.max_degree
    max_ins = a.truncation.max_insertions
    b_items = [(beta, m, a.beta_degree(beta), sum(m), v) for (beta, m), v in b.terms.items()]
    for (beta1, m1), v1 in a.terms.items():
        deg1, ins1 = a.beta_degree(beta1), sum(m1)
        for beta2, m2, deg2, ins2, v2 in b_items:
            if deg1 + deg2 > max_deg or ins1 + ins2 > max_ins:
                if not saturated and not zl_mul(v1, v2).is_zero():
                    saturated = True
                continue
            key = (add_tuples(beta1, beta2), add_tuples(m1, m2))
            prod = zl_mul(v1, v2)
            out[key] = zl_add(out[key], prod) if key in out else prod
    return a.like(out, saturated)


def series_exp(a: MultiSeries) -> MultiSeries:
    """Sum of a^k/k! within the truncation; `a` must have no constant term."""
    if (a.zero_beta, a.zero_m) in a.terms:
        raise NonNilpotentExponentError("exponent has a constant term; the exponential does not truncate")
    result = a.one()
    power = a.one()
    k = 0
    while True:
        k += 1
        power = series_scale(series_mul(power, a), Fraction(1, k))
        if power.is_zero():
            break
        result = series_add(result, power)
    result.saturated = result.saturated or power.saturated
    return result


def exponents_up_to(num_vars: int, total: int) -> List[Exponent]:
    """All exponent tuples with |m| <= total, ordered by (|m|, lex)."""
    found: List[Exponent] = []

    def _rec(prefix: List[int], remaining: int, slots: int) -> None:
        if slots == 0:
            found.append(tuple(prefix))
            return
        for k in range(remaining + 1):
            _rec(prefix + [k], remaining - k, slots - 1)

    _rec([], total, num_vars)
    return sorted(found, key=lambda m: (sum(m), m))
