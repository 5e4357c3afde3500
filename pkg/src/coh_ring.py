"""Finite graded cohomology rings with exact rational structure constants."""

import itertools
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import sympy

from src.errors import InvalidArgumentError, MalformedRingError

logger = logging.getLogger(__name__)

RationalLike = Union[int, str, Fraction]


def parse_rational(value: Any) -> Fraction:
    """
    Parses an exact rational from an int, a "p/q" string or a Fraction.

    Floats are rejected: exactness must survive every round-trip.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise InvalidArgumentError(f"rationals must be exact, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except ValueError:
            raise InvalidArgumentError(f"not a rational string: {value!r}")
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise InvalidArgumentError(f"cannot read a rational from {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    return str(value)


def to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


class CohClass:
    """An element of a CohRing as a dense coefficient vector over the basis."""

    __slots__ = ("ring", "coeffs")

    def __init__(self, ring: "CohRing", coeffs: Sequence[Fraction]):
        if len(coeffs) != ring.rank:
            raise InvalidArgumentError(
                f"class has {len(coeffs)} coefficients, ring rank is {ring.rank}"
            )
        self.ring = ring
        self.coeffs = tuple(coeffs)

    def _check(self, other: "CohClass") -> None:
        if not isinstance(other, CohClass):
            raise InvalidArgumentError(f"expected a CohClass, got {type(other).__name__}")
        if other.ring is not self.ring and other.ring != self.ring:
            raise InvalidArgumentError("classes live in different rings")

    def __add__(self, other: "CohClass") -> "CohClass":
        self._check(other)
        return CohClass(self.ring, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other: "CohClass") -> "CohClass":
        self._check(other)
        return CohClass(self.ring, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self) -> "CohClass":
        return CohClass(self.ring, [-a for a in self.coeffs])

    def __mul__(self, other: Union["CohClass", RationalLike]) -> "CohClass":
        if isinstance(other, CohClass):
            return self.ring.mul(self, other)
        scalar = parse_rational(other)
        return CohClass(self.ring, [a * scalar for a in self.coeffs])

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CohClass):
            return NotImplemented
        return self.coeffs == other.coeffs and (other.ring is self.ring or other.ring == self.ring)

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def support(self) -> List[int]:
        return [i for i, c in enumerate(self.coeffs) if c]

    def scalar_part(self) -> Fraction:
        """Coefficient of the unit."""
        return self.coeffs[0]

    def __repr__(self) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                label = self.ring.labels[i]
                parts.append(f"{c}" if label == "1" else f"{c}*{label}")
        return " + ".join(parts) if parts else "0"


class CohRing:
    """
    Rank-n graded commutative algebra with multiplication table, integral and
    Poincare pairing.

    Degrees are real-cohomology degrees (even). Basis element 0 is the unit.
    `divisor_lifts[i]` is an optional polynomial expression over the degree-2
    labels that reduces to basis element i.
    """

    def __init__(
        self,
        labels: Sequence[str],
        degrees: Sequence[int],
        table: Mapping[Tuple[int, int], Sequence[Fraction]],
        integral: Sequence[Fraction],
        divisor_lifts: Optional[Sequence[Optional[str]]] = None,
        name: str = "",
    ):
        self.name = name
        self.labels = tuple(labels)
        self.degrees = tuple(int(d) for d in degrees)
        self.rank = len(self.labels)
        self.integral_vector = tuple(parse_rational(c) for c in integral)
        self.divisor_lifts = tuple(divisor_lifts) if divisor_lifts is not None else (None,) * self.rank
        if len(self.degrees) != self.rank or len(self.integral_vector) != self.rank:
            raise MalformedRingError("basis, degrees and integral must have equal length")
        if len(self.divisor_lifts) != self.rank:
            raise MalformedRingError("divisor_lifts must list one entry per basis element")
        self.top_degree = max(self.degrees) if self.degrees else 0

        self._dense: Dict[Tuple[int, int], Tuple[Fraction, ...]] = {}
        self._sparse: List[List[Tuple[Tuple[int, Fraction], ...]]] = [
            [() for _ in range(self.rank)] for _ in range(self.rank)
        ]
        for (i, j), coeffs in table.items():
            vec = tuple(parse_rational(c) for c in coeffs)
            if len(vec) != self.rank:
                raise MalformedRingError(f"product ({i},{j}) has {len(vec)} coefficients")
            self._dense[(i, j)] = vec
            self._sparse[i][j] = tuple((k, c) for k, c in enumerate(vec) if c)

        self._fingerprint = (
            self.labels,
            self.degrees,
            self.integral_vector,
            tuple(tuple(self._sparse[i][j] for j in range(self.rank)) for i in range(self.rank)),
        )
        self._dual: Optional[List[CohClass]] = None
        self._generator_classes: Optional[Dict[str, CohClass]] = None

    # -- identity -------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CohRing):
            return NotImplemented
        return self is other or self._fingerprint == other._fingerprint

    def __hash__(self) -> int:
        return hash(self._fingerprint)

    def __repr__(self) -> str:
        return f"CohRing({self.name or '?'}, rank={self.rank})"

    @property
    def dimension(self) -> int:
        """Complex dimension of the variety."""
        return self.top_degree // 2

    # -- elements -------------------------------------------------------

    def zero(self) -> CohClass:
        return CohClass(self, [Fraction(0)] * self.rank)

    def basis_class(self, index: int) -> CohClass:
        if not 0 <= index < self.rank:
            raise InvalidArgumentError(f"basis index {index} out of range 0..{self.rank - 1}")
        coeffs = [Fraction(0)] * self.rank
        coeffs[index] = Fraction(1)
        return CohClass(self, coeffs)

    def unit(self) -> CohClass:
        return self.basis_class(0)

    def scalar(self, value: RationalLike) -> CohClass:
        return self.unit() * parse_rational(value)

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidArgumentError(f"unknown basis label {label!r}")

    def generator_labels(self) -> List[str]:
        """Labels of the degree-2 basis elements."""
        return [lab for lab, deg in zip(self.labels, self.degrees) if deg == 2]

    # -- arithmetic -----------------------------------------------------

    def mul(self, a: CohClass, b: CohClass) -> CohClass:
        a._check(b)
        if a.ring is not self and a.ring != self:
            raise InvalidArgumentError("class does not belong to this ring")
        out = [Fraction(0)] * self.rank
        for i, ai in enumerate(a.coeffs):
            if not ai:
                continue
            row = self._sparse[i]
            for j, bj in enumerate(b.coeffs):
                if not bj:
                    continue
                w = ai * bj
                for k, c in row[j]:
                    out[k] += w * c
        return CohClass(self, out)

    def power(self, a: CohClass, exponent: int) -> CohClass:
        result = self.unit()
        for _ in range(exponent):
            result = self.mul(result, a)
        return result

    def integrate(self, a: CohClass) -> Fraction:
        if a.ring is not self and a.ring != self:
            raise InvalidArgumentError("class does not belong to this ring")
        return sum((c * w for c, w in zip(a.coeffs, self.integral_vector)), Fraction(0))

    def pairing(self, a: CohClass, b: CohClass) -> Fraction:
        return self.integrate(self.mul(a, b))

    def gram_matrix(self) -> sympy.Matrix:
        return sympy.Matrix(
            self.rank,
            self.rank,
            lambda i, j: to_sympy(self.pairing(self.basis_class(i), self.basis_class(j))),
        )

    def dual_basis(self) -> List[CohClass]:
        """Classes gamma^j with pairing(gamma_i, gamma^j) = delta_ij."""
        if self._dual is None:
            gram = self.gram_matrix()
            if gram.det() == 0:
                raise MalformedRingError("Poincare pairing is degenerate")
            inverse = gram.inv()
            self._dual = [
                CohClass(self, [parse_rational(inverse[i, j]) for i in range(self.rank)])
                for j in range(self.rank)
            ]
        return list(self._dual)

    def degree_of(self, a: CohClass) -> Optional[int]:
        """Homogeneous real degree of a nonzero class, None when mixed or zero."""
        degs = {self.degrees[i] for i in a.support()}
        return degs.pop() if len(degs) == 1 else None

    # -- polynomial expressions over generators --------------------------

    def generator_class(self, label: str) -> CohClass:
        if self._generator_classes is None:
            self._generator_classes = {
                lab: self.basis_class(self.index_of(lab)) for lab in self.generator_labels()
            }
        try:
            return self._generator_classes[label]
        except KeyError:
            raise InvalidArgumentError(f"{label!r} is not a degree-2 generator of {self.name or 'the ring'}")

    def class_from_expression(self, expr: Union[str, sympy.Expr]) -> CohClass:
        """Evaluates a polynomial over the degree-2 labels in the ring."""
        poly = parse_polynomial(expr, self.generator_labels())
        result = self.zero()
        for monom, coeff in poly.terms():
            term = self.scalar(parse_rational(coeff))
            for g, k in zip(poly.gens, monom):
                if k:
                    term = self.mul(term, self.power(self.generator_class(str(g)), k))
            result = result + term
        return result

    # -- validation -----------------------------------------------------

    def validate(self) -> "CohRing":
        """Checks every CohRing invariant; raises MalformedRingError naming the violation."""
        n = self.rank
        if n < 1:
            raise MalformedRingError("ring must have positive rank")
        for i, d in enumerate(self.degrees):
            if d < 0 or d % 2:
                raise MalformedRingError(f"basis element {self.labels[i]!r} has odd or negative degree {d}")
        if self.degrees[0] != 0:
            raise MalformedRingError("basis element 0 must be the unit in degree 0")
        for lab in self.generator_labels():
            if not lab.isidentifier():
                raise MalformedRingError(f"degree-2 label {lab!r} must be an identifier")
        basis = [self.basis_class(i) for i in range(n)]
        for j in range(n):
            if self.mul(basis[0], basis[j]) != basis[j]:
                raise MalformedRingError(f"element 0 is not a unit: fails on ({self.labels[j]})")
        for i, j in itertools.product(range(n), repeat=2):
            for k, c in self._sparse[i][j]:
                if self.degrees[k] != self.degrees[i] + self.degrees[j]:
                    raise MalformedRingError(
                        f"product ({self.labels[i]},{self.labels[j]}) is not degree-additive at {self.labels[k]}"
                    )
            if self._sparse[i][j] != self._sparse[j][i]:
                raise MalformedRingError(
                    f"commutativity fails on ({self.labels[i]},{self.labels[j]})"
                )
        for i, j, k in itertools.product(range(n), repeat=3):
            left = self.mul(self.mul(basis[i], basis[j]), basis[k])
            right = self.mul(basis[i], self.mul(basis[j], basis[k]))
            if left != right:
                raise MalformedRingError(
                    f"associativity fails on ({self.labels[i]},{self.labels[j]},{self.labels[k]})"
                )
        for i, w in enumerate(self.integral_vector):
            if w and self.degrees[i] != self.top_degree:
                raise MalformedRingError(f"integral is nonzero below top degree at {self.labels[i]}")
        if self.gram_matrix().det() == 0:
            raise MalformedRingError("Poincare pairing has a singular Gram matrix")
        for i, lift in enumerate(self.divisor_lifts):
            if lift is None:
                continue
            try:
                value = self.class_from_expression(lift)
            except InvalidArgumentError as exc:
                raise MalformedRingError(f"divisor lift of {self.labels[i]!r}: {exc.message}")
            if value != basis[i]:
                raise MalformedRingError(
                    f"divisor lift {lift!r} does not reduce to {self.labels[i]!r}"
                )
        return self

    # -- documents ------------------------------------------------------

    def to_table_document(self) -> Dict[str, Any]:
        """Ring-table document with dense rational strings."""
        mult = []
        for i in range(self.rank):
            for j in range(i, self.rank):
                vec = self._dense.get((i, j))
                if vec is not None and any(vec):
                    mult.append({"i": i, "j": j, "coeffs": [format_rational(c) for c in vec]})
        return {
            "name": self.name,
            "basis": [{"label": lab, "degree": deg} for lab, deg in zip(self.labels, self.degrees)],
            "mult": mult,
            "integral": [format_rational(c) for c in self.integral_vector],
            "divisor_lifts": list(self.divisor_lifts),
        }


def parse_polynomial(expr: Union[str, sympy.Expr], generators: Sequence[str]) -> sympy.Poly:
    """Parses a polynomial over the named generators; any other symbol is rejected."""
    symbols = {g: sympy.Symbol(g) for g in generators}
    try:
        parsed = sympy.sympify(expr, locals=symbols) if isinstance(expr, str) else sympy.sympify(expr)
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise InvalidArgumentError(f"cannot parse polynomial {expr!r}: {exc}")
    unknown = sorted(str(s) for s in parsed.free_symbols if str(s) not in symbols)
    if unknown:
        raise InvalidArgumentError(f"expression {expr!r} uses non-generator symbols {unknown}")
    gens = [symbols[g] for g in generators] or [sympy.Symbol("_unit")]
    try:
        poly = sympy.Poly(parsed, *gens, domain="QQ")
    except sympy.PolynomialError as exc:
        raise InvalidArgumentError(f"{expr!r} is not a polynomial: {exc}")
    return poly


def ring_projective(n: int, label: str = "H") -> CohRing:
    """Q[H]/(H^{n+1}) with integral(H^n) = 1."""
    if not isinstance(n, int) or n < 1:
        raise InvalidArgumentError(f"projective space needs n >= 1, got {n!r}")
    labels = ["1", label] + [f"{label}^{i}" for i in range(2, n + 1)]
    lifts = ["1", label] + [f"{label}**{i}" for i in range(2, n + 1)]
    table = {}
    for i in range(n + 1):
        for j in range(n + 1):
            vec = [Fraction(0)] * (n + 1)
            if i + j <= n:
                vec[i + j] = Fraction(1)
            table[(i, j)] = vec
    integral = [Fraction(0)] * n + [Fraction(1)]
    return CohRing(labels, [2 * i for i in range(n + 1)], table, integral, lifts, name=f"P{n}").validate()


def _product_label(a: str, b: str) -> str:
    if a == "1":
        return b
    if b == "1":
        return a
    return f"{a}*{b}"


def _product_lift(a: Optional[str], b: Optional[str]) -> Optional[str]:
    if a is None or b is None:
        return None
    if a == "1":
        return b
    if b == "1":
        return a
    return f"({a})*({b})"


def ring_product(a: CohRing, b: CohRing) -> CohRing:
    """Kunneth tensor product; basis pairs in lexicographic order."""
    clash = set(a.generator_labels()) & set(b.generator_labels())
    if clash:
        raise InvalidArgumentError(f"factors share generator labels {sorted(clash)}")
    pairs = list(itertools.product(range(a.rank), range(b.rank)))
    index = {p: k for k, p in enumerate(pairs)}
    labels = [_product_label(a.labels[i], b.labels[j]) for i, j in pairs]
    degrees = [a.degrees[i] + b.degrees[j] for i, j in pairs]
    lifts = [_product_lift(a.divisor_lifts[i], b.divisor_lifts[j]) for i, j in pairs]
    integral = [a.integral_vector[i] * b.integral_vector[j] for i, j in pairs]
    table = {}
    for (i1, j1), (i2, j2) in itertools.product(pairs, repeat=2):
        vec = [Fraction(0)] * len(pairs)
        for ka, ca in a._sparse[i1][i2]:
            for kb, cb in b._sparse[j1][j2]:
                vec[index[(ka, kb)]] += ca * cb
        table[(index[(i1, j1)], index[(i2, j2)])] = vec
    name = f"{a.name}x{b.name}" if a.name and b.name else ""
    return CohRing(labels, degrees, table, integral, lifts, name=name).validate()


def _read_vector(raw: Any, ring_labels: Sequence[str], what: str) -> List[Fraction]:
    if isinstance(raw, Mapping):
        vec = [Fraction(0)] * len(ring_labels)
        for key, value in raw.items():
            if key not in ring_labels:
                raise MalformedRingError(f"{what}: unknown label {key!r}")
            vec[ring_labels.index(key)] = parse_rational(value)
        return vec
    if isinstance(raw, list):
        if len(raw) != len(ring_labels):
            raise MalformedRingError(f"{what}: expected {len(ring_labels)} coefficients, got {len(raw)}")
        return [parse_rational(v) for v in raw]
    raise MalformedRingError(f"{what}: expected a list or an object of rationals")


def ring_from_table(spec: Union[Mapping[str, Any], str, Path]) -> CohRing:
    """
    Builds and validates a ring from a ring-table document.

    `spec` is the parsed JSON object or a path to it. Products missing from
    `mult` are filled by commutativity, and are zero when neither order is
    listed. Coefficient vectors may be dense lists or {label: rational} objects.
    """
    if isinstance(spec, (str, Path)):
        path = Path(spec)
        try:
            with open(path, "r") as f:
                spec = json.load(f)
        except FileNotFoundError:
            raise MalformedRingError(f"ring table not found: {path}")
        except json.JSONDecodeError as exc:
            raise MalformedRingError(f"invalid JSON in ring table {path}: {exc}")
    try:
        basis = spec["basis"]
        entries = spec.get("mult", [])
        integral_raw = spec["integral"]
    except (KeyError, TypeError) as exc:
        raise MalformedRingError(f"ring table is missing field {exc}")
    labels = [str(b["label"]) for b in basis]
    degrees = [int(b["degree"]) for b in basis]
    rank = len(labels)

    def _index(raw: Any) -> int:
        if isinstance(raw, int) and 0 <= raw < rank:
            return raw
        if isinstance(raw, str) and raw in labels:
            return labels.index(raw)
        raise MalformedRingError(f"mult entry refers to unknown basis element {raw!r}")

    given: Dict[Tuple[int, int], List[Fraction]] = {}
    for entry in entries:
        i, j = _index(entry["i"]), _index(entry["j"])
        given[(i, j)] = _read_vector(entry["coeffs"], labels, f"mult[{labels[i]},{labels[j]}]")
    table = {}
    for i, j in itertools.product(range(rank), repeat=2):
        if (i, j) in given and (j, i) in given and given[(i, j)] != given[(j, i)]:
            raise MalformedRingError(f"commutativity fails on ({labels[i]},{labels[j]})")
        table[(i, j)] = given.get((i, j)) or given.get((j, i)) or [Fraction(0)] * rank
    integral = _read_vector(integral_raw, labels, "integral")
    lifts = spec.get("divisor_lifts")
    if lifts is not None and len(lifts) != rank:
        raise MalformedRingError("divisor_lifts must list one entry per basis element")
    ring = CohRing(labels, degrees, table, integral, lifts, name=str(spec.get("name", "")))
    ring.validate()
    logger.debug("loaded ring %s of rank %d", ring.name, ring.rank)
    return ring


def mul(a: CohClass, b: CohClass) -> CohClass:
    return a.ring.mul(a, b)


def integrate(a: CohClass) -> Fraction:
    return a.ring.integrate(a)


def pairing(a: CohClass, b: CohClass) -> Fraction:
    a._check(b)
    return a.ring.pairing(a, b)


def dual_basis(ring: CohRing) -> List[CohClass]:
    return ring.dual_basis()
