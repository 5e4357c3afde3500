"""GIT targets: chamber validation, effective classes, twist data and target loading."""

import itertools
import json
import logging
from fractions import Fraction
from math import floor, gcd
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import sympy

from src.coh_ring import (
    CohClass,
    CohRing,
    parse_rational,
    ring_from_table,
    ring_product,
    ring_projective,
    to_sympy,
)
from src.errors import (
    ConditionStarViolatedError,
    ConfigurationError,
    EmptyQuotientError,
    InvalidArgumentError,
    MalformedRingError,
    NonConvexTwistError,
    TargetValidationError,
)
from src.models import (
    ChamberReport,
    ConvexityReport,
    EffectiveClass,
    GitPresentation,
    TargetModel,
    TwistData,
    beta_deg,
)

logger = logging.getLogger(__name__)

_ERRORS = {
    EmptyQuotientError.kind: EmptyQuotientError,
    ConditionStarViolatedError.kind: ConditionStarViolatedError,
    TargetValidationError.kind: TargetValidationError,
}


def _fractions(vec: Sequence[Any]) -> Tuple[Fraction, ...]:
    return tuple(parse_rational(x) for x in vec)


def _primitive(vec: Sequence[Any]) -> Tuple[int, ...]:
    fracs = _fractions(vec)
    lcm = 1
    for x in fracs:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in fracs]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(x // g for x in ints) if g else tuple(ints)


class ChamberValidator:
    """Checks Condition star and computes the GIT chamber of a toric presentation."""

    def validate(self, presentation: GitPresentation) -> ChamberReport:
        """
        Validates a presentation.

        Args:
            presentation: charge matrix and stability character

        Returns:
            ChamberReport with is_valid status, anticones, the generators of
            the chamber-dual cone and the chamber rays
        """
        N, r = presentation.N, presentation.r
        if N == 0 or r == 0:
            return self._fail(TargetValidationError, "presentation needs at least one coordinate and one character")
        if any(len(row) != r for row in presentation.charges):
            return self._fail(TargetValidationError, f"every charge row must have {r} entries")
        charges = sympy.Matrix([list(row) for row in presentation.charges])
        if charges.rank() != r:
            return self._fail(TargetValidationError, f"charge matrix has rank {charges.rank()}, expected {r}")
        if not any(presentation.theta):
            return self._fail(TargetValidationError, "stability character theta is zero")
        theta = sympy.Matrix([to_sympy(t) for t in presentation.theta])

        anticones: List[Tuple[int, ...]] = []
        duals: List[Tuple[Fraction, ...]] = []
        for subset in itertools.combinations(range(N), r):
            cols = sympy.Matrix([list(presentation.charges[j]) for j in subset]).T
            det = cols.det()
            if det == 0:
                continue
            weights = cols.LUsolve(theta)
            if any(w < 0 for w in weights):
                continue
            if any(w == 0 for w in weights):
                return self._fail(
                    ConditionStarViolatedError,
                    f"theta lies on a wall of the secondary fan (boundary of the cone of rows {list(subset)})",
                    subset,
                )
            if abs(det) != 1:
                return self._fail(
                    ConditionStarViolatedError,
                    f"rows {list(subset)} generate a cone of index {abs(det)}; "
                    f"the torus has a finite stabilizer on the semistable locus",
                    subset,
                )
            anticones.append(subset)
            inverse = cols.inv()
            for k in range(r):
                u = _fractions(inverse.row(k))
                if u not in duals:
                    duals.append(u)
            logger.debug("anticone %s with weights %s", subset, list(weights))

        if not anticones:
            return self._fail(
                EmptyQuotientError,
                "semistable locus is empty: theta is outside the cone spanned by the weights",
            )

        rays = self._chamber_rays(duals, r)
        dimension = sympy.Matrix([list(ray) for ray in rays]).rank() if rays else 0
        return ChamberReport(
            is_valid=True,
            anticones=anticones,
            dual_generators=duals,
            chamber_rays=rays,
            chamber_dimension=dimension,
        )

    def ensure_valid(self, report: ChamberReport) -> ChamberReport:
        """Raises the exception matching a failed report."""
        if not report.is_valid:
            error_cls = _ERRORS.get(report.error_kind, TargetValidationError)
            raise error_cls(report.error_message, {"offending_subset": report.offending_subset})
        return report

    def _chamber_rays(self, duals: List[Tuple[Fraction, ...]], r: int) -> List[Tuple[int, ...]]:
        if r == 1:
            return [(1,) if duals[0][0] > 0 else (-1,)]
        rays: List[Tuple[int, ...]] = []
        vectors = [sympy.Matrix([[to_sympy(x) for x in u]]) for u in duals]
        for combo in itertools.combinations(vectors, r - 1):
            stacked = sympy.Matrix.vstack(*combo)
            if stacked.rank() != r - 1:
                continue
            normal = stacked.nullspace()[0]
            for candidate in (normal, -normal):
                if all((u * candidate)[0] >= 0 for u in vectors):
                    ray = _primitive(list(candidate))
                    if ray not in rays:
                        rays.append(ray)
        return sorted(rays)

    def _fail(self, error_cls, message: str, subset: Optional[Tuple[int, ...]] = None) -> ChamberReport:
        return ChamberReport(
            is_valid=False,
            error_message=message,
            error_kind=error_cls.kind,
            offending_subset=tuple(subset) if subset is not None else None,
        )


def validate(presentation: GitPresentation) -> ChamberReport:
    return ChamberValidator().validate(presentation)


class DualCone:
    """Exact membership in the cone generated by the chamber-dual vectors."""

    def __init__(self, generators: Sequence[Tuple[Fraction, ...]]):
        self.generators = [tuple(g) for g in generators]
        self.rank = len(self.generators[0]) if self.generators else 0
        self._inverses: List[List[List[Fraction]]] = []
        for combo in itertools.combinations(self.generators, self.rank):
            mat = sympy.Matrix([[to_sympy(x) for x in g] for g in combo]).T
            if mat.det() == 0:
                continue
            inv = mat.inv()
            self._inverses.append(
                [[parse_rational(inv[i, j]) for j in range(self.rank)] for i in range(self.rank)]
            )

    def contains(self, beta: Sequence[int]) -> bool:
        # a point of a full cone lies in some simplicial subcone
        for inv in self._inverses:
            if all(sum((row[j] * beta[j] for j in range(self.rank)), Fraction(0)) >= 0 for row in inv):
                return True
        return False


def effective_monoid(target: TargetModel, D: Union[int, Fraction]) -> List[EffectiveClass]:
    """
    Integer classes in the chamber-dual cone with beta(L_theta) <= D.

    Sorted by (beta(L_theta), lexicographic).
    """
    bound = parse_rational(D)
    if bound < 0:
        raise InvalidArgumentError(f"degree bound must be nonnegative, got {D}")
    duals = target.chamber.dual_generators
    theta = target.theta
    r = target.r
    cone = target.chamber.dual_cone
    limits = []
    for a in range(r):
        total = sum((bound / beta_deg(u, theta) * abs(u[a]) for u in duals), Fraction(0))
        limits.append(floor(total))
    found = []
    for beta in itertools.product(*(range(-b, b + 1) for b in limits)):
        deg = beta_deg(beta, theta)
        if deg < 0 or deg > bound:
            continue
        if cone.contains(beta):
            found.append(tuple(beta))
    found.sort(key=lambda b: (beta_deg(b, theta), b))
    return found


def convexity_check(target: TargetModel, D: Union[int, Fraction]) -> ConvexityReport:
    """Checks <beta, eps_a> >= 0 for every enumerated class and twist summand."""
    if not target.is_twisted:
        return ConvexityReport(is_valid=True)
    classes = effective_monoid(target, D)
    violations = []
    for beta in classes:
        for a, weight in enumerate(target.twist.weights):
            if beta_deg(beta, weight) < 0:
                violations.append((beta, a))
    if violations:
        beta, a = violations[0]
        return ConvexityReport(
            is_valid=False,
            error_message=f"twist summand {a} pairs negatively with beta={list(beta)}",
            violations=violations,
            classes_checked=len(classes),
        )
    return ConvexityReport(is_valid=True, classes_checked=len(classes))


def ensure_convex(target: TargetModel, D: Union[int, Fraction]) -> ConvexityReport:
    report = convexity_check(target, D)
    if not report.is_valid:
        raise NonConvexTwistError(report.error_message, {"violations": report.violations})
    return report


# -- construction -----------------------------------------------------------


def _kirwan_images(ring: CohRing, generators: Mapping[str, Tuple[Fraction, ...]], r: int) -> List[CohClass]:
    """kappa(e_a) for the standard characters, solved from the generator characters."""
    labels = list(generators)
    chars = sympy.Matrix([[to_sympy(x) for x in generators[lab]] for lab in labels])
    if chars.rank() != r:
        raise TargetValidationError(f"generator characters span rank {chars.rank()}, expected {r}")
    chosen: List[int] = []
    for i in range(len(labels)):
        if sympy.Matrix([list(chars.row(k)) for k in chosen + [i]]).rank() == len(chosen) + 1:
            chosen.append(i)
        if len(chosen) == r:
            break
    inv = sympy.Matrix([list(chars.row(k)) for k in chosen]).inv()
    images = []
    for a in range(r):
        cls = ring.zero()
        for pos, k in enumerate(chosen):
            coeff = parse_rational(inv[a, pos])
            if coeff:
                cls = cls + ring.generator_class(labels[k]) * coeff
        images.append(cls)
    for lab in labels:
        expected = ring.zero()
        for coeff, cls in zip(generators[lab], images):
            expected = expected + cls * coeff
        if expected != ring.generator_class(lab):
            raise TargetValidationError(f"generator {lab!r} is inconsistent with the other generator characters")
    return images


def build_target(
    name: str,
    presentation: GitPresentation,
    ring: CohRing,
    generators: Optional[Mapping[str, Sequence[Any]]] = None,
    divisor_classes: Optional[Sequence[Union[str, CohClass]]] = None,
    twist: Optional[TwistData] = None,
    insertion_lifts: Optional[Sequence[Optional[str]]] = None,
) -> TargetModel:
    """Validates a presentation and attaches its ring data."""
    validator = ChamberValidator()
    chamber = validator.ensure_valid(validator.validate(presentation))
    r = presentation.r
    ring_gens = ring.generator_labels()
    if generators is None:
        if len(ring_gens) != r:
            raise TargetValidationError(
                f"ring has {len(ring_gens)} degree-2 generators but the torus has rank {r}; list `generators`"
            )
        generators = {lab: tuple(1 if k == a else 0 for k in range(r)) for a, lab in enumerate(ring_gens)}
    gens: Dict[str, Tuple[Fraction, ...]] = {}
    for lab, eta in generators.items():
        if lab not in ring_gens:
            raise TargetValidationError(f"{lab!r} is not a degree-2 generator of the ring")
        if len(eta) != r:
            raise TargetValidationError(f"character of {lab!r} must have {r} entries")
        gens[lab] = _fractions(eta)
    kirwan = _kirwan_images(ring, gens, r)

    def kappa(eta: Sequence[Any]) -> CohClass:
        out = ring.zero()
        for coeff, cls in zip(eta, kirwan):
            out = out + cls * parse_rational(coeff)
        return out

    expected = [kappa(row) for row in presentation.charges]
    if divisor_classes is None:
        divisors = expected
    else:
        if len(divisor_classes) != presentation.N:
            raise TargetValidationError(f"expected {presentation.N} divisor classes, got {len(divisor_classes)}")
        divisors = [
            d if isinstance(d, CohClass) else ring.class_from_expression(str(d)) for d in divisor_classes
        ]
        _check_relations(presentation, divisors)
        for j, (given, kirwan_image) in enumerate(zip(divisors, expected)):
            if given != kirwan_image:
                raise TargetValidationError(f"divisor class {j} differs from the image of its weight {presentation.charges[j]}")

    if twist is not None:
        for w in twist.weights:
            if len(w) != r:
                raise TargetValidationError(f"twist weight {w} must have {r} entries")

    lifts = list(insertion_lifts) if insertion_lifts is not None else list(ring.divisor_lifts)
    if len(lifts) != ring.rank:
        raise TargetValidationError("insertion_lifts must list one entry per basis element")
    for i, lift in enumerate(lifts):
        if lift is None:
            continue
        try:
            value = ring.class_from_expression(lift)
        except InvalidArgumentError as exc:
            raise TargetValidationError(f"insertion lift of {ring.labels[i]!r}: {exc.message}")
        if value != ring.basis_class(i):
            raise TargetValidationError(f"insertion lift {lift!r} does not reduce to {ring.labels[i]!r}")

    target = TargetModel(
        name=name,
        presentation=presentation,
        ring=ring,
        chamber=chamber,
        generators=gens,
        kirwan=kirwan,
        divisor_classes=divisors,
        twist=twist,
        insertion_lifts=lifts,
    )
    logger.info("target %s: N=%d r=%d rank H*=%d", name, presentation.N, r, ring.rank)
    return target


def _check_relations(presentation: GitPresentation, divisors: Sequence[CohClass]) -> None:
    """Every linear relation among the weight rows must vanish among the divisor classes."""
    rows = sympy.Matrix([list(row) for row in presentation.charges]).T
    for relation in rows.nullspace():
        combo = divisors[0].ring.zero()
        for coeff, d in zip(relation, divisors):
            combo = combo + d * parse_rational(coeff)
        if not combo.is_zero():
            raise TargetValidationError(f"relation {list(relation)} among the weights does not hold for the divisor classes")


def projective_target(n: int, twist: Optional[Sequence[int]] = None, label: str = "H") -> TargetModel:
    """P^n as C^{n+1} // C*, optionally twisted by O(l_1) + ... + O(l_k)."""
    ring = ring_projective(n, label)
    presentation = GitPresentation(charges=((1,),) * (n + 1), theta=(1,))
    twist_data = TwistData(tuple((int(l),) for l in twist)) if twist else None
    name = f"P{n}" + (f"[{','.join(str(l) for l in twist)}]" if twist else "")
    return build_target(name, presentation, ring, {label: (1,)}, twist=twist_data)


def product_target(a: TargetModel, b: TargetModel) -> TargetModel:
    """Product of two targets with block-diagonal charges."""
    ra, rb = a.r, b.r
    charges = tuple(tuple(row) + (0,) * rb for row in a.presentation.charges) + tuple(
        (0,) * ra + tuple(row) for row in b.presentation.charges
    )
    presentation = GitPresentation(charges=charges, theta=a.theta + b.theta)
    generators = {lab: tuple(eta) + (0,) * rb for lab, eta in a.generators.items()}
    generators.update({lab: (0,) * ra + tuple(eta) for lab, eta in b.generators.items()})
    weights = []
    if a.is_twisted:
        weights += [tuple(w) + (0,) * rb for w in a.twist.weights]
    if b.is_twisted:
        weights += [(0,) * ra + tuple(w) for w in b.twist.weights]
    ring = ring_product(a.ring, b.ring)
    return build_target(
        f"{a.name}x{b.name}",
        presentation,
        ring,
        generators,
        twist=TwistData(tuple(weights)) if weights else None,
    )


def hirzebruch_target(a: int) -> TargetModel:
    """
    Hirzebruch surface F_a as C^4 // (C*)^2 with charges (1,0),(1,0),(0,1),(-a,1) and theta = (1,1).

    The ring has basis 1, f, h, pt with f = kappa(e_1) the fibre, h = kappa(e_2),
    f^2 = 0, f*h = pt and h^2 = a*pt. F_a is Fano only for a <= 1.
    """
    if not isinstance(a, int) or a < 0:
        raise InvalidArgumentError(f"Hirzebruch index must be a nonnegative integer, got {a!r}")
    labels = ["1", "f", "h", "pt"]
    mult = [{"i": "1", "j": lab, "coeffs": {lab: "1"}} for lab in labels]
    mult += [
        {"i": "f", "j": "h", "coeffs": {"pt": "1"}},
        {"i": "h", "j": "h", "coeffs": {"pt": str(a)}},
    ]
    ring = ring_from_table(
        {
            "name": f"F{a}",
            "basis": [{"label": lab, "degree": deg} for lab, deg in zip(labels, (0, 2, 2, 4))],
            "mult": mult,
            "integral": {"pt": "1"},
            "divisor_lifts": ["1", "f", "h", "f*h"],
        }
    )
    presentation = GitPresentation(charges=((1, 0), (1, 0), (0, 1), (-a, 1)), theta=(1, 1))
    return build_target(f"F{a}", presentation, ring, {"f": (1, 0), "h": (0, 1)})


class TargetLoader:
    """Loads target-spec documents; ring files resolve relative to the spec."""

    def read_document(self, path: Union[str, Path]) -> Dict[str, Any]:
        path = Path(path)
        try:
            with open(path, "r") as f:
                return json.load(f)
        except FileNotFoundError:
            raise ConfigurationError(f"target spec not found: {path}")
        except json.JSONDecodeError as exc:
            raise TargetValidationError(f"invalid JSON in target spec {path}: {exc}")

    def presentation(self, document: Mapping[str, Any]) -> GitPresentation:
        try:
            return GitPresentation(charges=document["charges"], theta=document["theta"])
        except KeyError as exc:
            raise TargetValidationError(f"target spec is missing field {exc}")
        except (InvalidArgumentError, TypeError, ValueError) as exc:
            raise TargetValidationError(f"malformed presentation: {exc}")

    def ring(self, spec: Mapping[str, Any], base_dir: Path) -> CohRing:
        if "projective" in spec:
            return ring_projective(int(spec["projective"]), spec.get("label", "H"))
        if "product" in spec:
            factors = [self.ring(part, base_dir) for part in spec["product"]]
            if len(factors) < 2:
                raise TargetValidationError("a product ring needs at least two factors")
            out = factors[0]
            for factor in factors[1:]:
                out = ring_product(out, factor)
            return out
        if "file" in spec:
            path = base_dir / spec["file"]
            if not path.exists():
                raise ConfigurationError(f"ring table not found: {path}")
            return ring_from_table(path)
        if "basis" in spec:
            return ring_from_table(spec)
        raise TargetValidationError("ring must be projective, product, file or an inline table")

    def load(self, path: Union[str, Path]) -> TargetModel:
        """
        Loads and validates a target.

        Args:
            path: target-spec JSON file

        Returns:
            Validated TargetModel
        """
        path = Path(path)
        document = self.read_document(path)
        return self.from_document(document, path.parent, default_name=path.stem)

    def from_document(
        self, document: Mapping[str, Any], base_dir: Path, default_name: str = "target"
    ) -> TargetModel:
        presentation = self.presentation(document)
        try:
            ring = self.ring(document.get("ring") or {}, base_dir)
        except MalformedRingError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise TargetValidationError(f"malformed ring spec: {exc}")
        twist_raw = document.get("twist")
        twist = TwistData(tuple(tuple(w) for w in twist_raw)) if twist_raw else None
        return build_target(
            str(document.get("name", default_name)),
            presentation,
            ring,
            generators=document.get("generators"),
            divisor_classes=document.get("divisor_classes"),
            twist=twist,
            insertion_lifts=document.get("insertion_lifts"),
        )
