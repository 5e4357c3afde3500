"""Small and big I-functions of toric targets, by the shift rule and by the operator form."""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.coh_ring import CohClass, parse_polynomial, parse_rational
from src.errors import InvalidArgumentError, NoDivisorLiftError, NonConvexTwistError
from src.laurent import ZLaurent, zl_add, zl_mul
from src.models import ConstructionPath, EffectiveClass, IFunction, SeriesKind, TargetModel, beta_deg
from src.multiseries import (
    MultiSeries,
    Truncation,
    exponents_up_to,
    multi_factorial,
    series_exp,
    series_mul,
)
from src.target import effective_monoid, ensure_convex

logger = logging.getLogger(__name__)


def _reciprocal_linear(value: CohClass, k: int) -> ZLaurent:
    """1/(value + k z) for nilpotent value and k != 0, as a finite sum."""
    ring = value.ring
    terms = {}
    power = ring.unit()
    scale = Fraction(1, k)
    for i in range(ring.dimension + 1):
        if power.is_zero():
            break
        terms[-i - 1] = power * scale
        power = ring.mul(power, value)
        scale = -scale / k
    return ZLaurent(ring, terms)


def small_I_term(target: TargetModel, beta: Sequence[int], low: Optional[int] = None) -> ZLaurent:
    """
    Toric coefficient I_beta without twist.

    For <beta, rho_j> = d >= 0 the factor is 1/prod_{k=1}^{d} (D_j + kz); for
    d < 0 it is the polynomial prod_{k=d+1}^{0} (D_j + kz). Terms below z^low
    are dropped when `low` is given.
    """
    beta = tuple(beta)
    if len(beta) != target.r:
        raise InvalidArgumentError(f"class {beta} must have {target.r} entries")
    if beta_deg(beta, target.theta) < 0 or not target.chamber.dual_cone.contains(beta):
        raise InvalidArgumentError(f"class {beta} is not effective for {target.name}")
    ring = target.ring
    result = ZLaurent.one(ring)
    for rho, divisor in zip(target.presentation.charges, target.divisor_classes):
        d = int(beta_deg(beta, rho))
        if d > 0:
            for k in range(1, d + 1):
                result = zl_mul(result, _reciprocal_linear(divisor, k))
        elif d < 0:
            for k in range(d + 1, 1):
                result = zl_mul(result, ZLaurent.linear(divisor, k))
        if result.is_zero():
            break
    return result.truncate_below(low)


def twist_factor(target: TargetModel, beta: Sequence[int], include_euler: bool = True) -> ZLaurent:
    """prod_a prod_{k=0}^{<beta, eps_a>} (c1(E_a) + kz); k starts at 1 without the Euler factor."""
    ring = target.ring
    result = ZLaurent.one(ring)
    if not target.is_twisted:
        return result
    start = 0 if include_euler else 1
    for a, (weight, c1) in enumerate(zip(target.twist.weights, target.twist_classes())):
        top = int(beta_deg(beta, weight))
        if top < 0:
            raise NonConvexTwistError(f"twist summand {a} pairs negatively with beta={list(beta)}")
        for k in range(start, top + 1):
            result = zl_mul(result, ZLaurent.linear(c1, k))
    return result


def _check_lift_characters(target: TargetModel, poly_gens: Sequence[str]) -> None:
    if target.chamber.full_dimensional:
        return
    theta = target.theta
    for g in poly_gens:
        eta = target.generators[g]
        # proportional to theta
        if any(e * t2 != e2 * t for e, t in zip(eta, theta) for e2, t2 in zip(eta, theta)):
            raise NoDivisorLiftError(
                f"chamber is not full-dimensional; generator {g!r} uses a character outside the span of theta"
            )


def shift_class(target: TargetModel, p: Optional[str], beta: Sequence[int]) -> ZLaurent:
    """p(c1(L_eta_1) + <beta, eta_1> z, ...) reduced in the ring."""
    if p is None:
        raise NoDivisorLiftError("basis element has no polynomial lift in the divisor generators")
    labels = list(target.generators)
    try:
        poly = parse_polynomial(p, labels)
    except InvalidArgumentError as exc:
        raise NoDivisorLiftError(f"lift {p!r} is not a polynomial in the divisor generators: {exc.message}")
    used = [str(g) for pos, g in enumerate(poly.gens) if any(monom[pos] for monom in poly.monoms())]
    _check_lift_characters(target, used)
    ring = target.ring
    shifted = {
        lab: ZLaurent.linear(ring.generator_class(lab), beta_deg(beta, target.generators[lab])) for lab in labels
    }
    result = ZLaurent.zero(ring)
    for monom, coeff in poly.terms():
        term = ZLaurent.z_power(ring, 0, parse_rational(coeff))
        for g, k in zip(poly.gens, monom):
            if k:
                term = zl_mul(term, shifted[str(g)].power(k))
        result = zl_add(result, term)
    return result


def _template(target: TargetModel, D, T: int, variables: Sequence[int]) -> MultiSeries:
    for i in variables:
        if not 0 <= i < target.ring.rank:
            raise InvalidArgumentError(f"insertion index {i} out of range")
    if len(set(variables)) != len(variables):
        raise InvalidArgumentError("insertion slice repeats an index")
    return MultiSeries(target.ring, target.theta, tuple(variables), Truncation(D, T))


def _coefficients(target: TargetModel, D, include_euler: bool) -> List[Tuple[EffectiveClass, ZLaurent]]:
    """(beta, I_beta * twist) for every effective beta in the window, zero terms skipped."""
    if target.is_twisted:
        ensure_convex(target, D)
    out = []
    for beta in effective_monoid(target, D):
        value = small_I_term(target, beta)
        if target.is_twisted and not value.is_zero():
            value = zl_mul(value, twist_factor(target, beta, include_euler))
        if not value.is_zero():
            out.append((beta, value))
        logger.debug("I_%s: %d z-terms", beta, len(value.terms))
    return out


def small_I(target: TargetModel, D, include_euler: bool = True) -> IFunction:
    """sum_beta q^beta I_beta as a series without insertion variables."""
    template = _template(target, D, 0, ())
    terms = {(beta, ()): value for beta, value in _coefficients(target, D, include_euler)}
    return IFunction(
        target=target,
        kind=SeriesKind.SMALL,
        series=template.like(terms),
        includes_euler_factor=include_euler and target.is_twisted,
    )


def _slice_exponential(target: TargetModel, template: MultiSeries, beta: EffectiveClass) -> MultiSeries:
    """exp(sum_{i in S} t_i gamma_{i,beta}(z)/z) as a q-free series."""
    zero_beta = template.zero_beta
    exponent = {}
    for i in template.variables:
        value = shift_class(target, target.insertion_lifts[i], beta).shift(-1)
        if not value.is_zero():
            exponent[(zero_beta, template.variable_exponent(i))] = value
    if not exponent or template.truncation.max_insertions == 0:
        return template.one()
    return series_exp(template.like(exponent))


def _assemble(
    template: MultiSeries,
    coefficients: Sequence[Tuple[EffectiveClass, ZLaurent]],
    exponentials: Dict[EffectiveClass, MultiSeries],
    prefactors: Optional[Dict[EffectiveClass, ZLaurent]] = None,
) -> MultiSeries:
    terms = {}
    saturated = False
    for beta, value in coefficients:
        if prefactors is not None:
            value = zl_mul(prefactors[beta], value)
            if value.is_zero():
                continue
        exp_series = exponentials[beta]
        saturated = saturated or exp_series.saturated
        for (_, m), e in exp_series.terms.items():
            terms[(beta, m)] = zl_mul(e, value)
    return template.like(terms, saturated)


def big_I(
    target: TargetModel,
    D,
    T: int,
    insertions: Optional[Sequence[int]] = None,
    include_euler: bool = True,
) -> IFunction:
    """
    sum_beta q^beta exp(sum_{i in S} t_i gamma_{i,beta}(z)/z) I_beta [twist_factor].

    Args:
        target: validated target
        D: bound on beta(L_theta)
        T: bound on the total insertion degree
        insertions: basis indices carried as variables (default: all)
        include_euler: keep the k=0 Euler factor of a twist

    Returns:
        IFunction built by the shift rule
    """
    variables = tuple(range(target.ring.rank)) if insertions is None else tuple(insertions)
    template = _template(target, D, T, variables)
    coefficients = _coefficients(target, D, include_euler)
    exponentials = {beta: _slice_exponential(target, template, beta) for beta, _ in coefficients}
    series = _assemble(template, coefficients, exponentials)
    logger.info("big I of %s: %d terms (D=%s, T=%d, slice=%s)", target.name, len(series.terms), D, T, variables)
    return IFunction(
        target=target,
        kind=SeriesKind.BIG if variables else SeriesKind.SMALL,
        series=series,
        construction_path=ConstructionPath.SHIFT_RULE,
        includes_euler_factor=include_euler and target.is_twisted,
    )


def derivative_family(
    target: TargetModel,
    D,
    T: int,
    insertions: Sequence[int],
    include_euler: bool = False,
) -> List[MultiSeries]:
    """z d/dt_i of big I restricted to the slice, for every basis index i."""
    template = _template(target, D, T, tuple(insertions))
    coefficients = _coefficients(target, D, include_euler)
    exponentials = {beta: _slice_exponential(target, template, beta) for beta, _ in coefficients}
    family = []
    for i in range(target.ring.rank):
        lift = target.insertion_lifts[i]
        prefactors = {beta: shift_class(target, lift, beta) for beta, _ in coefficients}
        family.append(_assemble(template, coefficients, exponentials, prefactors))
    return family


def divisor_identity_rhs(target: TargetModel, D, T: int, index: int) -> MultiSeries:
    """e^{t gamma/z} * small_I(q^beta -> q^beta e^{t <beta, eta>}) for a degree-2 generator gamma = c1(L_eta)."""
    label = target.ring.labels[index]
    if label not in target.generators:
        raise InvalidArgumentError(f"basis element {label!r} is not a divisor generator")
    eta = target.generators[label]
    ring = target.ring
    template = _template(target, D, T, (index,))
    zero_beta = template.zero_beta
    left = template.one()
    if T > 0:
        left = series_exp(template.like({(zero_beta, (1,)): ZLaurent.monomial(ring.basis_class(index), -1)}))
    terms = {}
    for beta, value in _coefficients(target, D, include_euler=True):
        weight = beta_deg(beta, eta)
        factorial = 1
        for k in range(T + 1):
            if k:
                factorial *= k
            coeff = weight ** k / factorial
            if coeff:
                terms[(beta, (k,))] = value.scale(coeff)
    return series_mul(left, template.like(terms))


# -- operator form -------------------------------------------------------------


class DivisorOperator:
    """
    Applies p(nabla) to a series of q-coefficients, where
    nabla_g X_beta = z <beta, eta_g> X_beta + c1(L_eta_g) X_beta.
    """

    def __init__(self, target: TargetModel, p: Optional[str]):
        if p is None:
            raise NoDivisorLiftError("basis element has no polynomial lift in the divisor generators")
        self.target = target
        labels = list(target.generators)
        try:
            self.poly = parse_polynomial(p, labels)
        except InvalidArgumentError as exc:
            raise NoDivisorLiftError(f"lift {p!r} is not a polynomial in the divisor generators: {exc.message}")

    def _nabla(self, label: str, terms: Dict[EffectiveClass, ZLaurent]) -> Dict[EffectiveClass, ZLaurent]:
        ring = self.target.ring
        generator = ZLaurent.monomial(ring.generator_class(label))
        eta = self.target.generators[label]
        out = {}
        for beta, value in terms.items():
            image = zl_add(zl_mul(generator, value), value.shift(1).scale(beta_deg(beta, eta)))
            if not image.is_zero():
                out[beta] = image
        return out

    def apply(self, terms: Dict[EffectiveClass, ZLaurent]) -> Dict[EffectiveClass, ZLaurent]:
        total: Dict[EffectiveClass, ZLaurent] = {}
        for monom, coeff in self.poly.terms():
            current = dict(terms)
            for g, k in zip(self.poly.gens, monom):
                for _ in range(k):
                    current = self._nabla(str(g), current)
            scale = parse_rational(coeff)
            for beta, value in current.items():
                value = value.scale(scale)
                total[beta] = zl_add(total[beta], value) if beta in total else value
        return {b: v for b, v in total.items() if not v.is_zero()}


def big_I_operator(
    target: TargetModel,
    D,
    T: int,
    insertions: Optional[Sequence[int]] = None,
    include_euler: bool = True,
) -> IFunction:
    """
    exp(sum_i t_i p_i(nabla)/z) applied to small I.

    The t^m coefficient is prod_i (p_i(nabla)/z)^{m_i} I / m!, built by
    applying one operator at a time.
    """
    variables = tuple(range(target.ring.rank)) if insertions is None else tuple(insertions)
    template = _template(target, D, T, variables)
    base = {beta: value for beta, value in _coefficients(target, D, include_euler)}
    operators = [DivisorOperator(target, target.insertion_lifts[i]) for i in variables]
    applied: Dict[Tuple[int, ...], Dict[EffectiveClass, ZLaurent]] = {template.zero_m: base}
    for m in exponents_up_to(len(variables), T):
        if m in applied:
            continue
        pos = next(k for k, e in enumerate(m) if e)
        previous = tuple(e - 1 if k == pos else e for k, e in enumerate(m))
        image = operators[pos].apply(applied[previous])
        applied[m] = {beta: value.shift(-1) for beta, value in image.items()}
    terms = {}
    for m, by_beta in applied.items():
        factorial = multi_factorial(m)
        for beta, value in by_beta.items():
            terms[(beta, m)] = value.scale(Fraction(1, factorial))
    series = template.like(terms)
    logger.info("operator-form big I of %s: %d terms", target.name, len(series.terms))
    return IFunction(
        target=target,
        kind=SeriesKind.BIG if variables else SeriesKind.SMALL,
        series=series,
        construction_path=ConstructionPath.OPERATOR_FORM,
        includes_euler_factor=include_euler and target.is_twisted,
    )
