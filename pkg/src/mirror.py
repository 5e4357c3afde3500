"""Birkhoff factorization, mirror maps, flat coordinates and invariant extraction."""

import logging
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.coh_ring import parse_polynomial, parse_rational
from src.errors import (
    InsufficientTruncationError,
    InternalInconsistencyError,
    InvalidArgumentError,
    NotInvertibleError,
    SaturatedTruncationError,
)
from src.ifunction import big_I, derivative_family
from src.laurent import ZLaurent, zl_add
from src.models import (
    FactorStep,
    IFunction,
    InvariantQuery,
    InvariantResult,
    MirrorOutput,
    TargetModel,
    beta_deg,
)
from src.multiseries import (
    Index,
    MultiSeries,
    Truncation,
    add_tuples,
    exponents_up_to,
    multi_factorial,
    series_add,
    series_exp,
    series_mul,
    series_scale,
    sub_tuples,
)
from src.target import effective_monoid, projective_target

logger = logging.getLogger(__name__)

ScalarPoly = Dict[int, Fraction]


def _poly_times(poly: ScalarPoly, value: ZLaurent) -> ZLaurent:
    out = ZLaurent.zero(value.ring)
    for k, c in poly.items():
        out = zl_add(out, value.shift(k).scale(c))
    return out


def _window_indices(target: TargetModel, truncation: Truncation, variables: Sequence[int]) -> List[Index]:
    classes = effective_monoid(target, truncation.max_degree)
    exponents = exponents_up_to(len(variables), truncation.max_insertions)
    indices = [(beta, m) for beta in classes for m in exponents]
    indices.sort(key=lambda idx: (beta_deg(idx[0], target.theta), sum(idx[1]), idx[0], idx[1]))
    return indices


def _fits(window: Truncation, series: MultiSeries, idx: Index) -> bool:
    beta, m = idx
    return series.beta_degree(beta) <= window.max_degree and sum(m) <= window.max_insertions


def _ambient_series(ifun: IFunction) -> MultiSeries:
    """The I-function without the Euler factor of the twist."""
    target = ifun.target
    series = ifun.series
    if not (target.is_twisted and ifun.includes_euler_factor):
        return series
    trunc = series.truncation
    ambient = big_I(target, trunc.max_degree, trunc.max_insertions, series.variables, include_euler=False).series
    if not series_scale(ambient, target.euler_class()).equals(series):
        raise InternalInconsistencyError("twisted I-function is not the Euler class times its ambient series")
    return ambient


def birkhoff(ifun: IFunction, window: Optional[Truncation] = None) -> MirrorOutput:
    """
    Eliminates nonnegative z-powers from the span of the derivatives z d/dt_i I.

    J = sum_i c^i(z) z d/dt_i I with scalar polynomial c^i, solved index by
    index in (beta(L_theta), |m|, lex) order. The leading matrix of the
    derivative family is the identity, so each step reads c^i off the basis
    coordinates of the nonnegative part. tau is the z^{-1} coefficient.

    Args:
        ifun: big (or small) I-function
        window: truncation to factor at; must fit inside the I-function's

    Returns:
        MirrorOutput with tau, J (Euler-carrying when twisted) and the ambient J
    """
    target = ifun.target
    series = ifun.series
    trunc = series.truncation
    variables = series.variables
    if window is not None and window != trunc:
        for beta, m in _window_indices(target, window, variables):
            if not series.in_window(beta, m):
                raise SaturatedTruncationError(
                    f"I-function truncated at D={trunc.max_degree}, T={trunc.max_insertions} "
                    f"cannot complete elimination at beta={list(beta)}, m={list(m)}",
                    {"beta": beta, "m": m},
                )
        trunc = window
        series = MultiSeries(
            series.ring,
            series.theta,
            variables,
            window,
            {idx: v for idx, v in series.terms.items() if _fits(window, series, idx)},
            series.saturated,
        )
        ifun = IFunction(ifun.target, ifun.kind, series, ifun.construction_path, ifun.includes_euler_factor)

    ambient = _ambient_series(ifun)
    zero_index = (ambient.zero_beta, ambient.zero_m)
    if ambient.coefficient(*zero_index) != ZLaurent.one(target.ring):
        raise InternalInconsistencyError("I-function does not start with the unit class")
    family = derivative_family(target, trunc.max_degree, trunc.max_insertions, variables, include_euler=False)
    for i, member in enumerate(family):
        if member.coefficient(*zero_index) != ZLaurent.monomial(target.ring.basis_class(i)):
            raise InternalInconsistencyError(f"derivative {i} does not start with its basis class")

    rank = target.ring.rank
    coeffs: Dict[Index, Dict[int, ScalarPoly]] = {}
    j_terms: Dict[Index, ZLaurent] = {}
    tau_terms: Dict[Index, ZLaurent] = {}
    log: List[FactorStep] = []
    for idx in _window_indices(target, trunc, variables):
        beta, m = idx
        remainder = ZLaurent.zero(target.ring)
        for (beta1, m1), c1 in coeffs.items():
            beta2, m2 = sub_tuples(beta, beta1), sub_tuples(m, m1)
            if any(k < 0 for k in m2):
                continue
            for i, poly in c1.items():
                value = family[i].terms.get((beta2, m2))
                if value is not None:
                    remainder = zl_add(remainder, _poly_times(poly, value))
        positive = remainder.nonnegative_part()
        step: Dict[int, ScalarPoly] = {}
        for k, cls in positive.terms.items():
            for i in range(rank):
                if cls.coeffs[i]:
                    step.setdefault(i, {})[k] = -cls.coeffs[i]
        value = remainder - positive
        if idx == zero_index:
            step.setdefault(0, {})[0] = step.get(0, {}).get(0, Fraction(0)) + 1
            value = zl_add(value, ZLaurent.one(target.ring))
        if step:
            coeffs[idx] = step
        if not value.is_zero():
            j_terms[idx] = value
            tau_class = value.coeff(-1)
            if not tau_class.is_zero():
                tau_terms[idx] = ZLaurent.monomial(tau_class)
        log.append(FactorStep(beta=beta, m=m, cleared_exponents=positive.exponents()))
        logger.debug("birkhoff beta=%s m=%s cleared %s", beta, m, positive.exponents())

    ambient_j = ambient.like(j_terms, ambient.saturated)
    J = series_scale(ambient_j, target.euler_class()) if target.is_twisted else ambient_j
    logger.info("birkhoff on %s: %d orders, %d J terms", target.name, len(log), len(j_terms))
    return MirrorOutput(
        target=target,
        tau=ambient.like(tau_terms),
        J=J,
        ambient_J=ambient_j,
        factor_log=log,
        saturated=ambient.saturated,
    )


def check_birkhoff_contract(out: MirrorOutput) -> List[str]:
    """Violations of J = 1 + tau/z + O(z^-2) and tau = sum t_i gamma_i + O(q); empty when satisfied."""
    problems = []
    J = out.ambient_J
    ring = out.target.ring
    zero_index = (J.zero_beta, J.zero_m)
    for idx, value in J.items():
        top = value.max_exponent()
        if top is not None and top > 0:
            problems.append(f"positive z-power z^{top} at {idx}")
        expected_zero = ring.unit() if idx == zero_index else ring.zero()
        if value.coeff(0) != expected_zero:
            problems.append(f"z^0 part at {idx} is {value.coeff(0)}")
        if value.coeff(-1) != out.tau.coefficient(*idx).coeff(0):
            problems.append(f"z^-1 part at {idx} differs from tau")
    if zero_index not in J.terms:
        problems.append("J has no leading unit term")
    for (beta, m), value in out.tau.items():
        if any(beta):
            continue
        if sum(m) == 1:
            expected = ring.basis_class(J.variables[m.index(1)])
        else:
            expected = ring.zero()
        if value.coeff(0) != expected:
            problems.append(f"tau at q^0, t^{m} is {value.coeff(0)}")
    for pos, i in enumerate(J.variables):
        m = tuple(1 if k == pos else 0 for k in range(len(J.variables)))
        if J.in_window(J.zero_beta, m) and out.tau.coefficient(J.zero_beta, m).coeff(0) != ring.basis_class(i):
            problems.append(f"tau misses t_{i} gamma_{i} at q^0")
    return problems


# -- univariate Novikov changes ---------------------------------------------------


def _ps_mul(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> List[Fraction]:
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if not x:
            continue
        for j, y in enumerate(b[: n - i]):
            out[i + j] += x * y
    return out


def _ps_exp(a: Sequence[Fraction], n: int) -> List[Fraction]:
    """exp of a series with zero constant term, via E' = a'E."""
    if a and a[0]:
        raise NotInvertibleError("exponent has a nonzero constant term")
    out = [Fraction(0)] * n
    out[0] = Fraction(1)
    for k in range(1, n):
        out[k] = sum((j * a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)), Fraction(0)) / k
    return out


def _ps_compose(a: Sequence[Fraction], b: Sequence[Fraction], n: int) -> List[Fraction]:
    """a(b(Q)) for b with zero constant term."""
    out = [Fraction(0)] * n
    for coeff in reversed(list(a[:n])):
        out = _ps_mul(out, b, n)
        out[0] += coeff
    return out


def invert_mirror(g: Sequence, D: int) -> List[Fraction]:
    """
    Inverts Q = q exp(g(q)) to q = q(Q), exact through Q^D.

    Args:
        g: coefficients g_0, g_1, ... of g(q); g_0 must vanish
        D: order of the result

    Returns:
        coefficients of q(Q), starting at Q^0
    """
    coeffs = [parse_rational(x) for x in g]
    if D < 0:
        raise InvalidArgumentError("order must be nonnegative")
    if coeffs and coeffs[0]:
        raise NotInvertibleError("Q = q exp(g(q)) needs g(0) = 0 for an exact rational inverse")
    n = D + 1
    q = [Fraction(0)] * n
    if n > 1:
        q[1] = Fraction(1)
    for _ in range(D):
        factor = _ps_exp([-c for c in _ps_compose(coeffs, q, n)], n)
        q = [Fraction(0)] + factor[: n - 1]
    return q


def change_novikov(J: MultiSeries, q_of_Q: Sequence) -> MultiSeries:
    """Substitutes q = q(Q) in a series with one Novikov variable and re-truncates."""
    if len(J.theta) != 1:
        raise InvalidArgumentError("change_novikov needs a single Novikov variable")
    subst = [parse_rational(x) for x in q_of_Q]
    if subst and subst[0] and any(subst[1:]):
        raise InvalidArgumentError("substitution must vanish at Q = 0 unless it is constant")
    top = int(J.truncation.max_degree / J.theta[0]) if J.theta[0] > 0 else 0
    n = top + 1
    subst = (subst + [Fraction(0)] * n)[:n]
    powers = [[Fraction(1)] + [Fraction(0)] * (n - 1)]
    for _ in range(1, n):
        powers.append(_ps_mul(powers[-1], subst, n))
    out: Dict[Index, ZLaurent] = {}
    for ((b,), m), value in J.terms.items():
        for e, c in enumerate(powers[b] if b < n else []):
            if c and J.in_window((e,), m):
                key = ((e,), m)
                scaled = value.scale(c)
                out[key] = zl_add(out[key], scaled) if key in out else scaled
    return J.like(out, J.saturated)


# -- flat coordinates ------------------------------------------------------------


def _coordinate(series: MultiSeries, i: int) -> MultiSeries:
    ring = series.ring
    terms = {}
    for idx, value in series.terms.items():
        c = value.coeff(0).coeffs[i]
        if c:
            terms[idx] = ZLaurent.z_power(ring, 0, c)
    return series.like(terms)


def _linear_character(target: TargetModel, i: int) -> Optional[Tuple[Fraction, ...]]:
    """Character of a degree-2 basis element whose lift is linear in the generators."""
    lift = target.insertion_lifts[i]
    if lift is None or target.ring.degrees[i] != 2:
        return None
    labels = list(target.generators)
    poly = parse_polynomial(lift, labels)
    if any(sum(monom) != 1 for monom in poly.monoms()):
        return None
    weight = [Fraction(0)] * target.r
    for monom, coeff in poly.terms():
        g = str(poly.gens[monom.index(1)])
        for a, e in enumerate(target.generators[g]):
            weight[a] += parse_rational(coeff) * e
    return tuple(weight)


def _shift_beta(series: MultiSeries, beta: Sequence[int]) -> MultiSeries:
    out = {}
    for (b, m), value in series.terms.items():
        key = (add_tuples(b, beta), m)
        if series.in_window(*key):
            out[key] = value
    return series.like(out, series.saturated)


class _Substitution:
    """q^beta t^m -> Q^beta exp(-<beta, H>) t(Q, s)^m in a series over (Q, s)."""

    def __init__(self, template: MultiSeries, t_series: Dict[int, MultiSeries], H: List[MultiSeries]):
        self.template = template
        self.t_series = t_series
        self.H = H
        self._t_monomials: Dict[Tuple[int, ...], MultiSeries] = {template.zero_m: template.one()}
        self._exp: Dict[Tuple[int, ...], MultiSeries] = {}

    def t_monomial(self, m: Tuple[int, ...]) -> MultiSeries:
        cached = self._t_monomials.get(m)
        if cached is None:
            pos = next(k for k, e in enumerate(m) if e)
            previous = tuple(e - 1 if k == pos else e for k, e in enumerate(m))
            cached = series_mul(self.t_monomial(previous), self.t_series[self.template.variables[pos]])
            self._t_monomials[m] = cached
        return cached

    def novikov_factor(self, beta: Tuple[int, ...]) -> MultiSeries:
        cached = self._exp.get(beta)
        if cached is None:
            exponent = self.template.like()
            for b, h in zip(beta, self.H):
                if b:
                    exponent = series_add(exponent, series_scale(h, -b))
            cached = series_exp(exponent) if not exponent.is_zero() else self.template.one()
            self._exp[beta] = cached
        return cached

    def apply(self, series: MultiSeries) -> MultiSeries:
        grouped: Dict[Tuple[int, ...], MultiSeries] = {}
        for (beta, m), value in series.terms.items():
            part = series_scale(self.t_monomial(m), value)
            grouped[beta] = series_add(grouped[beta], part) if beta in grouped else part
        out = self.template.like()
        for beta, part in grouped.items():
            out = series_add(out, _shift_beta(series_mul(self.novikov_factor(beta), part), beta))
        return out


def to_flat_coordinates(out: MirrorOutput) -> MirrorOutput:
    """
    Re-expresses J in the coordinates of the Gromov-Witten J-function.

    Unit and divisor components of tau outside the slice are absorbed by the
    string and divisor equations; slice components are inverted by
    fixed-point iteration and the Novikov variables change accordingly.
    """
    if out.flat:
        return out
    target = out.target
    ring = target.ring
    tau = out.tau
    variables = tau.variables
    template = tau.like()
    absorbed = template.like()
    H = [template.like() for _ in range(target.r)]
    deltas: Dict[int, MultiSeries] = {}
    for i in range(ring.rank):
        component = _coordinate(tau, i)
        if i in variables:
            t_i = template.like({(template.zero_beta, template.variable_exponent(i)): ZLaurent.one(ring)})
            deltas[i] = component - t_i
            continue
        if component.is_zero():
            continue
        if i == 0:
            absorbed = series_add(absorbed, series_scale(component, ZLaurent.monomial(ring.unit(), -1)))
            continue
        weight = _linear_character(target, i)
        if weight is None:
            raise InternalInconsistencyError(
                f"mirror map leaves the insertion slice in direction {ring.labels[i]!r}"
            )
        absorbed = series_add(absorbed, series_scale(component, ZLaurent.monomial(ring.basis_class(i), -1)))
        for a, w in enumerate(weight):
            if w:
                H[a] = series_add(H[a], series_scale(component, w))

    saturated = out.saturated
    if variables and any(
        not any(m) for delta in deltas.values() for (_, m) in delta.terms
    ):
        saturated = True
        logger.warning("mirror map shifts slice variables by pure q-terms; flat values near T are incomplete")

    correction = series_exp(series_scale(absorbed, -1)) if not absorbed.is_zero() else template.one()
    G = series_mul(correction, out.J)
    G_ambient = series_mul(correction, out.ambient_J)

    if not variables and target.r == 1:
        top = int(template.truncation.max_degree / target.theta[0])
        g = [Fraction(0)] * (top + 1)
        for ((b,), _), value in H[0].terms.items():
            g[b] = value.coeff(0).coeffs[0]
        q_of_Q = invert_mirror(g, top)
        flat_J = change_novikov(G, q_of_Q)
        flat_ambient = change_novikov(G_ambient, q_of_Q)
    else:
        substitution = _fixed_point(target, template, deltas, H)
        flat_J = substitution.apply(G)
        flat_ambient = substitution.apply(G_ambient)

    return MirrorOutput(
        target=target,
        tau=tau,
        J=flat_J,
        ambient_J=flat_ambient,
        factor_log=out.factor_log,
        flat=True,
        saturated=saturated,
    )


def _fixed_point(
    target: TargetModel, template: MultiSeries, deltas: Dict[int, MultiSeries], H: List[MultiSeries]
) -> _Substitution:
    ring = target.ring
    s = {
        i: template.like({(template.zero_beta, template.variable_exponent(i)): ZLaurent.one(ring)})
        for i in template.variables
    }
    t_series = dict(s)
    H_flat = [template.like() for _ in H]
    levels = len({beta_deg(b, target.theta) for b in effective_monoid(target, template.truncation.max_degree)})
    for _ in range(levels + 2):
        substitution = _Substitution(template, t_series, H_flat)
        new_t = {i: s[i] - substitution.apply(deltas[i]) for i in template.variables}
        new_H = [substitution.apply(h) for h in H]
        if all(new_t[i].equals(t_series[i]) for i in t_series) and all(
            a.equals(b) for a, b in zip(new_H, H_flat)
        ):
            return substitution
        t_series, H_flat = new_t, new_H
    raise InternalInconsistencyError("flat-coordinate inversion did not converge within the truncation")


# -- extraction -------------------------------------------------------------------


def query_invariant(out: MirrorOutput, query: InvariantQuery) -> InvariantResult:
    """
    Reads <gamma_{j1}, ..., gamma_{jk}, last psi^a>_{0,k+1,beta} from the flat J.

    The value is m! times the q^beta s^m z^{-a-2} coefficient paired with
    `last_class`, where m counts repeated insertions.
    """
    flat = to_flat_coordinates(out)
    target = flat.target
    ring = target.ring
    J = flat.J
    variables = J.variables
    counts = [0] * len(variables)
    for j in query.insertions:
        if j not in variables:
            raise InvalidArgumentError(f"insertion {ring.labels[j] if 0 <= j < ring.rank else j!r} is not in the slice")
        counts[variables.index(j)] += 1
    m = tuple(counts)
    beta = tuple(query.beta)
    if len(beta) != target.r:
        raise InvalidArgumentError(f"class {beta} must have {target.r} entries")
    if not J.in_window(beta, m):
        raise InsufficientTruncationError(
            f"query at beta={list(beta)} with {sum(m)} insertions lies outside "
            f"D={J.truncation.max_degree}, T={J.truncation.max_insertions}"
        )

    vdim = target.virtual_dimension(beta, len(query.insertions))
    degrees = [ring.degree_of(ring.basis_class(j)) for j in query.insertions] + [ring.degree_of(query.last_class)]
    insertion_degree = None
    warning = None
    if all(d is not None for d in degrees):
        insertion_degree = sum(degrees) // 2 + query.psi_power
        if insertion_degree != vdim:
            warning = f"insertions have degree {insertion_degree} but the virtual dimension is {vdim}; invariant vanishes"
            logger.warning("%s", warning)
            return InvariantResult(Fraction(0), query, vdim, insertion_degree, warning)

    coefficient = J.coefficient(beta, m).coeff(-query.psi_power - 2)
    value = multi_factorial(m) * ring.pairing(coefficient, query.last_class)
    return InvariantResult(value, query, vdim, insertion_degree, warning)


def extract_invariant(out: MirrorOutput, query: InvariantQuery) -> Fraction:
    return query_invariant(out, query).value


def p2_counts(dmax: int, D: Optional[int] = None, T: Optional[int] = None) -> List[Fraction]:
    """Degree-d rational curves in P^2 through 3d-1 points, d = 1..dmax."""
    if dmax < 1:
        raise InvalidArgumentError("dmax must be at least 1")
    D = dmax if D is None else D
    T = 3 * dmax - 1 if T is None else T
    if D < dmax or T < 3 * dmax - 1:
        raise InsufficientTruncationError(f"p2 counts through degree {dmax} need D >= {dmax} and T >= {3 * dmax - 1}")
    target = projective_target(2)
    point = target.ring.basis_class(2)
    flat = to_flat_coordinates(birkhoff(big_I(target, D, T, insertions=(2,))))
    counts = []
    for d in range(1, dmax + 1):
        query = InvariantQuery(beta=(d,), insertions=(2,) * (3 * d - 2), last_class=point)
        counts.append(extract_invariant(flat, query))
    logger.info("P2 counts: %s", [str(c) for c in counts])
    return counts


def quintic_one_point(dmax: int, flat: bool = True) -> List[Fraction]:
    """
    <H>_{0,1,d} of the quintic threefold for d = 1..dmax.

    With flat=False the mirror map is forced to the identity and J is read
    in the original coordinates.
    """
    if dmax < 1:
        raise InvalidArgumentError("dmax must be at least 1")
    if dmax >= 2:
        logger.info("quintic <H>_d for d >= 2 is not certified by an oracle")
    target = projective_target(4, twist=[5])
    hyperplane = target.ring.basis_class(1)
    out = birkhoff(big_I(target, dmax, 0, insertions=()))
    if flat:
        out = to_flat_coordinates(out)
    values = []
    for d in range(1, dmax + 1):
        if flat:
            query = InvariantQuery(beta=(d,), insertions=(), last_class=hyperplane)
            values.append(extract_invariant(out, query))
        else:
            coefficient = out.J.coefficient((d,), ()).coeff(-2)
            values.append(target.ring.pairing(coefficient, hyperplane))
    return values


def quintic_n1(D: int = 2) -> Fraction:
    """Lines on the quintic threefold."""
    if D < 2:
        raise InsufficientTruncationError("quintic line count needs D >= 2")
    return quintic_one_point(D)[0]
