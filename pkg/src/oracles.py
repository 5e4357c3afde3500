"""Independent classical computations the engine is checked against."""

import logging
from fractions import Fraction
from math import comb, factorial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import sympy
from sympy.polys.polyfuncs import symmetrize

from src.coh_ring import CohClass, CohRing, parse_rational, ring_from_table
from src.errors import ConfigurationError, InternalInconsistencyError, InvalidArgumentError
from src.models import OracleReport

logger = logging.getLogger(__name__)

SAMPLES_DIR = Path(__file__).resolve().parent.parent / "samples"
G25_TABLE = SAMPLES_DIR / "g25.ring.json"
G24_TABLE = SAMPLES_DIR / "g24.ring.json"

_x, _y = sympy.symbols("x y")


def wdvv_p2(dmax: int) -> OracleReport:
    """
    Kontsevich's recursion for rational plane curves through 3d-1 points.

    Args:
        dmax: largest degree

    Returns:
        OracleReport with N_1..N_dmax
    """
    if dmax < 1:
        raise InvalidArgumentError("dmax must be at least 1")
    N: Dict[int, int] = {1: 1}
    for d in range(2, dmax + 1):
        total = 0
        for d1 in range(1, d):
            d2 = d - d1
            total += N[d1] * N[d2] * (
                d1 ** 2 * d2 ** 2 * comb(3 * d - 4, 3 * d1 - 2)
                - d1 ** 3 * d2 * comb(3 * d - 4, 3 * d1 - 1)
            )
        N[d] = total
    values = [Fraction(N[d]) for d in range(1, dmax + 1)]
    logger.debug("WDVV counts through degree %d: %s", dmax, values)
    return OracleReport(
        name="wdvv_p2",
        inputs={"dmax": dmax},
        values=values,
        note="associativity recursion seeded by N_1 = 1",
    )


def hypergeom_quintic(dmax: int) -> Tuple[List[Fraction], List[Fraction]]:
    """
    Coefficients of 1 and H/z in the twisted small I-function of the quintic.

    I0_d = (5d)!/(d!)^5 and I1_d = I0_d * sum_{k=d+1}^{5d} 5/k, for d = 1..dmax.
    """
    if dmax < 1:
        raise InvalidArgumentError("dmax must be at least 1")
    i0, i1 = [], []
    for d in range(1, dmax + 1):
        lead = Fraction(factorial(5 * d), factorial(d) ** 5)
        harmonic = sum((Fraction(5, k) for k in range(d + 1, 5 * d + 1)), Fraction(0))
        i0.append(lead)
        i1.append(lead * harmonic)
    return i0, i1


def hypergeom_quintic_report(dmax: int) -> OracleReport:
    i0, i1 = hypergeom_quintic(dmax)
    return OracleReport(
        name="hypergeom_quintic",
        inputs={"dmax": dmax},
        values=i0,
        note="factorial ratios and harmonic sums, no ring arithmetic",
        columns={"I0": i0, "I1": i1},
    )


def load_schubert_ring(path: Optional[Union[str, Path]], default: Path) -> CohRing:
    """Loads a Grassmannian ring table; a missing file is a configuration problem."""
    table = Path(path) if path is not None else default
    if not table.is_file():
        raise ConfigurationError(f"Schubert ring table not found: {table}")
    return ring_from_table(table)


def sym_power_roots(k: int) -> List[sympy.Expr]:
    """Chern roots i*x + (k-i)*y of Sym^k of a rank-2 bundle with roots x, y."""
    return [i * _x + (k - i) * _y for i in range(k + 1)]


def chern_root_integral(
    ring: CohRing,
    factors: Sequence[sympy.Expr],
    order: Tuple[sympy.Symbol, sympy.Symbol] = (_x, _y),
) -> Fraction:
    """
    Integrates a symmetric polynomial in the Chern roots of the dual tautological subbundle.

    The product of `factors` is rewritten in the elementary symmetric
    functions x+y = sigma_1 and xy = sigma_{1,1}, evaluated in the Schubert
    basis of `ring` and integrated.
    """
    product = sympy.expand(sympy.Mul(*factors))
    symmetric, remainder, definitions = symmetrize(product, *order, formal=True)
    if sympy.simplify(remainder) != 0:
        raise InvalidArgumentError("Chern-root product is not symmetric in the two roots")
    images: Dict[sympy.Symbol, CohClass] = {}
    for symbol, elementary in definitions:
        degree = sympy.Poly(elementary, *order).total_degree()
        images[symbol] = ring.basis_class(ring.index_of("s1" if degree == 1 else "s11"))
    symbols = [s for s, _ in definitions]
    poly = sympy.Poly(symmetric, *symbols, domain="QQ") if symbols else sympy.Poly(symmetric, _x, domain="QQ")
    total = ring.zero()
    for monom, coeff in poly.terms():
        term = ring.scalar(parse_rational(coeff))
        for symbol, e in zip(poly.gens, monom):
            if e:
                term = ring.mul(term, ring.power(images[symbol], e))
        total = total + term
    return ring.integrate(total)


def _lines_on_hypersurface(name: str, k: int, ring: CohRing) -> OracleReport:
    roots = sym_power_roots(k)
    forward = chern_root_integral(ring, roots, (_x, _y))
    backward = chern_root_integral(ring, roots, (_y, _x))
    if forward != backward:
        raise InternalInconsistencyError(
            f"symmetric reduction depends on the variable order: {forward} vs {backward}"
        )
    logger.info("%s: %s", name, forward)
    return OracleReport(
        name=name,
        inputs={"ring": ring.name, "bundle": f"Sym^{k} S^*"},
        values=[forward],
        note="Euler class integrated in the Schubert basis, reduced in both variable orders",
    )


def schubert_quintic_lines(table: Optional[Union[str, Path]] = None) -> OracleReport:
    """Lines on a quintic threefold as the integral of e(Sym^5 S^*) over G(2,5)."""
    return _lines_on_hypersurface("schubert_quintic_lines", 5, load_schubert_ring(table, G25_TABLE))


def schubert_cubic_lines(table: Optional[Union[str, Path]] = None) -> OracleReport:
    """Lines on a cubic surface as the integral of e(Sym^3 S^*) over G(2,4)."""
    return _lines_on_hypersurface("schubert_cubic_lines", 3, load_schubert_ring(table, G24_TABLE))
