"""Core data models for the quasimap mirror engine."""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple
import hashlib
import json

from src.coh_ring import CohClass, CohRing, format_rational, parse_rational
from src.multiseries import MultiSeries

if TYPE_CHECKING:
    from src.target import DualCone

EffectiveClass = Tuple[int, ...]


def beta_deg(beta: Sequence[int], eta: Sequence[Any]) -> Fraction:
    """Lattice pairing <beta, eta> of a curve class with a character."""
    if len(beta) != len(eta):
        raise ValueError(f"class {tuple(beta)} and character {tuple(eta)} have different ranks")
    return sum((b * parse_rational(e) for b, e in zip(beta, eta)), Fraction(0))


class SeriesKind(Enum):
    """Small I carries no insertions, big I carries the slice variables."""
    SMALL = "small"
    BIG = "big"


class ConstructionPath(Enum):
    """How a big I-function was built."""
    SHIFT_RULE = "shift-rule"
    OPERATOR_FORM = "operator-form"


@dataclass(frozen=True)
class GitPresentation:
    """W = C^N with G = (C*)^r acting by the rows of `charges`, stability `theta`."""
    charges: Tuple[Tuple[int, ...], ...]
    theta: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "charges", tuple(tuple(int(c) for c in row) for row in self.charges))
        object.__setattr__(self, "theta", tuple(parse_rational(t) for t in self.theta))

    @property
    def N(self) -> int:
        return len(self.charges)

    @property
    def r(self) -> int:
        return len(self.theta)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary representation."""
        return {
            "charges": [list(row) for row in self.charges],
            "theta": [format_rational(t) for t in self.theta],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GitPresentation":
        """Create GitPresentation from dictionary."""
        return cls(charges=data.get("charges", []), theta=data.get("theta", []))


@dataclass(frozen=True)
class TwistData:
    """E = sum of line bundles with characters `weights`."""
    weights: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(tuple(int(w) for w in row) for row in self.weights))

    @property
    def rank(self) -> int:
        return len(self.weights)

    def to_dict(self) -> Dict[str, Any]:
        return {"weights": [list(w) for w in self.weights]}


@dataclass
class ChamberReport:
    """Result of validating a GIT presentation."""
    is_valid: bool
    error_message: Optional[str] = None
    error_kind: Optional[str] = None
    anticones: List[Tuple[int, ...]] = field(default_factory=list)
    dual_generators: List[Tuple[Fraction, ...]] = field(default_factory=list)
    chamber_rays: List[Tuple[int, ...]] = field(default_factory=list)
    chamber_dimension: int = 0
    offending_subset: Optional[Tuple[int, ...]] = None

    @property
    def full_dimensional(self) -> bool:
        if not self.is_valid or not self.dual_generators:
            return False
        return self.chamber_dimension == len(self.dual_generators[0])

    @cached_property
    def dual_cone(self) -> "DualCone":
        """Membership test for the cone spanned by `dual_generators`, built on first use."""
        from src.target import DualCone

        return DualCone(self.dual_generators)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        return {
            "is_valid": self.is_valid,
            "error_kind": self.error_kind,
            "error_message": self.error_message,
            "anticones": [list(a) for a in self.anticones],
            "dual_generators": [[format_rational(x) for x in u] for u in self.dual_generators],
            "chamber_rays": [list(ray) for ray in self.chamber_rays],
            "chamber_dimension": self.chamber_dimension,
            "offending_subset": list(self.offending_subset) if self.offending_subset is not None else None,
        }


@dataclass
class ConvexityReport:
    """Result of checking <beta, eps_a> >= 0 over the enumerated classes."""
    is_valid: bool
    error_message: Optional[str] = None
    violations: List[Tuple[EffectiveClass, int]] = field(default_factory=list)
    classes_checked: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_valid": self.is_valid,
            "error_message": self.error_message,
            "violations": [{"beta": list(b), "summand": a} for b, a in self.violations],
            "classes_checked": self.classes_checked,
        }


@dataclass
class TargetModel:
    """
    A validated GIT target with its cohomology ring.

    `generators` maps each degree-2 ring label to the character whose first
    Chern class it is; `kirwan` holds kappa(e_a) for the standard characters;
    `insertion_lifts[i]` is a polynomial in generator labels reducing to basis
    element i, or None when the basis element has no lift.
    """
    name: str
    presentation: GitPresentation
    ring: CohRing
    chamber: ChamberReport
    generators: Dict[str, Tuple[Fraction, ...]]
    kirwan: List[CohClass]
    divisor_classes: List[CohClass]
    twist: Optional[TwistData] = None
    insertion_lifts: List[Optional[str]] = field(default_factory=list)

    @property
    def r(self) -> int:
        return self.presentation.r

    @property
    def theta(self) -> Tuple[Fraction, ...]:
        return self.presentation.theta

    @property
    def is_twisted(self) -> bool:
        return self.twist is not None and self.twist.rank > 0

    def character_class(self, eta: Sequence[Any]) -> CohClass:
        """kappa(L_eta) as a degree-2 class."""
        out = self.ring.zero()
        for coeff, cls in zip(eta, self.kirwan):
            out = out + cls * parse_rational(coeff)
        return out

    def twist_classes(self) -> List[CohClass]:
        """c1(E_a) for every summand."""
        if not self.is_twisted:
            return []
        return [self.character_class(w) for w in self.twist.weights]

    def euler_class(self) -> CohClass:
        out = self.ring.unit()
        for cls in self.twist_classes():
            out = out * cls
        return out

    def c1_pairing(self, beta: Sequence[int]) -> Fraction:
        """<beta, c1(T_X)> - <beta, c1(E)>."""
        total = sum((beta_deg(beta, row) for row in self.presentation.charges), Fraction(0))
        if self.is_twisted:
            total -= sum((beta_deg(beta, w) for w in self.twist.weights), Fraction(0))
        return total

    def virtual_dimension(self, beta: Sequence[int], k: int) -> Fraction:
        """Expected dimension of genus-0 maps with k insertions plus the descendant point."""
        rank_e = self.twist.rank if self.is_twisted else 0
        return self.ring.dimension - rank_e + self.c1_pairing(beta) + k - 2

    def to_document(self) -> Dict[str, Any]:
        """Resolved, canonical description used for hashing and reports."""
        return {
            "name": self.name,
            "presentation": self.presentation.to_dict(),
            "ring": self.ring.to_table_document(),
            "generators": {
                label: [format_rational(x) for x in eta] for label, eta in sorted(self.generators.items())
            },
            "divisor_classes": [[format_rational(c) for c in d.coeffs] for d in self.divisor_classes],
            "twist": self.twist.to_dict() if self.twist is not None else None,
            "insertion_lifts": list(self.insertion_lifts),
        }

    def spec_hash(self) -> str:
        canonical = json.dumps(self.to_document(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class IFunction:
    """A small or big I-function together with how it was produced."""
    target: TargetModel
    kind: SeriesKind
    series: MultiSeries
    construction_path: ConstructionPath = ConstructionPath.SHIFT_RULE
    includes_euler_factor: bool = False

    @property
    def slice(self) -> Tuple[int, ...]:
        return self.series.variables


@dataclass
class FactorStep:
    """One elimination order of the Birkhoff factorization."""
    beta: EffectiveClass
    m: Tuple[int, ...]
    cleared_exponents: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"beta": list(self.beta), "m": list(self.m), "cleared": list(self.cleared_exponents)}


@dataclass
class MirrorOutput:
    """
    Mirror map and J-function from a Birkhoff factorization.

    `tau` has z-free values (stored at z^0). For twisted targets `J` carries
    the Euler factor while `ambient_J` does not. `flat` marks output already
    re-expressed in flat coordinates.
    """
    target: TargetModel
    tau: MultiSeries
    J: MultiSeries
    ambient_J: MultiSeries
    factor_log: List[FactorStep] = field(default_factory=list)
    flat: bool = False
    saturated: bool = False

    @property
    def slice(self) -> Tuple[int, ...]:
        return self.J.variables


@dataclass(frozen=True)
class InvariantQuery:
    """<gamma_{j1}, ..., gamma_{jk}, last_class psi^a>_{0,k+1,beta}."""
    beta: EffectiveClass
    insertions: Tuple[int, ...]
    last_class: CohClass
    psi_power: int = 0

    def __post_init__(self):
        object.__setattr__(self, "beta", tuple(self.beta))
        object.__setattr__(self, "insertions", tuple(sorted(self.insertions)))
        if self.psi_power < 0:
            raise ValueError("psi power must be nonnegative")


@dataclass
class InvariantResult:
    """An extracted invariant with its dimension bookkeeping."""
    value: Fraction
    query: InvariantQuery
    virtual_dimension: Fraction
    insertion_degree: Optional[int]
    warning: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": list(self.query.beta),
            "insertions": list(self.query.insertions),
            "last_class": [format_rational(c) for c in self.query.last_class.coeffs],
            "psi_power": self.query.psi_power,
            "value": format_rational(self.value),
            "virtual_dimension": format_rational(self.virtual_dimension),
            "warning": self.warning,
        }


@dataclass
class OracleReport:
    """Values produced by an independent classical computation; `columns` holds named side outputs."""
    name: str
    inputs: Dict[str, Any]
    values: List[Fraction]
    note: str = ""
    columns: Dict[str, List[Fraction]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "inputs": self.inputs,
            "values": [format_rational(v) for v in self.values],
            "columns": {k: [format_rational(v) for v in vals] for k, vals in sorted(self.columns.items())},
            "note": self.note,
        }


@dataclass
class CheckResult:
    """One row of the verification report."""
    check: str
    engine_value: Any
    oracle_value: Any
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "engine_value": _jsonable(self.engine_value),
            "oracle_value": _jsonable(self.oracle_value),
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    """Result of a verification suite."""
    suite: str
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "pass": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class RunConfig:
    """Settings for one CLI invocation."""
    command: str
    target_path: Optional[str] = None
    max_degree: int = 2
    max_insertions: int = 2
    insertions: Optional[List[str]] = None
    cache_dir: Optional[str] = None
    use_cache: bool = True
    output_format: str = "text"
    verbose: bool = False
    kind: str = "small"
    suite: str = "all"
    query_beta: Optional[List[int]] = None
    query_insert: List[str] = field(default_factory=list)
    query_last: Optional[str] = None
    query_psi: int = 0

    def __post_init__(self):
        if self.max_degree < 0 or self.max_insertions < 0:
            raise ValueError("truncation bounds -D and -T must be nonnegative")
        if self.output_format not in ("json", "text"):
            raise ValueError(f"unknown output format {self.output_format!r}")


def _jsonable(value: Any) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    return value
