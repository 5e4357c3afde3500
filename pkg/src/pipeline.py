"""Pipeline orchestrator: target loading, cached series computation and invariant queries."""

import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

from src.coh_ring import CohClass
from src.errors import InternalInconsistencyError, InvalidArgumentError
from src.ifunction import big_I, big_I_operator, small_I
from src.mirror import birkhoff, check_birkhoff_contract, query_invariant, to_flat_coordinates
from src.models import ChamberReport, InvariantQuery, InvariantResult, MirrorOutput, TargetModel
from src.output_serializer import OutputSerializer
from src.series_cache import SeriesCache
from src.target import ChamberValidator, TargetLoader

logger = logging.getLogger(__name__)


class MirrorPipeline:
    """Orchestrates target ingestion, I-function and mirror computation, and extraction."""

    def __init__(self, cache: Optional[SeriesCache] = None):
        """
        Initialize the pipeline with all components.

        Args:
            cache: on-disk cache for rendered series documents (None disables caching)
        """
        self.loader = TargetLoader()
        self.validator = ChamberValidator()
        self.serializer = OutputSerializer()
        self.cache = cache

    # -- targets --------------------------------------------------------

    def load_target(self, path: Union[str, Path]) -> TargetModel:
        return self.loader.load(path)

    def validate(self, path: Union[str, Path]) -> Tuple[str, ChamberReport]:
        """
        Validates only the GIT presentation of a target spec.

        Returns:
            (target name, ChamberReport); a failed check is reported, not raised
        """
        path = Path(path)
        document = self.loader.read_document(path)
        presentation = self.loader.presentation(document)
        report = self.validator.validate(presentation)
        return str(document.get("name", path.stem)), report

    def resolve_insertions(self, target: TargetModel, labels: Optional[Sequence[str]]) -> Tuple[int, ...]:
        """Basis indices for insertion labels; None selects the whole basis."""
        if labels is None:
            return tuple(range(target.ring.rank))
        indices = sorted({target.ring.index_of(label) for label in labels})
        return tuple(indices)

    def resolve_class(self, target: TargetModel, text: str) -> CohClass:
        """A basis label or a polynomial in the degree-2 generators."""
        ring = target.ring
        if text in ring.labels:
            return ring.basis_class(ring.index_of(text))
        return ring.class_from_expression(text)

    # -- cached computations ----------------------------------------------

    def _cached(self, target: TargetModel, command: str, D, T: int, insertions: Sequence[int], build) -> str:
        key = None
        if self.cache is not None:
            key = self.cache.key(target, command, D, T, insertions)
            hit = self.cache.get(key)
            if hit is not None:
                logger.info("%s for %s served from cache", command, target.name)
                return hit
        text = self.serializer.dumps(build())
        if self.cache is not None:
            self.cache.put(key, text)
        return text

    def ifun(self, target: TargetModel, kind: str, D, T: int, insertions: Optional[Sequence[int]] = None) -> str:
        """
        Computes the small or big I-function as a JSON document.

        Big mode builds the series by the shift rule and by the operator form
        and refuses to answer when they differ.
        """
        if kind not in ("small", "big"):
            raise InvalidArgumentError(f"unknown I-function kind {kind!r}")
        variables = self.resolve_insertions(target, None) if insertions is None else tuple(insertions)
        if kind == "small":
            variables, T = (), 0

        def build():
            if kind == "small":
                ifun = small_I(target, D)
                paths = [ifun.construction_path.value]
            else:
                ifun = big_I(target, D, T, variables)
                other = big_I_operator(target, D, T, variables)
                if not ifun.series.equals(other.series):
                    a, b = ifun.series.terms, other.series.terms
                    diff = sorted(k for k in set(a) | set(b) if a.get(k) != b.get(k))
                    raise InternalInconsistencyError(
                        f"shift rule and operator form disagree at {len(diff)} indices, first {diff[:1]}"
                    )
                paths = [ifun.construction_path.value, other.construction_path.value]
            document = self.serializer.series_to_document(ifun.series, target)
            document["kind"] = kind
            document["construction_paths"] = paths
            document["includes_euler_factor"] = ifun.includes_euler_factor
            return document

        return self._cached(target, f"ifun-{kind}", D, T, variables, build)

    def mirror_text(self, target: TargetModel, D, T: int, insertions: Optional[Sequence[int]] = None) -> str:
        variables = self.resolve_insertions(target, None) if insertions is None else tuple(insertions)

        def build():
            out = birkhoff(big_I(target, D, T, variables))
            problems = check_birkhoff_contract(out)
            if problems:
                raise InternalInconsistencyError(f"Birkhoff output violates its contract: {problems[0]}")
            if out.saturated:
                logger.warning("truncation D=%s, T=%d saturated while factoring %s", D, T, target.name)
            return self.serializer.mirror_to_document(out)

        return self._cached(target, "mirror", D, T, variables, build)

    def mirror(self, target: TargetModel, D, T: int, insertions: Optional[Sequence[int]] = None) -> MirrorOutput:
        text = self.mirror_text(target, D, T, insertions)
        return self.serializer.mirror_from_document(self.serializer.loads(text), target)

    def invariants(
        self,
        target: TargetModel,
        D,
        T: int,
        queries: Sequence[InvariantQuery],
        insertions: Optional[Sequence[int]] = None,
    ) -> List[InvariantResult]:
        """
        Answers invariant queries from one Birkhoff factorization.

        Without an explicit slice the insertion variables are the classes
        named by the queries.
        """
        if insertions is None:
            insertions = tuple(sorted({j for q in queries for j in q.insertions}))
        out = to_flat_coordinates(self.mirror(target, D, T, insertions))
        results = [query_invariant(out, q) for q in queries]
        for result in results:
            logger.info("invariant at beta=%s: %s", list(result.query.beta), result.value)
        return results
