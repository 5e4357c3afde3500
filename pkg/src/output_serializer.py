"""JSON documents for series, mirror outputs and reports."""

import json
from fractions import Fraction
from typing import Any, Dict, List, Mapping

from src.coh_ring import CohClass, format_rational, parse_rational
from src.errors import ConfigurationError
from src.laurent import ZLaurent
from src.models import ChamberReport, FactorStep, InvariantResult, MirrorOutput, TargetModel
from src.multiseries import MultiSeries, Truncation


def _key(values) -> str:
    return ",".join(str(v) for v in values)


def _unkey(text: str) -> tuple:
    return tuple(int(v) for v in text.split(",")) if text else ()


class OutputSerializer:
    """Serializes engine results to canonical JSON with rationals as strings."""

    def dumps(self, document: Mapping[str, Any]) -> str:
        """Sorted-key JSON; equal documents give equal bytes."""
        return json.dumps(document, indent=2, sort_keys=True)

    def loads(self, text: str) -> Dict[str, Any]:
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON document: {exc}")

    # -- classes and coefficients --------------------------------------

    def class_to_dict(self, value: CohClass) -> Dict[str, str]:
        labels = value.ring.labels
        return {labels[i]: format_rational(c) for i, c in enumerate(value.coeffs) if c}

    def class_from_dict(self, target: TargetModel, data: Mapping[str, Any]) -> CohClass:
        ring = target.ring
        coeffs = [Fraction(0)] * ring.rank
        for label, c in data.items():
            coeffs[ring.index_of(label)] = parse_rational(c)
        return CohClass(ring, coeffs)

    def laurent_to_dict(self, value: ZLaurent) -> Dict[str, Dict[str, str]]:
        return {str(k): self.class_to_dict(c) for k, c in value.items()}

    # -- series ---------------------------------------------------------

    def series_to_document(self, series: MultiSeries, target: TargetModel) -> Dict[str, Any]:
        """
        Converts a MultiSeries to a nested document.

        Args:
            series: series over the target's ring
            target: owning target, hashed into the document

        Returns:
            Dictionary keyed beta -> m -> z-exponent -> basis label -> rational
        """
        terms: Dict[str, Dict[str, Any]] = {}
        for (beta, m), value in series.items():
            terms.setdefault(_key(beta), {})[_key(m)] = self.laurent_to_dict(value)
        return {
            "target": target.name,
            "target_hash": target.spec_hash(),
            "truncation": {
                "D": format_rational(series.truncation.max_degree),
                "T": series.truncation.max_insertions,
            },
            "theta": [format_rational(t) for t in series.theta],
            "variables": [target.ring.labels[i] for i in series.variables],
            "saturated": series.saturated,
            "terms": terms,
        }

    def series_from_document(self, document: Mapping[str, Any], target: TargetModel) -> MultiSeries:
        """Rebuilds a MultiSeries; the document must belong to `target`."""
        if document.get("target_hash") != target.spec_hash():
            raise ConfigurationError(f"series document does not belong to target {target.name!r}")
        ring = target.ring
        trunc = document["truncation"]
        truncation = Truncation(parse_rational(trunc["D"]), int(trunc["T"]))
        variables = [ring.index_of(label) for label in document["variables"]]
        terms = {}
        for beta_key, by_m in document["terms"].items():
            for m_key, by_z in by_m.items():
                value = ZLaurent(
                    ring, {int(k): self.class_from_dict(target, c) for k, c in by_z.items()}
                )
                terms[(_unkey(beta_key), _unkey(m_key))] = value
        return MultiSeries(
            ring, target.theta, variables, truncation, terms, bool(document.get("saturated", False))
        )

    # -- mirror outputs -------------------------------------------------

    def mirror_to_document(self, out: MirrorOutput) -> Dict[str, Any]:
        document = {
            "target": out.target.name,
            "target_hash": out.target.spec_hash(),
            "flat": out.flat,
            "saturated": out.saturated,
            "tau": self.series_to_document(out.tau, out.target),
            "J": self.series_to_document(out.J, out.target),
            "factor_log": [step.to_dict() for step in out.factor_log],
        }
        if out.target.is_twisted:
            document["ambient_J"] = self.series_to_document(out.ambient_J, out.target)
        return document

    def mirror_from_document(self, document: Mapping[str, Any], target: TargetModel) -> MirrorOutput:
        J = self.series_from_document(document["J"], target)
        ambient = document.get("ambient_J")
        return MirrorOutput(
            target=target,
            tau=self.series_from_document(document["tau"], target),
            J=J,
            ambient_J=self.series_from_document(ambient, target) if ambient is not None else J,
            factor_log=[
                FactorStep(tuple(s["beta"]), tuple(s["m"]), list(s["cleared"]))
                for s in document.get("factor_log", [])
            ],
            flat=bool(document.get("flat", False)),
            saturated=bool(document.get("saturated", False)),
        )

    # -- reports --------------------------------------------------------

    def chamber_to_document(self, target_name: str, report: ChamberReport) -> Dict[str, Any]:
        return {"target": target_name, **report.to_dict()}

    def invariants_to_document(self, target: TargetModel, results: List[InvariantResult]) -> Dict[str, Any]:
        return {
            "target": target.name,
            "target_hash": target.spec_hash(),
            "invariants": [r.to_dict() for r in results],
        }
