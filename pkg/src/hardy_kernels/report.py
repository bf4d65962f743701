"""Audit report record shared by every checker."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

DISCLAIMER = (
    "A finite, refinement-stable constant is numerical evidence that an estimate "
    "holds on the sampled range; it is not a proof."
)


def _clean(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats into JSON-friendly values."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "tolist"):
        return _clean(value.tolist())
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


@dataclass
class AuditReport:
    """Outcome of one empirical check.

    Attributes
    ----------
    estimate_id : str
        Short name of the inequality or identity under test.
    params : dict
        Model and coupling parameters.
    grid : dict
        Description of the discretisation.
    constants : dict
        Empirical constants, typically ``c_lower`` and ``c_upper``.
    residuals : dict
        Residual statistics.
    verdict : str
        One of ``PASS``, ``FAIL``, ``INCONCLUSIVE``.
    refinement_stable : bool
        Whether the constants moved less than the declared fraction under refinement.
    notes : list of str
        Free-form diagnostics.
    """

    estimate_id: str
    params: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    verdict: str = INCONCLUSIVE
    refinement_stable: bool = False
    notes: list = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.verdict == PASS and not self.refinement_stable:
            self.verdict = INCONCLUSIVE
            self.notes.append("downgraded: refinement stability not established")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        out = _clean(asdict(self))
        out["disclaimer"] = DISCLAIMER
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "AuditReport":
        data = {k: v for k, v in data.items() if k != "disclaimer"}
        return cls(**data)


def verdict_from(ok: bool, stable: bool = True) -> tuple[str, bool]:
    """Map a boolean outcome and a stability flag to ``(verdict, stable)``."""
    return (PASS if ok else FAIL), bool(stable)
