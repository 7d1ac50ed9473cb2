"""Data-driven model coefficients and their JSON form."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

from lacflow.exceptions import CoefficientsError
from lacflow.types import CoefficientsDict

N_LAC_COEFFS = 5


@dataclass(frozen=True)
class ModelCoefficients:
    """K_D for the DC family and K_A1..K_A5 for the LAC family.

    All ones reproduces the plain DC and LAC models.
    """

    k_d: float = 1.0
    k_a: tuple[float, ...] = (1.0,) * N_LAC_COEFFS
    trained_on: tuple[str, ...] = ()
    fit_stats_ref: Optional[str] = None
    provenance: dict[str, Any] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "k_a", tuple(float(k) for k in self.k_a))
        object.__setattr__(self, "trained_on", tuple(self.trained_on))
        if len(self.k_a) != N_LAC_COEFFS:
            raise CoefficientsError(f"expected {N_LAC_COEFFS} LAC coefficients, got {len(self.k_a)}")
        if not (math.isfinite(self.k_d) and self.k_d > 0):
            raise CoefficientsError(f"k_d must be a positive finite number, got {self.k_d}")
        if not all(math.isfinite(k) for k in self.k_a):
            raise CoefficientsError("LAC coefficients must be finite")

    @classmethod
    def identity(cls) -> "ModelCoefficients":
        return cls()

    @property
    def is_identity(self) -> bool:
        return self.k_d == 1.0 and all(k == 1.0 for k in self.k_a)

    def to_dict(self) -> CoefficientsDict:
        return {
            "k_d": self.k_d,
            "k_a": list(self.k_a),
            "trained_on": list(self.trained_on),
            "fit_stats_ref": self.fit_stats_ref,
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_dict(cls, payload: Any) -> "ModelCoefficients":
        if not isinstance(payload, dict):
            raise CoefficientsError("coefficients document must be a JSON object")
        try:
            return cls(
                k_d=float(payload["k_d"]),
                k_a=tuple(float(k) for k in payload["k_a"]),
                trained_on=tuple(str(c) for c in payload.get("trained_on", ())),
                fit_stats_ref=payload.get("fit_stats_ref"),
                provenance=dict(payload.get("provenance") or {}),
            )
        except KeyError as exc:
            raise CoefficientsError(f"coefficients document missing {exc.args[0]!r}") from exc
        except (TypeError, ValueError) as exc:
            raise CoefficientsError(f"invalid coefficient value: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ModelCoefficients":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CoefficientsError(f"coefficients file is not valid JSON: {exc.msg}") from exc
        return cls.from_dict(payload)
