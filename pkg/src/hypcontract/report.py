"""Result records shared by the path machinery, the checks and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

PASS = "pass"
FAIL = "fail"

JSON_FIELDS = ("check", "model", "n", "max_ratio", "witness_z", "witness_w", "tolerance", "verdict", "seed")


def _point(z):
    if z is None:
        return None
    z = complex(z)
    return [z.real, z.imag]


@dataclass
class VerificationReport:
    """Outcome of one check on one model.

    ``max_ratio`` is the largest observed ratio of the two sides of the
    inequality (already divided by ``bound`` for Lipschitz-type checks whose
    constant is not 1, unless the check documents otherwise); the witnesses
    are the points where it occurred.
    """

    check: str
    model: str
    n: int
    max_ratio: float
    witness_z: Optional[complex]
    witness_w: Optional[complex]
    tolerance: float
    verdict: str
    seed: Optional[int] = None
    min_ratio: float = float("nan")
    bound: float = 1.0
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "model": self.model,
            "n": int(self.n),
            "max_ratio": float(self.max_ratio),
            "witness_z": _point(self.witness_z),
            "witness_w": _point(self.witness_w),
            "tolerance": float(self.tolerance),
            "verdict": self.verdict,
            "seed": None if self.seed is None else int(self.seed),
        }


def verdict(ok) -> str:
    return PASS if bool(np.all(ok)) else FAIL
