"""Global numeric policy: every tolerance used by the library lives here.

Structural checks (projector algebra, completeness, scheme validation) are
held to ``structural_tol``; quantities that are exact in real arithmetic
(basis-state overlaps, closed-form rational values) to ``exact_tol``.
Truncated-basis constructions must keep the norm outside the truncation
below ``tail_tol`` or refuse to proceed.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict


class TruncationError(RuntimeError):
    """A truncated-basis construction lost more norm than the policy allows."""


@dataclass(frozen=True)
class NumericPolicy:
    structural_tol: float = 1e-10
    exact_tol: float = 1e-12
    zero_probability: float = 1e-14
    tail_tol: float = 1e-8

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT_POLICY = NumericPolicy()
