from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class ModeIndex:
    """Angular mode: dimension ``d``, degree ``l`` and Bessel order ``nu = l + d/2 - 1``."""

    d: int
    l: int

    def __post_init__(self):
        if self.d < 3 or self.d % 2 == 0:
            raise DomainError(f"dimension must be odd and >= 3, got {self.d}")
        if self.l < 0:
            raise DomainError(f"degree must be >= 0, got {self.l}")

    @property
    def nu(self) -> float:
        return self.l + self.d / 2 - 1


def order_only(nu) -> float:
    """Accept either a ModeIndex or a bare order; return the order."""
    return nu.nu if isinstance(nu, ModeIndex) else float(nu)
