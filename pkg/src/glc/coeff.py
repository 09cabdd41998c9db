"""Dilation coefficients: the free abelian group on named generators.

Elements are finite products of generator powers, written multiplicatively
(`a^1*b^-2`); the identity is the empty product, printed "1". Keeping the
group free and symbolic makes compositions like ``eps * mu`` exact, which
the move catalog relies on (the composition move multiplies coefficients,
ext2 matches the identity element only).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

_FACTOR_RE = re.compile(r"^([A-Za-z_][A-Za-z_0-9]*)(?:\^(-?\d+))?$")


@dataclass(frozen=True)
class Coefficient:
    """An element of the abelian group Γ, normalized (no zero exponents).

    ``shadow`` is an optional positive rational used for display only; it
    takes no part in equality, hashing or arithmetic.
    """

    factors: tuple[tuple[str, int], ...] = ()
    shadow: Fraction | None = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        for sym, exp in self.factors:
            if exp == 0:
                raise ValueError(f"zero exponent for generator {sym!r}")
        syms = [s for s, _ in self.factors]
        if syms != sorted(set(syms)):
            raise ValueError("factors must be sorted and distinct")
        if self.shadow is not None and self.shadow <= 0:
            raise ValueError("shadow value must be positive")

    @staticmethod
    def one() -> "Coefficient":
        return Coefficient()

    @staticmethod
    def of(*powers: tuple[str, int] | str) -> "Coefficient":
        """Build from (symbol, exponent) pairs; bare strings mean exponent 1."""
        exps: dict[str, int] = {}
        for p in powers:
            sym, exp = (p, 1) if isinstance(p, str) else p
            exps[sym] = exps.get(sym, 0) + exp
        return Coefficient(tuple(sorted((s, e) for s, e in exps.items() if e != 0)))

    @staticmethod
    def parse(text: str) -> "Coefficient":
        """Parse the .glc coefficient syntax: ``1`` or ``sym^int`` factors joined by ``*``."""
        text = text.strip()
        if text == "1":
            return Coefficient()
        exps: dict[str, int] = {}
        for part in text.split("*"):
            m = _FACTOR_RE.match(part.strip())
            if not m:
                raise ValueError(f"bad coefficient factor: {part!r}")
            sym, exp = m.group(1), int(m.group(2) or "1")
            exps[sym] = exps.get(sym, 0) + exp
        return Coefficient(tuple(sorted((s, e) for s, e in exps.items() if e != 0)))

    @property
    def exponents(self) -> dict[str, int]:
        return dict(self.factors)

    def is_identity(self) -> bool:
        return not self.factors

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        exps = dict(self.factors)
        for sym, exp in other.factors:
            exps[sym] = exps.get(sym, 0) + exp
        shadow = None
        if self.shadow is not None and other.shadow is not None:
            shadow = self.shadow * other.shadow
        return Coefficient(
            tuple(sorted((s, e) for s, e in exps.items() if e != 0)), shadow
        )

    def inverse(self) -> "Coefficient":
        shadow = None if self.shadow is None else 1 / self.shadow
        return Coefficient(tuple((s, -e) for s, e in self.factors), shadow)

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "*".join(f"{sym}^{exp}" for sym, exp in self.factors)

    def __repr__(self) -> str:
        return f"Coefficient({self})"


ONE = Coefficient.one()
