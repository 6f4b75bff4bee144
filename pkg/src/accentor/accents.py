"""Accent identifiers and the native/foreign split.

Accent codes are serialized as their two-letter strings in manifests,
on the command line, and inside checkpoints.  Embedding-table rows use
the fixed code order below, so AM is always row 0.
"""

from dataclasses import dataclass

ACCENT_CODES = ("AM", "AR", "BR", "HI", "KO", "MA", "SP", "VI")
NATIVE_CODES = frozenset({"AM", "BR"})


@dataclass(frozen=True)
class AccentId:
    """One of the eight supported accents."""

    code: str

    def __post_init__(self):
        if self.code not in ACCENT_CODES:
            raise ValueError(
                f"unknown accent code {self.code!r}; expected one of {', '.join(ACCENT_CODES)}"
            )

    @property
    def native_class(self) -> bool:
        return self.code in NATIVE_CODES

    @property
    def index(self) -> int:
        return ACCENT_CODES.index(self.code)

    def __str__(self) -> str:
        return self.code


def parse_accent(code: str) -> AccentId:
    """Parse a two-letter accent code, case-insensitively."""
    return AccentId(code.strip().upper())


def parse_accent_list(codes: str) -> list[AccentId]:
    """Parse a comma-separated accent list such as ``AM,HI,KO``."""
    items = [c for c in (piece.strip() for piece in codes.split(",")) if c]
    return [parse_accent(c) for c in items]
