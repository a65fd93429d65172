"""CSV parsing and number formatting shared by the file interfaces.

Dialect: comma separator, ``.`` decimal point, ``\\n`` line endings, UTF-8,
one required header row; lines starting with ``#`` are comments and are
skipped everywhere.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterator, Sequence

from .errors import DomainError


def format_sci9(x: float) -> str:
    """Scientific notation with a 9-decimal mantissa and compact exponent.

    Examples: ``0.01024 -> '1.024000000e-2'``, ``0.0 -> '0.000000000e0'``.
    """
    mantissa, exponent = f"{float(x):.9e}".split("e")
    return f"{mantissa}e{int(exponent)}"


def format_g6(x: float) -> str:
    """Shortest representation with up to 6 significant digits."""
    return f"{float(x):.6g}"


def format_g9(x: float) -> str:
    """Shortest representation with up to 9 significant digits."""
    return f"{float(x):.9g}"


def iter_data_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, stripped line), skipping comments/blanks."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def read_columns_csv(
    path: str | Path, columns: Sequence[str]
) -> tuple[list[float], ...]:
    """Read a CSV with an exact header into per-column float lists.

    Raises :class:`DomainError` naming the first offending line on a missing
    or wrong header, a row of the wrong width, or an unparsable number.
    """
    lines = iter_data_lines(path)
    try:
        header_lineno, header = next(lines)
    except StopIteration:
        raise DomainError(f"{path}: line 1: empty file, expected header "
                          f"'{','.join(columns)}'") from None
    fields = [f.strip() for f in header.split(",")]
    if fields != list(columns):
        raise DomainError(
            f"{path}: line {header_lineno}: expected header "
            f"'{','.join(columns)}', got '{header}'"
        )
    out: tuple[list[float], ...] = tuple([] for _ in columns)
    for lineno, line in lines:
        parts = line.split(",")
        if len(parts) != len(columns):
            raise DomainError(
                f"{path}: line {lineno}: expected {len(columns)} fields, got {len(parts)}"
            )
        for col, part in zip(out, parts):
            try:
                col.append(float(part))
            except ValueError:
                raise DomainError(
                    f"{path}: line {lineno}: not a number: {part.strip()!r}"
                ) from None
    return out
