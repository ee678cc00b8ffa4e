"""Reading samples from text: a JSON array or one number per line."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import List, Union

from .errors import SampleFormatError
from .mixture import Sample


def parse_sample(text: str) -> Sample:
    """Parse sample text.

    A leading ``[`` selects JSON; otherwise each non-blank line holds one
    number.  Lines starting with ``#`` are ignored.
    """
    stripped = text.strip()
    if not stripped:
        raise SampleFormatError("sample is empty")
    if stripped.startswith("["):
        try:
            raw = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise SampleFormatError(f"invalid JSON sample: {exc}") from None
        if not isinstance(raw, list) or any(
            isinstance(v, bool) or not isinstance(v, (int, float)) for v in raw
        ):
            raise SampleFormatError("JSON sample must be a flat array of numbers")
        values = [float(v) for v in raw]
    else:
        values: List[float] = []
        for lineno, line in enumerate(stripped.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise SampleFormatError(f"line {lineno}: not a number: {line!r}") from None
    if not values:
        raise SampleFormatError("sample contains no numbers")
    bad = [v for v in values if not math.isfinite(v)]
    if bad:
        raise SampleFormatError(f"sample contains non-finite values: {bad[:3]}")
    return Sample(values)


def load_sample(path: Union[str, Path]) -> Sample:
    """Read and parse a sample file; I/O errors propagate as ``OSError``."""
    return parse_sample(Path(path).read_text())


def format_sample(sample: Sample) -> str:
    """One number per line, shortest round-trip repr."""
    return "".join(f"{v!r}\n" for v in sample)
