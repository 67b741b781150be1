"""Run counters, reported to stderr as ``key<TAB>count`` lines."""
from __future__ import annotations

import sys
from collections import Counter
from typing import IO


class Diagnostics(Counter):
    """Counter with the reporting convention used by every subcommand."""

    def incr(self, key: str, by: int = 1) -> None:
        self[key] += by

    def report(self, stream: IO[str] | None = None) -> None:
        out = stream if stream is not None else sys.stderr
        for key in sorted(self):
            out.write(f"{key}\t{self[key]}\n")
