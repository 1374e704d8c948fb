"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

from __future__ import annotations

RESULTS: dict[str, tuple[bool, str]] = {}


def record(criterion: str, ok: bool, detail: str) -> bool:
    RESULTS[criterion] = (bool(ok), detail)
    print(f"{'PASS' if ok else 'FAIL'} {criterion}: {detail}")
    return ok
