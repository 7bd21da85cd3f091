"""Collects one summary line per acceptance criterion for the terminal report."""

LINES = []


def record(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    LINES.append(line)
    print(line)
    return line
