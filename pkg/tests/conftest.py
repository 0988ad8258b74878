"""Collects acceptance results and prints one PASS/FAIL line per criterion at the end of the run."""
from collections import defaultdict

ACCEPTANCE_TITLES = {
    1: "partition of unity",
    2: "semigroup algebra",
    3: "curvature",
    4: "Littman decay",
    5: "L^p - L^p' decay",
    6: "Besov estimate",
    7: "per-shell bounds",
    8: "Riesz-Thorin bound",
    9: "scaling identity",
    10: "solver",
    11: "determinism",
}

_results = defaultdict(list)


def record(criterion: int, part: str, passed: bool, detail: str, counts: bool = True) -> None:
    """Register one measured part; parts with ``counts=False`` are shown but do not set the status."""
    _results[criterion].append((part, bool(passed), detail, counts))


def pytest_terminal_summary(terminalreporter):
    if not any(k in _results for k in ACCEPTANCE_TITLES):
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k, title in ACCEPTANCE_TITLES.items():
        parts = _results.get(k)
        if not parts:
            tr.write_line(f"criterion {k:2d} NOT RUN  {title}")
            continue
        status = "PASS" if all(p for _, p, _, c in parts if c) else "FAIL"
        detail = "; ".join(
            f"{name}: {('ok' if p else 'FAIL') if c else 'note'} ({d})" for name, p, d, c in parts
        )
        tr.write_line(f"criterion {k:2d} {status}  {title}  |  {detail}")
