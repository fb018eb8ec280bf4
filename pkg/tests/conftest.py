"""Shared pytest wiring: a visible per-criterion summary for the acceptance gate."""

ACCEPTANCE_RESULTS: list[tuple[int, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria", sep="-")
    for number, status, title in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")
