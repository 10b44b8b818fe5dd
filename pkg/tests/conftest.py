"""Shared pytest wiring: the acceptance scorecard summary block."""

# filled by tests/test_acceptance.py, one line per criterion
scorecard_lines: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if scorecard_lines:
        terminalreporter.section("acceptance scorecard")
        for line in scorecard_lines:
            terminalreporter.write_line(line)
