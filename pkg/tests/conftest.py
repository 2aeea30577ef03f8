"""Shared pytest wiring: prints the acceptance checklist after the run."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    try:
        from test_acceptance import ACCEPTANCE_LOG
    except ImportError:
        return
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in ACCEPTANCE_LOG:
        terminalreporter.write_line(line)
