def pytest_terminal_summary(terminalreporter):
    # the acceptance module records one PASS/FAIL line per criterion it ran
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
