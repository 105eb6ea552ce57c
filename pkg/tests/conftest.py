import sys


def pytest_terminal_summary(terminalreporter):
    # surface the acceptance PASS/FAIL lines in the run summary, where
    # capture cannot swallow them
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance checks")
        for line in lines:
            terminalreporter.write_line(line)
        passed = sum(l.startswith("PASS") for l in lines)
        terminalreporter.write_line(f"{passed}/{len(lines)} checks passed")
