import sys


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    order = ["1", "2", "3", "4a", "4b", "5a", "5b", "6", "7", "8", "9", "10"]
    for key in order:
        if key in results:
            terminalreporter.write_line(results[key])
