import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
