"""Shared test configuration.

Property tests run a fixed derandomized profile so the suite is
reproducible in CI, and the acceptance module gets its own summary
section: one PASS/FAIL line per criterion at the end of the run.
"""
import hypothesis

hypothesis.settings.register_profile(
    "ci", derandomize=True, deadline=None, max_examples=50
)
hypothesis.settings.load_profile("ci")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = []
    for status, verdict in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(status, []):
            if status == "passed" and getattr(rep, "when", "call") != "call":
                continue
            if "test_acceptance.py" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                lines.append((name, verdict))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(set(lines)):
            terminalreporter.write_line(f"{verdict}  {name}")
