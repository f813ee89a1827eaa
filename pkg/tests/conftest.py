"""Shared pytest configuration.

Acceptance tests tag themselves with ``record_property("criterion", ...)``;
the terminal summary prints one PASS/FAIL line per tagged test.
"""

from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                rows.append((props["criterion"], outcome, props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in sorted(rows, key=lambda r: _order(r[0])):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}  {detail}".rstrip())


def _order(name):
    head = name.split()[0].rstrip(".")
    num = "".join(ch for ch in head if ch.isdigit())
    return (int(num) if num else 99, head)
