import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+?)(?:\[|$)")
_results: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.failed or (report.when == "setup" and report.skipped):
        entry = _results.setdefault(int(m.group(1)), {"name": m.group(2), "ok": True, "seconds": 0.0})
        entry["ok"] &= report.passed
        entry["seconds"] += report.duration


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_results):
        r = _results[num]
        status = "PASS" if r["ok"] else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d} {status}  {r['name']} ({r['seconds']:.1f} s)")
