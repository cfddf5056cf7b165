RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
