import functools
import time

ACCEPTANCE = []


def criterion(n, title):
    """Run an acceptance check, print one pass/fail line and keep it for the summary.

    The wrapped function returns a short detail string on success."""
    def wrap(fn):
        @functools.wraps(fn)
        def run():
            t0 = time.perf_counter()
            try:
                detail = fn()
            except BaseException as exc:
                msg = str(exc).splitlines()[0] if str(exc) else ""
                line = f"criterion {n:>2} FAIL  {title}: {type(exc).__name__} {msg}"
                ACCEPTANCE.append((n, line))
                print(line)
                raise
            extra = f"; {detail}" if detail else ""
            line = f"criterion {n:>2} PASS  {title} ({time.perf_counter() - t0:.1f} s{extra})"
            ACCEPTANCE.append((n, line))
            print(line)
        return run
    return wrap


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
