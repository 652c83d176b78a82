"""Shared pass/fail log for the acceptance criteria."""

RESULTS = []


def record(number, title, ok, detail):
    line = f"AC-{number:02d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)
    return ok
