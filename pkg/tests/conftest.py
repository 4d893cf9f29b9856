import math

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def brute_attention(q, k, v, allowed=None, scale=None):
    """Explicit-loop attention; ``allowed(i, j)`` restricts the keys of query ``i``."""
    n_q, d = len(q), len(q[0])
    scale = 1.0 / math.sqrt(d) if scale is None else scale
    out = np.zeros((n_q, len(v[0])))
    for i in range(n_q):
        keys = [j for j in range(len(k)) if allowed is None or allowed(i, j)]
        scores = [scale * sum(q[i][c] * k[j][c] for c in range(d)) for j in keys]
        top = max(scores)
        weights = [math.exp(s - top) for s in scores]
        total = sum(weights)
        for j, wt in zip(keys, weights):
            for c in range(len(v[0])):
                out[i, c] += wt / total * v[j][c]
    return out


def brute_matmul(a, b):
    out = np.zeros((len(a), len(b[0])))
    for i in range(len(a)):
        for j in range(len(b[0])):
            s = 0.0
            for k in range(len(b)):
                s += a[i][k] * b[k][j]
            out[i, j] = s
    return out


# acceptance results, folded into one line per criterion at the end of the run
ACCEPTANCE = {}


@pytest.fixture
def record():
    def _record(criterion, name, ok, detail=""):
        ACCEPTANCE.setdefault(criterion, []).append((name, bool(ok), detail))
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        results = ACCEPTANCE[criterion]
        failed = [f"{name} ({detail})" if detail else name for name, ok, detail in results if not ok]
        status = "FAIL" if failed else "PASS"
        line = f"criterion {criterion}: {status} {len(results) - len(failed)}/{len(results)}"
        if failed:
            line += " failing: " + "; ".join(failed)
        terminalreporter.write_line(line)
