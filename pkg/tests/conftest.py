import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from recoil.model import QuantizedModel

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

A, B, C, D = 0, 1, 2, 3


@pytest.fixture
def abc_model():
    """n=4, f = {A:8, B:6, C:2}."""
    return QuantizedModel.from_frequencies({A: 8, B: 6, C: 2}, 4)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_model(rng, n, alphabet):
    """Random model with ``alphabet`` symbols drawn from 0..255."""
    from recoil.model import quantize_model

    syms = rng.choice(256, size=alphabet, replace=False)
    counts = rng.integers(1, 1000, size=alphabet) ** 2
    return quantize_model(dict(zip(syms.tolist(), counts.tolist())), n)


def sample(rng, model, size):
    syms = np.array(model.symbols)
    p = np.array([model.freq(s) for s in syms], dtype=float)
    return rng.choice(syms, size=size, p=p / p.sum()).astype(np.uint8)


_VERDICTS: list[str] = []


@pytest.fixture
def verdict(capsys):
    """Print one pass/fail line for an acceptance criterion and remember it."""

    def emit(label: str, ok, detail: str) -> None:
        status = ok if isinstance(ok, str) else ("PASS" if ok else "FAIL")
        line = f"[acceptance] criterion {label}: {status} - {detail}"
        _VERDICTS.append(line)
        with capsys.disabled():
            print("\n" + line)

    return emit


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
