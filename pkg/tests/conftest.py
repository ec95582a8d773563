import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bulletinkit.geometry import BBox, PageModel, RulingLine, TextRun

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def run(x0, y0, x1, y1, text="w"):
    return TextRun(BBox(x0, y0, x1, y1), text)


def page(runs=(), lines=(), width=612.0, height=792.0, index=0, source="pdf"):
    return PageModel(index, width, height, tuple(runs), tuple(lines), source)


def full_grid(xs, ys):
    """Ruling lines for a complete grid over the given coordinates."""
    lines = [RulingLine("horizontal", y, xs[0], xs[-1]) for y in ys]
    lines += [RulingLine("vertical", x, ys[0], ys[-1]) for x in xs]
    return lines


def seeds(n, seed):
    rng = np.random.default_rng(seed)
    return [int(s) for s in rng.integers(0, 2**63 - 1, size=n)]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
