import numpy as np
import pytest
import scipy.optimize

from stgcs.src.bench_io import InstanceFile
from stgcs.src.gcsprog import SolveParams, VelocityBounds
from stgcs.src.geom import HPoly, State
from stgcs.src.maps import get_map
from stgcs.src.stgraph import build_graph


def box(lo, hi) -> HPoly:
    return HPoly.from_box(lo, hi)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


@pytest.fixture
def unit_box():
    return box([0, 0], [1, 1])


@pytest.fixture
def empty_graph():
    return build_graph([box([0, 0], [10, 10])], 50.0)


@pytest.fixture
def vb_half():
    return VelocityBounds.symmetric(0.5)


@pytest.fixture
def vb_one():
    return VelocityBounds.symmetric(1.0)


@pytest.fixture
def two_route_graph():
    """Short route A-B-E along the bottom and a long detour A-C-D-E over the top."""
    sets = [
        box([0, 0], [2, 2]),    # A
        box([2, 0], [8, 1]),    # B
        box([0, 2], [2, 10]),   # C
        box([2, 9], [10, 10]),  # D
        box([8, 0], [10, 10]),  # E
    ]
    return build_graph(sets, 50.0)


@pytest.fixture
def fast_params():
    return SolveParams(path_budget=40, rng_seed=0)


@pytest.fixture
def corridor_instance(fast_params):
    return InstanceFile.from_map(get_map('corridor')).to_instance(fast_params, time_budget=120.0)


@pytest.fixture
def swap4_instance(fast_params):
    return InstanceFile.from_map(get_map('swap4')).to_instance(fast_params, time_budget=300.0)


@pytest.fixture
def start_at():
    def _make(x, y, t=0.0):
        return State((x, y), t)
    return _make


@pytest.fixture
def flaky_linprog(monkeypatch):
    """Make HiGHS report a numerical failure ("Not Set") for the next `failures` calls.

    `failures=None` fails every call. Returns the list of options each call received.
    """
    real = scipy.optimize.linprog

    def _install(failures=None):
        calls = []

        def fake(*args, **kwargs):
            calls.append(kwargs.get('options'))
            if failures is None or len(calls) <= failures:
                return scipy.optimize.OptimizeResult(
                    status=4, x=None, fun=None, success=False, message='HiGHS Status 0: Not Set')
            return real(*args, **kwargs)

        monkeypatch.setattr(scipy.optimize, 'linprog', fake)
        return calls
    return _install
