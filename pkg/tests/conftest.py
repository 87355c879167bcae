import warnings

import pytest

from rnaqaoa.instances import load_benchmark
from rnaqaoa.qaoa import QaoaConfig, shipped_warmup, solve
from rnaqaoa.qubo import QuboParams

# scipy emits a clip warning when SLSQP's line search steps outside the box
warnings.filterwarnings("ignore", message="Values in x were outside bounds")


@pytest.fixture(scope="session")
def suite():
    return load_benchmark("suite")


@pytest.fixture(scope="session")
def small_suite():
    return load_benchmark("small")


@pytest.fixture(scope="session")
def warmups():
    return {"x": shipped_warmup("x"), "parity_xy": shipped_warmup("parity_xy")}


@pytest.fixture(scope="session")
def suite_results(suite, warmups):
    """Full p_max=8 solves for both mixers, shared across acceptance tests."""
    import time

    params = QuboParams()
    out = {"elapsed": {}}
    for mixer in ("x", "parity_xy"):
        cfg = QaoaConfig(mixer=mixer, seed=0)
        t0 = time.monotonic()
        out[mixer] = [
            (stems, solve(stems, params, cfg, warmup=warmups[mixer])) for stems in suite
        ]
        out["elapsed"][mixer] = time.monotonic() - t0
    return out
