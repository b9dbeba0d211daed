import hashlib
import os
from pathlib import Path

import numpy as np
import pytest

import l96varx.l96 as l96mod
from l96varx.config import preset
from l96varx.io import read_series, write_series
from l96varx.l96 import simulate_full

# desk scale: N = (10**6 + p) // 5
DESK_SCALE = 5

# criterion number -> (passed, one-line detail); printed in the terminal summary
ACCEPTANCE = {}


def _kernel_tag() -> str:
    return hashlib.sha256(Path(l96mod.__file__).read_bytes()).hexdigest()[:12]


@pytest.fixture(scope="session")
def reference_series(request):
    """Factory ``get(name, seed, scale=DESK_SCALE)`` returning a cached full-model
    run; the cache key includes the config hash and the integrator source."""
    cache = Path(request.config.cache.mkdir("l96varx-references"))
    memo = {}

    def get(name, seed, scale=DESK_SCALE):
        cfg = preset(name).scaled(scale)
        key = (name, seed, scale)
        if key not in memo:
            path = cache / f"{name}_x{scale}_seed{seed}_{cfg.config_hash()[:12]}_{_kernel_tag()}.l96s"
            if not path.exists():
                tmp = path.with_suffix(f".tmp{os.getpid()}")
                write_series(tmp, simulate_full(cfg, seed))
                tmp.replace(path)
            memo[key] = (cfg, read_series(path))
        return memo[key]

    return get


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
