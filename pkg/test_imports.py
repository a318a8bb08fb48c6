#!/usr/bin/env python3
"""
Every package module must import on its own in a fresh interpreter, whatever
the import order inside one test session.
"""

import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).parent

MODULES = [
    "src",
    "src.data.models",
    "src.utils",
    "src.utils.errors",
    "src.utils.logger",
    "src.utils.image_io",
    "src.utils.dictionary_io",
    "src.utils.atlas",
    "src.utils.results_writer",
    "src.config.coder_configs",
    "src.config.settings",
    "src.coders",
    "src.coders.algorithms.lasso",
    "src.coders.factory.coder_factory",
    "src.learning.ksvd",
    "src.metrics.quality",
    "src.pipeline.denoiser",
    "src.pipeline.benchmark_manager",
]


@pytest.mark.parametrize("module", MODULES)
def test_module_imports_in_fresh_interpreter(module):
    completed = subprocess.run(
        [sys.executable, "-c", f"import {module}"],
        cwd=ROOT, capture_output=True, text=True, timeout=120,
    )
    assert completed.returncode == 0, completed.stderr
