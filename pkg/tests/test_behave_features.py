"""Collect the behave feature files so the suite runs under pytest."""
import glob
import os
import subprocess
import sys

import pytest

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FEATURES = sorted(glob.glob(os.path.join(ROOT, "features", "*.feature")))


@pytest.mark.parametrize("feature", FEATURES, ids=[os.path.basename(f) for f in FEATURES])
def test_feature(feature):
    result = subprocess.run(
        [sys.executable, "-m", "behave", "--tags=-slow", "-f", "progress", "--no-capture-stderr",
         os.path.relpath(feature, ROOT)],
        cwd=ROOT, capture_output=True, text=True,
    )
    assert result.returncode == 0, result.stdout[-4000:] + result.stderr[-4000:]
