"""Test configuration for the adlv project."""

from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[1]
TESTS = Path(__file__).resolve().parent
for entry in (ROOT, TESTS):
    if str(entry) not in sys.path:
        sys.path.insert(0, str(entry))

FIXTURES = ROOT / "adlv" / "fixtures"


@pytest.fixture(scope="session")
def ssu_model():
    from adlv.parser import parse_model

    return parse_model((FIXTURES / "ssu.adl").read_text(encoding="utf-8"), "ssu.adl")


@pytest.fixture(scope="session")
def ssu_network(ssu_model):
    from adlv.transform import transform_faa

    return transform_faa(ssu_model)
