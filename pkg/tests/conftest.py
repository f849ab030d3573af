import os
from pathlib import Path

import pytest
from hypothesis import settings

from wpgap.expectation import enumerate_admissible, filling_types, required_volumes
from wpgap.volumes import generate_volume_entries, generate_volumes, parse_volume_table

DATA = Path(__file__).resolve().parent / "data"

settings.register_profile("repro", deadline=None, derandomize=True, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repro"))

# (g, n) cases with exact-mode bounds at T = 4 log g
EXACT_CASES = [(g, n) for g in (2, 3, 4) for n in (0, 1, 2)]


@pytest.fixture(scope="session")
def reference_table():
    return parse_volume_table((DATA / "reference_volumes.wpv").read_text(), provenance="reference")


@pytest.fixture(scope="session")
def generated_table():
    return generate_volumes(4, 4)


@pytest.fixture(scope="session")
def bound_table():
    """Every volume read by the exact-mode bounds and the admissible-sum checks."""
    keys = set()
    for g, n in EXACT_CASES:
        keys.update(required_volumes(g, n))
        for g0, a0, k in filling_types(g, n, 4):
            for n0 in range(k // 2 + 1):
                for q in range(1, k - 2 * n0 + 1):
                    for sig in enumerate_admissible(g, n, g0, a0, k, n0, q):
                        keys.update(sig.part_keys())
                        keys.add(sig.core_key())
    return generate_volume_entries(keys)
