from __future__ import annotations

import pytest

from divrepair.bundle import bundled_ids, load_bug


@pytest.fixture(scope="session")
def bugs():
    return {bug_id: load_bug(bug_id) for bug_id in bundled_ids()}
