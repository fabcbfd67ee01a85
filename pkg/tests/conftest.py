from __future__ import annotations

import pytest

from feedgrid.store import PostStore

from helpers import fixture_publishers, make_fixture_posts


@pytest.fixture(scope="session")
def fixture_posts():
    return make_fixture_posts(1000)


@pytest.fixture(scope="session")
def publishers():
    return fixture_publishers()


@pytest.fixture(scope="session")
def fixture_store(fixture_posts):
    """Read-only seeded store shared across the session.

    Tests that write (prune, ingest) must build their own store.
    """
    store = PostStore(":memory:")
    for post in fixture_posts:
        assert store.insert_post(post)
    yield store
    store.close()
