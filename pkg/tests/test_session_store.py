import json

import pytest

from src.config import config
from src.errors import SessionMismatch, TileFormatError
from src.session_store import SessionStore
from src.tiling_engine import SearchState, tile_hash


@pytest.fixture
def state():
    state = SearchState(tile_hash([(0, 0), (1, 0), (3, 0)]), round=2, lattice_cursor=4)
    state.stats.lattices_tried = 7
    state.stats.work_units = 8
    return state


def test_save_then_load(tmp_path, state):
    store = SessionStore(str(tmp_path / 'runs' / 'row.state'))
    path = store.save(state)
    assert store.exists()
    assert path.endswith('row.state')
    assert store.load(expected_hash=state.tile_hash) == state


def test_file_is_deterministic(tmp_path, state):
    first = SessionStore(str(tmp_path / 'a.state'))
    second = SessionStore(str(tmp_path / 'b.state'))
    first.save(state)
    second.save(state)
    text = (tmp_path / 'a.state').read_text(encoding='utf-8')
    assert text == (tmp_path / 'b.state').read_text(encoding='utf-8')
    assert json.loads(text)['version'] == config.STATE_VERSION
    assert text.endswith('\n')


def test_other_tile(tmp_path, state):
    store = SessionStore(str(tmp_path / 'row.state'))
    store.save(state)
    with pytest.raises(SessionMismatch):
        store.load(expected_hash=tile_hash([(0, 0)]))


def test_version_mismatch(tmp_path, state):
    path = tmp_path / 'old.state'
    document = dict(state.to_dict(), version='polytile-state/0')
    path.write_text(json.dumps(document), encoding='utf-8')
    with pytest.raises(SessionMismatch):
        SessionStore(str(path)).load()


@pytest.mark.parametrize('text', ['not json', '[1, 2]', '{"version": "polytile-state/1", "round": 1}'])
def test_malformed_files(tmp_path, text):
    path = tmp_path / 'bad.state'
    path.write_text(text, encoding='utf-8')
    with pytest.raises(TileFormatError):
        SessionStore(str(path)).load()


def test_missing_file(tmp_path):
    store = SessionStore(str(tmp_path / 'missing.state'))
    assert not store.exists()
    with pytest.raises(TileFormatError):
        store.load()
