"""
Session Store
Persists resumable decide state between runs
"""

import json
import logging
import os
from typing import Any, Dict, Optional

from src.config import config
from src.errors import SessionMismatch, TileFormatError
from src.tiling_engine import SearchState


class SessionStore:
    """
    JSON file holding one SearchState plus the state-format version tag
    """

    def __init__(self, state_file: str = config.DEFAULT_STATE_FILE):
        self.logger = logging.getLogger(__name__)
        self.state_file = state_file

    def save(self, state: SearchState) -> str:
        """
        Write the state; key order is fixed so identical states give identical files

        Returns:
            Path written
        """
        document: Dict[str, Any] = {'version': config.STATE_VERSION}
        document.update(state.to_dict())
        directory = os.path.dirname(self.state_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(self.state_file, 'w', encoding='utf-8') as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write('\n')
        self.logger.info(f"Saved resume state (round {state.round}, cursor {state.lattice_cursor}) "
                         f"to {self.state_file}")
        return self.state_file

    def load(self, expected_hash: Optional[str] = None) -> SearchState:
        """
        Read the state back

        Args:
            expected_hash: Tile hash the state must belong to, when known

        Raises:
            SessionMismatch: wrong version tag or a state for another tile
            TileFormatError: unreadable or malformed file
        """
        try:
            with open(self.state_file, 'r', encoding='utf-8') as f:
                document = json.load(f)
        except OSError as e:
            raise TileFormatError(f"Cannot read state file {self.state_file}: {e}") from e
        except json.JSONDecodeError as e:
            raise TileFormatError(f"State file {self.state_file} is not JSON: {e}") from e

        if not isinstance(document, dict):
            raise TileFormatError(f"State file {self.state_file} must hold a JSON object")
        version = document.get('version')
        if version != config.STATE_VERSION:
            raise SessionMismatch(f"State version {version!r} does not match {config.STATE_VERSION!r}")
        try:
            state = SearchState.from_dict(document)
        except (KeyError, TypeError, ValueError) as e:
            raise TileFormatError(f"Malformed state file {self.state_file}: {e}") from e
        if expected_hash is not None and state.tile_hash != expected_hash:
            raise SessionMismatch("Resume state belongs to a different tile")
        self.logger.info(f"Loaded resume state at round {state.round}, phase {state.phase}")
        return state

    def exists(self) -> bool:
        return os.path.exists(self.state_file)
