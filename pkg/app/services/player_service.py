"""Playability agent: breadth-first reachability over a discrete tick model."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from app.core.config import PhysicsParams
from app.core.exceptions import PlayabilityError, SpawnError
from app.models import DEFAULT_ALPHABET, Level, Segment, TileAlphabet

logger = logging.getLogger(__name__)

Grid = Sequence[str]


class Phase(str, Enum):
    """Movement phase of the agent."""

    GROUNDED = "G"
    RISING = "R"
    FALLING = "F"


_PHASE_ORDER = {Phase.GROUNDED: 0, Phase.RISING: 1, Phase.FALLING: 2}


@dataclass(frozen=True)
class AgentState:
    """
    Agent position and phase.

    `air` counts ticks since leaving the ground; while rising it equals the
    number of rows climbed so far.
    """

    col: int
    row: int
    phase: Phase = Phase.GROUNDED
    air: int = 0

    def shifted(self, columns: int) -> "AgentState":
        """Same state moved by a column offset."""
        return AgentState(self.col + columns, self.row, self.phase, self.air)

    def sort_key(self) -> Tuple[int, int, int, int]:
        return self.col, self.row, _PHASE_ORDER[self.phase], self.air


@dataclass(frozen=True)
class PlayResult:
    """Outcome of one playability test."""

    playable: bool
    end_state: Optional[AgentState]
    visited_states: int
    path: Optional[Tuple[AgentState, ...]] = None


class _Solidity:
    """Solid lookup over a strip; cells outside the grid are open."""

    def __init__(self, rows: Grid, alphabet: TileAlphabet):
        self.height = len(rows)
        self.width = len(rows[0]) if rows else 0
        self.cells = [[alphabet.is_solid(g) for g in row] for row in rows]

    def solid(self, row: int, col: int) -> bool:
        if 0 <= row < self.height and 0 <= col < self.width:
            return self.cells[row][col]
        return False

    def inside(self, row: int, col: int) -> bool:
        return 0 <= row < self.height and 0 <= col < self.width


def _rows_of(strip) -> Grid:
    if isinstance(strip, (Level, Segment)):
        return strip.rows
    return tuple(strip)


def spawn_state(strip, col: int, alphabet: TileAlphabet = DEFAULT_ALPHABET) -> AgentState:
    """
    Grounded state atop the highest solid tile of a column.

    Args:
        strip: Level, Segment or row strings
        col: Column index
        alphabet: Glyph alphabet

    Returns:
        AgentState: Grounded state

    Raises:
        PlayabilityError: If the column is outside the strip
        SpawnError: If no tile in the column can be stood on
    """
    grid = _Solidity(_rows_of(strip), alphabet)
    if not 0 <= col < grid.width:
        raise PlayabilityError(f"Spawn column {col} outside strip width {grid.width}")
    for row in range(grid.height - 1):
        if grid.solid(row + 1, col) and not grid.solid(row, col):
            return AgentState(col, row, Phase.GROUNDED, 0)
    raise SpawnError(col)


def _validate_start(grid: _Solidity, start: AgentState, phys: PhysicsParams) -> None:
    if not grid.inside(start.row, start.col):
        raise PlayabilityError(f"Start {start} outside the strip")
    if grid.solid(start.row, start.col):
        raise PlayabilityError(f"Start {start} is inside a solid tile")
    if start.phase == Phase.GROUNDED and not grid.solid(start.row + 1, start.col):
        raise PlayabilityError(f"Grounded start {start} has no support")
    if start.air < 0 or (start.phase == Phase.RISING and start.air > phys.max_jump_rise):
        raise PlayabilityError(f"Start {start} has an invalid air counter")


def _settle(grid: _Solidity, col: int, row: int, phase: Phase, air: int) -> AgentState:
    """Airborne states with solid support below become grounded."""
    if phase == Phase.FALLING and grid.solid(row + 1, col):
        return AgentState(col, row, Phase.GROUNDED, 0)
    return AgentState(col, row, phase, air)


def _horizontal(grid: _Solidity, col: int, row: int, reach: int) -> List[int]:
    """Columns reachable sideways through open cells, nearest first, left before right."""
    targets = [col]
    for direction in (-1, 1):
        for step in range(1, reach + 1):
            c = col + direction * step
            if not grid.inside(row, c) or grid.solid(row, c):
                break
            targets.append(c)
    return targets


def _successors(grid: _Solidity, state: AgentState, phys: PhysicsParams) -> Iterable[AgentState]:
    col, row = state.col, state.row

    if state.phase == Phase.GROUNDED:
        for c in (col - 1, col + 1):
            if not grid.inside(row, c) or grid.solid(row, c):
                continue
            if grid.solid(row + 1, c):
                yield AgentState(c, row, Phase.GROUNDED, 0)
            else:
                yield AgentState(c, row, Phase.FALLING, 1)
        yield AgentState(col, row, Phase.RISING, 0)
        return

    air = min(state.air + 1, phys.max_air_steps)
    reach = phys.horizontal_air_control if state.air < phys.max_air_steps else 0

    if state.phase == Phase.RISING:
        if state.air < phys.max_jump_rise and row - 1 >= 0 and not grid.solid(row - 1, col):
            new_row, phase = row - 1, Phase.RISING
            air = state.air + 1
        else:
            new_row, phase = row, Phase.FALLING
    else:
        new_row, phase = row, Phase.FALLING
        for _ in range(phys.gravity):
            if grid.solid(new_row + 1, col):
                break
            new_row += 1
            if new_row >= grid.height:
                # fell out of the level
                return

    for c in _horizontal(grid, col, new_row, reach):
        yield _settle(grid, c, new_row, phase, air)


def test_playability(
    strip,
    start: AgentState,
    phys: PhysicsParams,
    alphabet: TileAlphabet = DEFAULT_ALPHABET,
    trace: bool = False,
) -> PlayResult:
    """
    Breadth-first search from `start` to the right-most column of the strip.

    Among the goal states of the first BFS layer that contains any, the end
    state is the smallest by (column, row, phase, air).

    Args:
        strip: Level, Segment or row strings (strip coordinates)
        start: Start state in strip coordinates
        phys: Tick-model physics
        alphabet: Glyph alphabet
        trace: Keep the path to the end state

    Returns:
        PlayResult: Pass/fail, end state and number of visited states

    Raises:
        PlayabilityError: If the start state is invalid
    """
    grid = _Solidity(_rows_of(strip), alphabet)
    _validate_start(grid, start, phys)
    goal_col = grid.width - 1

    parents: Dict[AgentState, Optional[AgentState]] = {start: None}
    layer = [start]
    while layer:
        goals = [s for s in layer if s.col == goal_col]
        if goals:
            end = min(goals, key=AgentState.sort_key)
            path = _path_to(end, parents) if trace else None
            return PlayResult(True, end, len(parents), path)
        next_layer = []
        for state in layer:
            for successor in _successors(grid, state, phys):
                if successor not in parents:
                    parents[successor] = state
                    next_layer.append(successor)
        layer = next_layer
    return PlayResult(False, None, len(parents))


# not a pytest test
test_playability.__test__ = False


def _path_to(end: AgentState, parents: Dict[AgentState, Optional[AgentState]]) -> Tuple[AgentState, ...]:
    path = []
    node: Optional[AgentState] = end
    while node is not None:
        path.append(node)
        node = parents[node]
    return tuple(reversed(path))


def state_bound(columns: int, rows: int, phys: PhysicsParams) -> int:
    """Upper bound on distinct search states of a strip."""
    return columns * rows * (1 + (phys.max_jump_rise + 1) + (phys.max_air_steps + 1))


def playability_reward(segments_completed: int) -> float:
    """Episode-level P: number of segments completed."""
    if segments_completed < 0:
        raise ValueError("segments_completed must be >= 0")
    return float(segments_completed)


def format_trace(path: Sequence[AgentState]) -> str:
    """One `col row phase air` line per state."""
    return "\n".join(f"{s.col} {s.row} {s.phase.value} {s.air}" for s in path)


@dataclass(frozen=True)
class PlayabilityTester:
    """Physics and alphabet bound for repeated tests on segment strips."""

    physics: PhysicsParams
    alphabet: TileAlphabet = DEFAULT_ALPHABET

    def spawn(self, strip, col: int = 0) -> AgentState:
        return spawn_state(strip, col, self.alphabet)

    def test(self, strip, start: AgentState, trace: bool = False) -> PlayResult:
        return test_playability(strip, start, self.physics, self.alphabet, trace)

    def test_strip(self, segments: Sequence[Segment], start: AgentState, trace: bool = False) -> PlayResult:
        """Test a concatenation of segments (strip coordinates)."""
        return self.test(Level.from_segments(list(segments)), start, trace)

    def test_segment(self, segment: Segment) -> PlayResult:
        """Single segment from the column-0 spawn; unplayable if column 0 has no spawn."""
        try:
            start = self.spawn(segment, 0)
        except SpawnError:
            return PlayResult(False, None, 0)
        return self.test(segment, start)
