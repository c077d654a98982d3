"""Turing machines over {0, 1} with the head fixed at cell 0.

The tape moves instead of the head: a transition writes at cell 0 and then
shifts the whole tape, so a shift of +1 makes the new tape read
``t'_i = t_{i+1}``.
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from utils.errors import HaltedConfiguration, MachineDefinitionError, MachineError, OverlapError, TapeFormatError
from utils.logger import get_enhanced_logger

logger = get_enhanced_logger(__name__)

SYMBOLS = (0, 1)
SHIFTS = (-1, 0, 1)

# Two-bit shift codes used by the binary machine description.
_SHIFT_CODES = {0: (0, 0), 1: (0, 1), -1: (1, 0)}
_SHIFT_DECODE = {code: shift for shift, code in _SHIFT_CODES.items()}


@dataclass(frozen=True)
class Tape:
    """Bi-infinite binary tape stored as the finite set of cells holding 1."""

    ones: FrozenSet[int] = frozenset()

    @classmethod
    def from_cells(cls, cells: Iterable[int]) -> 'Tape':
        return cls(frozenset(int(c) for c in cells))

    @classmethod
    def from_bits(cls, bits: Iterable[int], offset: int = 0) -> 'Tape':
        """Tape whose cell ``offset + j`` holds ``bits[j]``."""
        return cls(frozenset(offset + j for j, b in enumerate(bits) if b))

    def read(self, cell: int) -> int:
        return 1 if cell in self.ones else 0

    def write(self, cell: int, symbol: int) -> 'Tape':
        if symbol:
            return Tape(self.ones | {cell})
        return Tape(self.ones - {cell})

    def shifted(self, k: int) -> 'Tape':
        """Tape ``t'`` with ``t'_i = t_{i+k}``."""
        if k == 0:
            return self
        return Tape(frozenset(c - k for c in self.ones))

    def window(self, lo: int, hi: int) -> Tuple[int, ...]:
        return tuple(self.read(i) for i in range(lo, hi + 1))

    @property
    def is_blank(self) -> bool:
        return not self.ones

    @property
    def min_cell(self) -> Optional[int]:
        return min(self.ones) if self.ones else None

    @property
    def max_cell(self) -> Optional[int]:
        return max(self.ones) if self.ones else None

    def fits(self, lo: int, hi: int) -> bool:
        return all(lo <= c <= hi for c in self.ones)

    def to_dict(self) -> Dict[str, List[int]]:
        return {'ones': sorted(self.ones)}

    def __len__(self) -> int:
        return len(self.ones)


@dataclass(frozen=True)
class Transition:
    target: str
    write: int
    shift: int


@dataclass(frozen=True)
class TuringMachine:
    """Quadruple (Q, q_init, q_halt, delta).

    ``states`` is reordered at construction so that ``q_init`` has index 0;
    indices are stable afterwards.
    """

    states: Tuple[str, ...]
    q_init: str
    q_halt: str
    delta: Tuple[Tuple[Tuple[str, int], Transition], ...]
    _table: Dict[Tuple[str, int], Transition] = field(init=False, repr=False, compare=False, hash=False)
    _index: Dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        states = tuple(self.states)
        if len(set(states)) != len(states):
            raise MachineDefinitionError("State names must be unique", {'states': list(states)})
        if self.q_init not in states or self.q_halt not in states:
            raise MachineDefinitionError(
                "q_init and q_halt must be states", {'q_init': self.q_init, 'q_halt': self.q_halt})
        if self.q_init == self.q_halt:
            raise MachineDefinitionError("q_init must differ from q_halt", {'state': self.q_init})

        ordered = (self.q_init,) + tuple(q for q in states if q != self.q_init)
        table = dict(self.delta)
        if len(table) != len(self.delta):
            raise MachineDefinitionError("Duplicate transition entries")

        for (q, s), tr in table.items():
            if q == self.q_halt:
                raise MachineDefinitionError("The halting state has no transitions", {'from': q, 'read': s})
            if q not in states or tr.target not in states:
                raise MachineDefinitionError("Transition refers to an unknown state", {'from': q, 'to': tr.target})
            if s not in SYMBOLS or tr.write not in SYMBOLS:
                raise MachineDefinitionError("Symbols must be 0 or 1", {'from': q, 'read': s, 'write': tr.write})
            if tr.shift not in SHIFTS:
                raise MachineDefinitionError("Shift must be -1, 0 or 1", {'from': q, 'shift': tr.shift})
        missing = [(q, s) for q in ordered if q != self.q_halt for s in SYMBOLS if (q, s) not in table]
        if missing:
            raise MachineDefinitionError(
                "Transition function is not total", {'missing': [list(m) for m in missing]})

        canonical = tuple(sorted(table.items(), key=lambda item: (ordered.index(item[0][0]), item[0][1])))
        object.__setattr__(self, 'states', ordered)
        object.__setattr__(self, 'delta', canonical)
        object.__setattr__(self, '_table', table)
        object.__setattr__(self, '_index', {q: i for i, q in enumerate(ordered)})

    @classmethod
    def build(cls, states: Iterable[str], q_init: str, q_halt: str,
              delta: Mapping[Tuple[str, int], Union[Transition, Tuple[str, int, int]]]) -> 'TuringMachine':
        """Construct from a plain mapping ``(state, read) -> (target, write, shift)``."""
        entries = tuple(
            ((q, int(s)), tr if isinstance(tr, Transition) else Transition(tr[0], int(tr[1]), int(tr[2])))
            for (q, s), tr in delta.items()
        )
        return cls(tuple(states), q_init, q_halt, entries)

    @property
    def n_states(self) -> int:
        return len(self.states)

    def index(self, state: str) -> int:
        return self._index[state]

    @property
    def halt_index(self) -> int:
        return self._index[self.q_halt]

    def transition(self, state: str, symbol: int) -> Transition:
        return self._table[(state, symbol)]

    def signature(self) -> Tuple:
        """Index-level transition table; equal for machines equal up to state renaming."""
        return (
            self.n_states,
            self.halt_index,
            tuple(
                (self._index[q], s, self._index[tr.target], tr.write, tr.shift)
                for (q, s), tr in self.delta
            ),
        )

    def to_dict(self) -> Dict:
        return {
            'states': list(self.states),
            'q_init': self.q_init,
            'q_halt': self.q_halt,
            'delta': [
                {'from': q, 'read': s, 'to': tr.target, 'write': tr.write, 'shift': tr.shift}
                for (q, s), tr in self.delta
            ],
        }


@dataclass(frozen=True)
class Configuration:
    state: str
    tape: Tape

    def render(self, lo: int = -4, hi: int = 4) -> str:
        """One-line picture of the tape window with the head cell bracketed."""
        cells = [f'[{self.tape.read(i)}]' if i == 0 else str(self.tape.read(i)) for i in range(lo, hi + 1)]
        return f"{self.state}: {' '.join(cells)}"

    def to_dict(self) -> Dict:
        return {'state': self.state, **self.tape.to_dict()}


@dataclass(frozen=True)
class Halted:
    output: Tape
    steps: int

    halted = True

    def to_dict(self) -> Dict:
        return {'status': 'halted', 'steps': self.steps, 'output': self.output.to_dict()}


@dataclass(frozen=True)
class StillRunning:
    config: Configuration
    steps: int

    halted = False

    def to_dict(self) -> Dict:
        return {'status': 'running', 'steps': self.steps, 'config': self.config.to_dict()}


RunOutcome = Union[Halted, StillRunning]


def step(machine: TuringMachine, config: Configuration) -> Configuration:
    """Global transition function: write at cell 0, shift the tape, change state."""
    if config.state == machine.q_halt:
        raise HaltedConfiguration("Configuration is already halted", {'state': config.state})
    tr = machine.transition(config.state, config.tape.read(0))
    return Configuration(tr.target, config.tape.write(0, tr.write).shifted(tr.shift))


def trace(machine: TuringMachine, tape: Tape, horizon: int) -> Iterator[Configuration]:
    """Configurations from ``(q_init, tape)`` for at most ``horizon`` steps, halting one included."""
    config = Configuration(machine.q_init, tape)
    yield config
    for _ in range(horizon):
        if config.state == machine.q_halt:
            return
        config = step(machine, config)
        yield config


def run(machine: TuringMachine, tape: Tape, horizon: int) -> RunOutcome:
    """Run for at most ``horizon`` steps."""
    if horizon < 0:
        raise MachineError("Horizon must be non-negative", {'horizon': horizon})
    config = Configuration(machine.q_init, tape)
    steps = 0
    while config.state != machine.q_halt and steps < horizon:
        config = step(machine, config)
        steps += 1
    if config.state == machine.q_halt:
        return Halted(config.tape, steps)
    return StillRunning(config, steps)


# Binary machine descriptions

def _index_width(n_states: int) -> int:
    return max(1, (n_states - 1).bit_length())


def _int_bits(value: int, width: int) -> List[int]:
    return [(value >> (width - 1 - j)) & 1 for j in range(width)]


def machine_bits(machine: TuringMachine) -> List[int]:
    """Self-delimiting description: unary |Q|, halting index, then every delta entry.

    Entries follow state index order (halting state skipped), symbol 0 before 1,
    each as target index, written symbol and a two-bit shift code.
    """
    n = machine.n_states
    w = _index_width(n)
    bits = [1] * n + [0]
    bits += _int_bits(machine.halt_index, w)
    for q in machine.states:
        if q == machine.q_halt:
            continue
        for s in SYMBOLS:
            tr = machine.transition(q, s)
            bits += _int_bits(machine.index(tr.target), w)
            bits.append(tr.write)
            bits += list(_SHIFT_CODES[tr.shift])
    return bits


def encode_machine(machine: TuringMachine) -> Tape:
    """Machine description with bit ``j`` at cell ``j``."""
    return Tape.from_bits(machine_bits(machine))


def decode_machine_prefix(tape: Tape) -> Tuple[TuringMachine, int]:
    """Decode the machine described from cell 0; also return the description length."""
    cursor = 0

    def take(width: int) -> int:
        nonlocal cursor
        value = 0
        for j in range(width):
            value = (value << 1) | tape.read(cursor + j)
        cursor += width
        return value

    n = 0
    limit = (tape.max_cell or 0) + 1
    while tape.read(cursor):
        n += 1
        cursor += 1
        if cursor > limit:
            raise TapeFormatError("Unterminated state count")
    cursor += 1
    if n < 2:
        raise TapeFormatError("A machine needs at least two states", {'states': n})

    w = _index_width(n)
    halt = take(w)
    if halt >= n or halt == 0:
        raise TapeFormatError("Invalid halting state index", {'halt_index': halt, 'states': n})

    names = [f'q{i}' for i in range(n)]
    delta = {}
    for i in range(n):
        if i == halt:
            continue
        for s in SYMBOLS:
            target = take(w)
            write = take(1)
            code = (take(1), take(1))
            if target >= n:
                raise TapeFormatError("Transition target out of range", {'target': target, 'states': n})
            if code not in _SHIFT_DECODE:
                raise TapeFormatError("Invalid shift code", {'code': list(code)})
            delta[(names[i], s)] = Transition(names[target], write, _SHIFT_DECODE[code])

    try:
        machine = TuringMachine.build(names, names[0], names[halt], delta)
    except MachineDefinitionError as e:
        raise TapeFormatError(f"Decoded machine is invalid: {e.message}", e.details) from e
    return machine, cursor


def decode_machine(tape: Tape) -> TuringMachine:
    """Inverse of :func:`encode_machine`; states are named ``q0 .. q{n-1}``."""
    machine, length = decode_machine_prefix(tape)
    if tape.min_cell is not None and (tape.min_cell < 0 or tape.max_cell >= length):
        raise TapeFormatError("Tape holds bits outside the machine description", {'length': length})
    return machine


def juxtapose(t: Tape, t_prime: Tape, split: int) -> Tape:
    """``t * t'``: ``t`` on cells below ``split``, ``t'`` moved to start at ``split``."""
    if t.max_cell is not None and t.max_cell >= split:
        raise OverlapError("Left tape reaches the split cell", {'max_cell': t.max_cell, 'split': split})
    if t_prime.min_cell is not None and t_prime.min_cell < 0:
        raise OverlapError("Right tape has cells left of its origin", {'min_cell': t_prime.min_cell})
    return Tape(t.ones | frozenset(c + split for c in t_prime.ones))


def split_tape(tape: Tape, split: int) -> Tuple[Tape, Tape]:
    """Inverse of :func:`juxtapose`."""
    left = frozenset(c for c in tape.ones if c < split)
    right = frozenset(c - split for c in tape.ones if c >= split)
    return Tape(left), Tape(right)


def program_input(machine: TuringMachine, tape: Tape) -> Tape:
    """``t_T * t_in`` with the split at the end of the machine description."""
    description = encode_machine(machine)
    return juxtapose(description, tape, len(machine_bits(machine)))


# Sample machines

def flip_machine() -> TuringMachine:
    """Inverts cell 0 and halts."""
    return TuringMachine.build(
        ['q0', 'qh'], 'q0', 'qh',
        {('q0', 0): ('qh', 1, 0), ('q0', 1): ('qh', 0, 0)},
    )


def zseek_machine() -> TuringMachine:
    """Moves right over a block of ones and halts on the first zero."""
    return TuringMachine.build(
        ['q0', 'qh'], 'q0', 'qh',
        {('q0', 1): ('q0', 1, 1), ('q0', 0): ('qh', 0, 0)},
    )


def bounce_machine() -> TuringMachine:
    """Halts iff cell 0 or cell 1 holds a one; otherwise bounces forever."""
    return TuringMachine.build(
        ['q0', 'q1', 'qh'], 'q0', 'qh',
        {
            ('q0', 0): ('q1', 0, 1),
            ('q0', 1): ('qh', 1, 0),
            ('q1', 0): ('q0', 0, -1),
            ('q1', 1): ('qh', 1, 0),
        },
    )


def spin_machine() -> TuringMachine:
    """Never halts on a blank cell 0."""
    return TuringMachine.build(
        ['q0', 'qh'], 'q0', 'qh',
        {('q0', 0): ('q0', 0, 0), ('q0', 1): ('qh', 1, 0)},
    )


SAMPLE_MACHINES = {
    'flip': flip_machine,
    'zseek': zseek_machine,
    'bounce': bounce_machine,
    'spin': spin_machine,
}


def random_machine(rng: np.random.Generator, max_states: int = 5) -> TuringMachine:
    """Uniformly drawn total machine with 2..max_states states."""
    n = int(rng.integers(2, max_states + 1))
    halt = int(rng.integers(1, n))
    names = [f'q{i}' for i in range(n)]
    delta = {}
    for i in range(n):
        if i == halt:
            continue
        for s in SYMBOLS:
            delta[(names[i], s)] = (
                names[int(rng.integers(0, n))],
                int(rng.integers(0, 2)),
                int(rng.choice(SHIFTS)),
            )
    return TuringMachine.build(names, names[0], names[halt], delta)


def random_tape(rng: np.random.Generator, lo: int, hi: int, density: float = 0.5) -> Tape:
    cells = np.arange(lo, hi + 1)
    return Tape.from_cells(cells[rng.random(len(cells)) < density].tolist())


def all_tapes(lo: int, hi: int) -> Iterator[Tape]:
    """Every tape supported in ``[lo, hi]``."""
    width = hi - lo + 1
    for mask in range(1 << width):
        yield Tape(frozenset(lo + j for j in range(width) if (mask >> j) & 1))
