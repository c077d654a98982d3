"""Exact square encodings of configurations and the generalized shift of a machine.

A configuration ``(q, t)`` is the point

    x = (s(q) + sum_{i>=0} t_i 3^-(i+1)) / |Q|,    y = sum_{i>=1} t_{-i} 3^-i

so tape digits are base-3 digits restricted to {0, 1}. Everything here is
``Fraction`` arithmetic.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from config.constants import CERTIFIES
from services.tm_core import Configuration, Halted, Tape, TuringMachine, all_tapes, run
from utils.errors import InvalidEncoding, NoCylinder, SupportTooWide
from utils.logger import get_enhanced_logger, log_performance

logger = get_enhanced_logger(__name__)

THIRD = Fraction(1, 3)


@dataclass(frozen=True)
class SquarePoint:
    x: Fraction
    y: Fraction

    def to_dict(self) -> Dict[str, str]:
        return {'x': str(self.x), 'y': str(self.y)}


def _cantor_value(cells: List[int]) -> Fraction:
    """sum 3^-(j) over the given 1-based digit positions."""
    value = Fraction(0)
    for j in cells:
        value += Fraction(1, 3 ** j)
    return value


def _ternary_digits(q: Fraction) -> List[int]:
    """Base-3 digits of ``q`` in [0, 1); raises unless the expansion is finite."""
    if q < 0 or q >= 1:
        raise InvalidEncoding("Coordinate outside [0, 1)", {'value': str(q)})
    den = q.denominator
    k = 0
    while den % 3 == 0:
        den //= 3
        k += 1
    if den != 1:
        raise InvalidEncoding("Coordinate is not a finite ternary fraction", {'value': str(q)})
    num = q.numerator
    digits = []
    for _ in range(k):
        digits.append(num % 3)
        num //= 3
    digits.reverse()
    return digits


def _cantor_digits(q: Fraction) -> List[int]:
    digits = _ternary_digits(q)
    if any(d == 2 for d in digits):
        raise InvalidEncoding("Ternary digit 2 in an encoding", {'value': str(q)})
    return digits


def encode_config(machine: TuringMachine, config: Configuration) -> SquarePoint:
    n = machine.n_states
    s = machine.index(config.state)
    right = _cantor_value([c + 1 for c in config.tape.ones if c >= 0])
    left = _cantor_value([-c for c in config.tape.ones if c < 0])
    return SquarePoint((s + right) / n, left)


def decode_point(machine: TuringMachine, p: SquarePoint) -> Configuration:
    """Inverse of :func:`encode_config` on valid encodings."""
    n = machine.n_states
    if not (0 <= p.x < 1 and 0 <= p.y < 1):
        raise InvalidEncoding("Point outside the unit square", p.to_dict())
    u = p.x * n
    s = u.numerator // u.denominator
    right = _cantor_digits(u - s)
    left = _cantor_digits(p.y)
    ones = [j for j, d in enumerate(right) if d] + [-(j + 1) for j, d in enumerate(left) if d]
    return Configuration(machine.states[s], Tape.from_cells(ones))


@dataclass(frozen=True)
class Piece:
    """Affine map on one cylinder: ``x' = ax*x + bx``, ``y' = ay*y + by``.

    The cylinder fixes the state index, the digit under the head and, for
    right shifts (tape shift -1), the first left digit.
    """

    state_index: int
    read: int
    left_digit: Optional[int]
    target_index: int
    write: int
    shift: int
    ax: Fraction
    bx: Fraction
    ay: Fraction
    by: Fraction

    @property
    def key(self) -> Tuple[int, int, Optional[int]]:
        return (self.state_index, self.read, self.left_digit)

    @property
    def determinant(self) -> Fraction:
        return self.ax * self.ay

    def apply(self, p: SquarePoint) -> SquarePoint:
        return SquarePoint(self.ax * p.x + self.bx, self.ay * p.y + self.by)

    def to_dict(self) -> Dict:
        return {
            'state': self.state_index, 'read': self.read, 'left_digit': self.left_digit,
            'target': self.target_index, 'write': self.write, 'shift': self.shift,
            'ax': str(self.ax), 'bx': str(self.bx), 'ay': str(self.ay), 'by': str(self.by),
        }


def _make_piece(n: int, s: int, t0: int, left: Optional[int], s2: int, w: int, shift: int) -> Piece:
    n = Fraction(n)
    if shift == 0:
        return Piece(s, t0, left, s2, w, shift,
                     Fraction(1), ((s2 - s) + (w - t0) * THIRD) / n, Fraction(1), Fraction(0))
    if shift == 1:
        return Piece(s, t0, left, s2, w, shift,
                     Fraction(3), (s2 - 3 * s - t0) / n, THIRD, w * THIRD)
    # tape moves right: the first left digit becomes the head digit
    return Piece(s, t0, left, s2, w, shift,
                 THIRD, (s2 + left * THIRD - s * THIRD - Fraction(t0, 9) + Fraction(w, 9)) / n,
                 Fraction(3), Fraction(-left))


@dataclass(frozen=True)
class GeneralizedShift:
    machine: TuringMachine
    pieces: Tuple[Piece, ...]

    def __post_init__(self):
        object.__setattr__(self, '_lookup', {piece.key: piece for piece in self.pieces})

    def cylinder_key(self, p: SquarePoint) -> Tuple[int, int, Optional[int]]:
        """Cylinder indices of a valid non-halting encoding."""
        try:
            config = decode_point(self.machine, p)
        except InvalidEncoding as e:
            raise NoCylinder("Point is not a valid encoding", {**p.to_dict(), 'reason': e.message}) from e
        s = self.machine.index(config.state)
        if s == self.machine.halt_index:
            raise NoCylinder("Point encodes a halting configuration", p.to_dict())
        t0 = config.tape.read(0)
        if self.machine.transition(config.state, t0).shift == -1:
            return (s, t0, config.tape.read(-1))
        return (s, t0, None)

    def piece_for(self, p: SquarePoint) -> Piece:
        return self._lookup[self.cylinder_key(p)]


@log_performance("compile_shift")
def compile_shift(machine: TuringMachine) -> GeneralizedShift:
    n = machine.n_states
    pieces = []
    for q in machine.states:
        if q == machine.q_halt:
            continue
        s = machine.index(q)
        for t0 in (0, 1):
            tr = machine.transition(q, t0)
            s2 = machine.index(tr.target)
            lefts = (0, 1) if tr.shift == -1 else (None,)
            for left in lefts:
                pieces.append(_make_piece(n, s, t0, left, s2, tr.write, tr.shift))
    logger.debug("Compiled generalized shift", states=n, pieces=len(pieces))
    return GeneralizedShift(machine, tuple(pieces))


def shift_step(G: GeneralizedShift, p: SquarePoint) -> SquarePoint:
    return G.piece_for(p).apply(p)


def in_halting_cylinder(machine: TuringMachine, p: SquarePoint) -> bool:
    """State digit of ``p`` equals the halting index."""
    if not (0 <= p.x < 1):
        return False
    u = p.x * machine.n_states
    return u.numerator // u.denominator == machine.halt_index


def shift_orbit(G: GeneralizedShift, p: SquarePoint, horizon: int) -> List[SquarePoint]:
    """Orbit of ``p`` for at most ``horizon`` iterates, ending at the first halting encoding."""
    orbit = [p]
    for _ in range(horizon):
        if in_halting_cylinder(G.machine, orbit[-1]):
            break
        orbit.append(shift_step(G, orbit[-1]))
    return orbit


@dataclass(frozen=True)
class HaltingRegion:
    """Open box ``|x - cx| < half_width / |Q|``, ``|y - cy| < half_width``."""

    center: SquarePoint
    half_width: Fraction
    matched_digits: int
    n_states: int

    @property
    def half_width_x(self) -> Fraction:
        return self.half_width / self.n_states

    def to_dict(self) -> Dict:
        return {
            'center': self.center.to_dict(),
            'half_width_x': str(self.half_width_x),
            'half_width_y': str(self.half_width),
            'matched_digits': self.matched_digits,
        }


def halting_region(machine: TuringMachine, t_out: Tape, m: int) -> HaltingRegion:
    """Box around ``encode(q_halt, t_out)`` with half-width ``3^-(m+2)``.

    The box holds exactly the halting encodings whose tape agrees with
    ``t_out`` on cells ``[-(m+2), m+1]``.
    """
    if not t_out.fits(-m, m):
        raise SupportTooWide(
            "Output support exceeds the matched window",
            {'window': m, 'required_window': max(abs(t_out.min_cell), abs(t_out.max_cell))},
        )
    center = encode_config(machine, Configuration(machine.q_halt, t_out))
    return HaltingRegion(center, Fraction(1, 3 ** (m + 2)), m, machine.n_states)


def in_region(region: HaltingRegion, p: SquarePoint) -> bool:
    return (abs(p.x - region.center.x) < region.half_width_x
            and abs(p.y - region.center.y) < region.half_width)


@dataclass(frozen=True)
class EquivalenceReport:
    input: Tape
    horizon: int
    window: int
    halts: bool
    steps: int
    output: Optional[Tape]
    hits: bool
    hit_index: Optional[int]
    agreement: bool

    def to_dict(self) -> Dict:
        return {
            'check': 'equivalence',
            'certifies': CERTIFIES['equivalence'],
            'input': self.input.to_dict(),
            'horizon': self.horizon,
            'window': self.window,
            'halts': self.halts,
            'steps': self.steps,
            'output': self.output.to_dict() if self.output is not None else None,
            'hits': self.hits,
            'hit_index': self.hit_index,
            'agreement': self.agreement,
        }


def check_turing_equivalence(machine: TuringMachine, tape: Tape, horizon: int, m: int,
                             G: Optional[GeneralizedShift] = None) -> EquivalenceReport:
    """Run the machine and iterate the shift from the same start; compare the outcomes."""
    outcome = run(machine, tape, horizon)
    G = G or compile_shift(machine)
    orbit = shift_orbit(G, encode_config(machine, Configuration(machine.q_init, tape)), horizon)

    if isinstance(outcome, Halted):
        region = halting_region(machine, outcome.output, m)
        hit_index = next((k for k, p in enumerate(orbit) if in_region(region, p)), None)
        hits = hit_index is not None
        # a conjugate orbit reaches the region exactly when the machine halts
        return EquivalenceReport(tape, horizon, m, True, outcome.steps, outcome.output,
                                 hits, hit_index, hit_index == outcome.steps)

    hit_index = next((k for k, p in enumerate(orbit) if in_halting_cylinder(machine, p)), None)
    hits = hit_index is not None
    return EquivalenceReport(tape, horizon, m, False, outcome.steps, None, hits, hit_index, not hits)


def sweep_equivalence(machine: TuringMachine, lo: int, hi: int, horizon: int,
                      m: int) -> Iterator[EquivalenceReport]:
    """Equivalence over every input supported in ``[lo, hi]``.

    Outputs wider than the window are re-checked with the smallest window that fits.
    """
    G = compile_shift(machine)
    for tape in all_tapes(lo, hi):
        try:
            yield check_turing_equivalence(machine, tape, horizon, m, G)
        except SupportTooWide as e:
            widened = e.details['required_window']
            logger.debug("Widening halting window", window=m, widened=widened)
            yield check_turing_equivalence(machine, tape, horizon, widened, G)
