"""
Unit tests for Turing machines, tapes and binary machine descriptions.
"""

import numpy as np
import pytest

from services.tm_core import (SAMPLE_MACHINES, Configuration, Halted, StillRunning, Tape, TuringMachine,
                              all_tapes, decode_machine, decode_machine_prefix, encode_machine, juxtapose,
                              machine_bits, program_input, random_machine, random_tape, run, spin_machine,
                              split_tape, step, trace)
from utils.errors import HaltedConfiguration, MachineDefinitionError, MachineError, OverlapError, TapeFormatError


@pytest.mark.unit
class TestTape:
    """Finite-support tapes."""

    def test_read_write(self):
        tape = Tape().write(3, 1).write(-2, 1)
        assert tape.read(3) == 1
        assert tape.read(-2) == 1
        assert tape.read(0) == 0
        assert tape.write(3, 0).ones == frozenset({-2})

    def test_shift_moves_content(self):
        tape = Tape.from_cells([0, 5])
        shifted = tape.shifted(1)
        # t'_i = t_{i+1}
        assert shifted.ones == frozenset({-1, 4})
        assert tape.shifted(0) is tape
        assert shifted.shifted(-1) == tape

    def test_window_and_bounds(self):
        tape = Tape.from_bits([1, 0, 1], offset=-1)
        assert tape.window(-2, 2) == (0, 1, 0, 1, 0)
        assert tape.min_cell == -1
        assert tape.max_cell == 1
        assert tape.fits(-1, 1)
        assert not tape.fits(0, 1)
        assert Tape().is_blank
        assert Tape().min_cell is None

    def test_to_dict_is_sorted(self):
        assert Tape.from_cells([4, -3, 0]).to_dict() == {'ones': [-3, 0, 4]}

    def test_all_tapes_enumerates_every_support(self):
        tapes = list(all_tapes(-1, 1))
        assert len(tapes) == 8
        assert len(set(tapes)) == 8
        assert all(t.fits(-1, 1) for t in tapes if not t.is_blank)


@pytest.mark.unit
class TestTuringMachine:
    """Machine construction and validation."""

    def test_initial_state_gets_index_zero(self):
        machine = TuringMachine.build(
            ['qh', 'a', 'b'], 'b', 'qh',
            {('a', 0): ('qh', 0, 0), ('a', 1): ('b', 1, 1),
             ('b', 0): ('a', 1, -1), ('b', 1): ('qh', 0, 0)},
        )
        assert machine.states[0] == 'b'
        assert machine.index('b') == 0
        assert machine.n_states == 3

    def test_non_total_transition_rejected(self):
        with pytest.raises(MachineDefinitionError) as excinfo:
            TuringMachine.build(['q0', 'qh'], 'q0', 'qh', {('q0', 0): ('qh', 1, 0)})
        assert excinfo.value.details['missing'] == [['q0', 1]]

    def test_halting_state_transitions_rejected(self):
        with pytest.raises(MachineDefinitionError):
            TuringMachine.build(
                ['q0', 'qh'], 'q0', 'qh',
                {('q0', 0): ('qh', 1, 0), ('q0', 1): ('qh', 0, 0), ('qh', 0): ('q0', 0, 0)},
            )

    def test_invalid_shift_rejected(self):
        with pytest.raises(MachineDefinitionError):
            TuringMachine.build(['q0', 'qh'], 'q0', 'qh',
                                {('q0', 0): ('qh', 1, 2), ('q0', 1): ('qh', 0, 0)})

    def test_init_equal_to_halt_rejected(self):
        with pytest.raises(MachineDefinitionError):
            TuringMachine.build(['q0', 'q1'], 'q0', 'q0', {})

    def test_to_dict_layout(self, flip):
        data = flip.to_dict()
        assert data['q_init'] == 'q0'
        assert data['delta'][0] == {'from': 'q0', 'read': 0, 'to': 'qh', 'write': 1, 'shift': 0}


@pytest.mark.unit
class TestExecution:
    """Global transition function and bounded runs."""

    def test_flip_halts_in_one_step(self, flip):
        outcome = run(flip, Tape(), 10)
        assert isinstance(outcome, Halted)
        assert outcome.steps == 1
        assert outcome.output.ones == frozenset({0})

    def test_zseek_crosses_block(self, zseek):
        outcome = run(zseek, Tape.from_cells([0, 1, 2]), 50)
        assert outcome.halted
        assert outcome.steps == 4
        assert outcome.output.ones == frozenset({-3, -2, -1})

    def test_bounce_halts_on_one_in_cell_one(self, bounce):
        outcome = run(bounce, Tape.from_cells([1]), 10)
        assert outcome.halted
        assert outcome.steps == 2
        assert outcome.output.ones == frozenset({0})

    def test_bounce_runs_forever_on_blank(self, bounce):
        outcome = run(bounce, Tape(), 25)
        assert isinstance(outcome, StillRunning)
        assert outcome.steps == 25
        assert outcome.to_dict()['status'] == 'running'

    def test_zero_horizon(self, flip):
        outcome = run(flip, Tape(), 0)
        assert not outcome.halted
        assert outcome.steps == 0

    def test_negative_horizon_rejected(self, flip):
        with pytest.raises(MachineError):
            run(flip, Tape(), -1)

    def test_step_on_halted_configuration(self, flip):
        with pytest.raises(HaltedConfiguration):
            step(flip, Configuration('qh', Tape()))

    def test_trace_ends_at_halt(self, zseek):
        configs = list(trace(zseek, Tape.from_cells([0]), 100))
        assert configs[0].state == 'q0'
        assert configs[-1].state == 'qh'
        assert len(configs) == 3

    def test_render_brackets_head(self):
        text = Configuration('q0', Tape.from_cells([0, 1])).render(-1, 1)
        assert text == 'q0: 0 [1] 1'

    def test_sample_library(self):
        assert set(SAMPLE_MACHINES) == {'flip', 'zseek', 'bounce', 'spin'}
        assert not run(spin_machine(), Tape(), 100).halted
        assert run(spin_machine(), Tape.from_cells([0]), 100).halted


@pytest.mark.unit
class TestMachineEncoding:
    """Self-delimiting binary machine descriptions."""

    def test_flip_bits(self, flip):
        # unary 2, separator, halt index 1, then (target, write, shift code) per entry
        assert machine_bits(flip) == [1, 1, 0, 1, 1, 1, 0, 0, 1, 0, 0, 0]

    def test_decode_recovers_machine(self, rng):
        for _ in range(25):
            machine = random_machine(rng)
            decoded = decode_machine(encode_machine(machine))
            assert decoded.signature() == machine.signature()

    def test_prefix_length_matches_description(self, bounce):
        tape = program_input(bounce, Tape.from_cells([0, 2]))
        machine, length = decode_machine_prefix(tape)
        assert length == len(machine_bits(bounce))
        assert machine.signature() == bounce.signature()

    def test_decode_rejects_trailing_bits(self, flip):
        tape = Tape(encode_machine(flip).ones | {40})
        with pytest.raises(TapeFormatError):
            decode_machine(tape)

    def test_decode_rejects_too_few_states(self):
        with pytest.raises(TapeFormatError):
            decode_machine(Tape.from_cells([0]))
        with pytest.raises(TapeFormatError):
            decode_machine(Tape())

    def test_decode_rejects_bad_shift_code(self):
        # two states, halt index 1, first entry shift code (1, 1)
        bits = [1, 1, 0, 1, 1, 1, 1, 1]
        with pytest.raises(TapeFormatError):
            decode_machine_prefix(Tape.from_bits(bits))


@pytest.mark.unit
class TestJuxtaposition:
    """Tape concatenation at a split cell."""

    def test_split_inverts_juxtapose(self):
        left, right = Tape.from_cells([-2, 0, 3]), Tape.from_cells([0, 5])
        joined = juxtapose(left, right, 4)
        assert joined.ones == frozenset({-2, 0, 3, 4, 9})
        assert split_tape(joined, 4) == (left, right)

    def test_overlap_rejected(self):
        with pytest.raises(OverlapError):
            juxtapose(Tape.from_cells([4]), Tape(), 4)
        with pytest.raises(OverlapError):
            juxtapose(Tape(), Tape.from_cells([-1]), 4)

    def test_random_tape_respects_bounds(self, rng):
        tape = random_tape(rng, -3, 3)
        assert tape.is_blank or tape.fits(-3, 3)
        assert isinstance(rng, np.random.Generator)
