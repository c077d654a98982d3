"""Data models for machine and tape files using Pydantic for validation."""

import json
from typing import List, Literal

from pydantic import BaseModel, Field, field_validator, model_validator

from config.constants import INPUT_LIMITS
from services.tm_core import Tape, Transition, TuringMachine


class TransitionEntry(BaseModel):
    """One row ``(from, read) -> (to, write, shift)``."""

    source: str = Field(alias='from', min_length=1)
    read: Literal[0, 1]
    to: str = Field(min_length=1)
    write: Literal[0, 1]
    shift: Literal[-1, 0, 1]

    model_config = {"populate_by_name": True}


class MachineFile(BaseModel):
    """Machine description file."""

    states: List[str] = Field(min_length=2, max_length=INPUT_LIMITS['max_states'])
    q_init: str
    q_halt: str
    delta: List[TransitionEntry]

    @field_validator('states')
    def validate_states(cls, v):
        if len(set(v)) != len(v):
            raise ValueError("State names must be unique")
        return v

    @model_validator(mode='after')
    def check_states_known(self):
        if self.q_init not in self.states or self.q_halt not in self.states:
            raise ValueError("q_init and q_halt must be listed in states")
        return self

    def to_machine(self) -> TuringMachine:
        entries = tuple(((e.source, e.read), Transition(e.to, e.write, e.shift)) for e in self.delta)
        return TuringMachine(tuple(self.states), self.q_init, self.q_halt, entries)

    @classmethod
    def from_machine(cls, machine: TuringMachine) -> 'MachineFile':
        return cls.model_validate(machine.to_dict())

    def to_json(self) -> str:
        """Export as JSON string."""
        return json.dumps(self.model_dump(by_alias=True), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, json_str: str) -> 'MachineFile':
        """Create from JSON string."""
        return cls.model_validate_json(json_str)


class TapeFile(BaseModel):
    """Tape file: the cells holding a 1."""

    ones: List[int] = Field(default_factory=list, max_length=INPUT_LIMITS['max_tape_cells'])

    @field_validator('ones')
    def normalize_ones(cls, v):
        return sorted(set(v))

    def to_tape(self) -> Tape:
        return Tape.from_cells(self.ones)

    @classmethod
    def from_tape(cls, tape: Tape) -> 'TapeFile':
        return cls.model_validate(tape.to_dict())

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, json_str: str) -> 'TapeFile':
        return cls.model_validate_json(json_str)
