"""Descriptor models for isotopies, builds and gauge runs."""

import json
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from config.constants import DEFAULT_RADII, DEFAULT_VISCOSITIES
from monitoring.checks import CheckContext
from services.gluing import NestedTori
from services.suspension import (HamiltonianIsotopy, polynomial_isotopy, rotation_isotopy, shear_isotopy,
                                 zero_isotopy)


class _JsonModel(BaseModel):
    model_config = {"extra": "forbid"}

    def to_json(self) -> str:
        """Export as JSON string with sorted keys."""
        return json.dumps(self.model_dump(mode='json'), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, json_str: str):
        return cls.model_validate_json(json_str)


class IsotopyDescriptor(_JsonModel):
    """Named Hamiltonian profile with its parameters."""

    profile: Literal['rotation', 'shear', 'custom-polynomial', 'zero'] = 'rotation'
    omega: float = Field(default=1.0, ge=-50.0, le=50.0)
    amplitude: float = Field(default=0.5, ge=-50.0, le=50.0)
    coefficients: Dict[str, float] = Field(default_factory=dict)
    r_a: float = Field(default=0.4, gt=0.0)
    r_h: float = Field(default=0.8, gt=0.0)
    t_window: Tuple[float, float] = (0.2, 0.8)
    disk_radius: float = Field(default=1.0, gt=0.0)
    c: float = Field(default=1.0, gt=0.0)

    @field_validator('coefficients')
    def validate_coefficients(cls, v):
        for key in v:
            parts = key.split(',')
            if len(parts) != 2 or not all(p.strip().isdigit() for p in parts):
                raise ValueError(f"Coefficient key '{key}' must look like 'i,j' with non-negative integers")
        return v

    @model_validator(mode='after')
    def check_geometry(self):
        if not self.r_a < self.r_h < self.disk_radius:
            raise ValueError("Radii must satisfy r_a < r_h < disk_radius")
        t_a, t_b = self.t_window
        if not 0.0 < t_a < t_b < 1.0:
            raise ValueError("t_window must satisfy 0 < t_a < t_b < 1")
        if self.profile == 'custom-polynomial' and not self.coefficients:
            raise ValueError("custom-polynomial needs at least one coefficient")
        return self

    def to_isotopy(self) -> HamiltonianIsotopy:
        if self.profile == 'zero':
            return zero_isotopy(self.disk_radius)
        if self.profile == 'rotation':
            return rotation_isotopy(self.omega, self.r_a, self.r_h, self.t_window, self.disk_radius)
        if self.profile == 'shear':
            return shear_isotopy(self.amplitude, self.r_a, self.r_h, self.t_window, self.disk_radius)
        coefficients = {tuple(int(p) for p in key.split(',')): c for key, c in self.coefficients.items()}
        return polynomial_isotopy(coefficients, self.r_a, self.r_h, self.t_window, self.disk_radius)


class RadiiModel(_JsonModel):
    r0: float = DEFAULT_RADII['r0']
    rT: float = DEFAULT_RADII['rT']
    r1: float = DEFAULT_RADII['r1']
    rD0: float = DEFAULT_RADII['rD0']
    center: Tuple[float, float] = DEFAULT_RADII['center']

    def to_tori(self) -> NestedTori:
        return NestedTori(self.r0, self.rT, self.r1, self.rD0, self.center)


class SamplesModel(_JsonModel):
    first_order: Optional[int] = Field(default=None, gt=0)
    second_order: Optional[int] = Field(default=None, gt=0)
    positivity: Optional[int] = Field(default=None, gt=0)
    outside: Optional[int] = Field(default=None, gt=0)
    seeds: Optional[int] = Field(default=None, gt=0)


class BuildDescriptor(_JsonModel):
    """Everything a build needs; its canonical JSON is the structure store key."""

    c: float = Field(default=1.0, gt=0.0)
    radii: RadiiModel = Field(default_factory=RadiiModel)
    isotopy: Union[IsotopyDescriptor, str] = Field(default_factory=IsotopyDescriptor)
    nu_list: List[float] = Field(default_factory=lambda: list(DEFAULT_VISCOSITIES))
    samples: SamplesModel = Field(default_factory=SamplesModel)
    tolerance: Optional[float] = Field(default=None, gt=0.0)
    seed: int = Field(default=0, ge=0)

    @field_validator('nu_list')
    def validate_viscosities(cls, v):
        if not v or any(nu < 0 for nu in v):
            raise ValueError("nu_list must be a non-empty list of non-negative viscosities")
        return v

    def resolve(self, base_dir: Optional[Path] = None) -> 'BuildDescriptor':
        """Replace an isotopy file reference by its contents."""
        if isinstance(self.isotopy, IsotopyDescriptor):
            return self
        path = Path(self.isotopy)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        return self.model_copy(update={'isotopy': IsotopyDescriptor.from_json(path.read_text())})

    def to_context(self) -> CheckContext:
        overrides = {
            'first_order_samples': self.samples.first_order,
            'second_order_samples': self.samples.second_order,
            'positivity_samples': self.samples.positivity,
            'outside_samples': self.samples.outside,
            'seeds': self.samples.seeds,
        }
        context = CheckContext(seed=self.seed, tolerance=self.tolerance)
        for key, value in overrides.items():
            if value is not None:
                setattr(context, key, value)
        return context


class GaugeDescriptor(_JsonModel):
    """Manufactured ``alpha = c dt + d(eps sin(2 pi t) chi)`` on a solid torus."""

    c: float = Field(default=1.0, gt=0.0)
    epsilon: float = Field(default=0.01, ge=0.0)
    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = Field(default=1.0, gt=0.0)
    samples: Optional[int] = Field(default=None, gt=0)
    seed: int = Field(default=0, ge=0)
