"""Diffuse-interface continuum surface flux models for laser melt-pool heat transfer."""
from .delta import (CASES, InterpolationCase, PhasePair, correction_factor, delta_classical,
                    delta_scaled, density_scaled)
from .errors import InvalidInputError, SaturationError, SolverError
from .evaporation import (EvaporationModel, LaserModel, evaporative_cooling, mass_flux,
                          recoil_pressure)
from .fields import (DiffuseInterfaceParams, DiscreteField, MeltPool2D, Planar1D, closest_point,
                     indicator, interface_normal, signed_distance)
from .materials import TI64, MaterialSet
from .mesh import Cartesian2D, Interval1D

__version__ = "0.1.0"
