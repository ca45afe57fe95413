"""
Magnetic tunnel junction resistance model.

The MTJs in the sense-amplifier LUT are written once and never switched
during evaluation, so each device is a two-valued resistor: low in the
parallel state, high in the antiparallel state.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum

from config import MTJ_TABLE

logger = logging.getLogger(__name__)


class InvariantViolation(ValueError):
    """Raised when a device description breaks a physical invariant"""


class MtjState(Enum):
    PARALLEL = "parallel"
    ANTIPARALLEL = "antiparallel"

    def flipped(self):
        if self is MtjState.PARALLEL:
            return MtjState.ANTIPARALLEL
        return MtjState.PARALLEL


def tmr_ratio(r_p, r_ap):
    """Tunnel magnetoresistance ratio (R_AP - R_P) / R_P"""
    if r_p <= 0:
        raise ValueError(f"r_p must be positive, got {r_p}")
    return (r_ap - r_p) / r_p


def ellipse_area_um2(axis_a_nm, axis_b_nm):
    """Surface of an elliptical junction with the given axes, in µm²"""
    return math.pi / 4.0 * axis_a_nm * axis_b_nm * 1e-6


@dataclass(frozen=True)
class MtjParams:
    """Geometry and resistances of one junction (lengths in nm)"""
    free_layer_thickness: float = MTJ_TABLE['free_layer_thickness']
    axis_a: float = MTJ_TABLE['axis_a']
    axis_b: float = MTJ_TABLE['axis_b']
    oxide_thickness: float = MTJ_TABLE['oxide_thickness']
    tmr: float = MTJ_TABLE['tmr']
    resistance_area_product: float = MTJ_TABLE['resistance_area_product']
    r_parallel: float = MTJ_TABLE['r_parallel']
    r_antiparallel: float = MTJ_TABLE['r_antiparallel']

    def __post_init__(self):
        if not self.r_parallel > 0:
            raise InvariantViolation(f"r_parallel must be positive, got {self.r_parallel}")
        if not self.r_antiparallel > self.r_parallel:
            raise InvariantViolation(
                "r_antiparallel must exceed r_parallel "
                f"({self.r_antiparallel} <= {self.r_parallel})"
            )

    @property
    def computed_tmr(self):
        return tmr_ratio(self.r_parallel, self.r_antiparallel)

    @property
    def area_um2(self):
        return ellipse_area_um2(self.axis_a, self.axis_b)

    @property
    def ra_derived_r_parallel(self):
        """Parallel resistance implied by RA over the junction surface"""
        return self.resistance_area_product / self.area_um2

    def scaled(self, r_parallel):
        """Same device with both resistances scaled to a new R_P (TMR kept)"""
        factor = r_parallel / self.r_parallel
        return MtjParams(
            free_layer_thickness=self.free_layer_thickness,
            axis_a=self.axis_a,
            axis_b=self.axis_b,
            oxide_thickness=self.oxide_thickness,
            tmr=self.tmr,
            resistance_area_product=self.resistance_area_product,
            r_parallel=r_parallel,
            r_antiparallel=self.r_antiparallel * factor,
        )

    def consistency_report(self):
        """Stated vs derived quantities; the stored resistances stay authoritative"""
        derived = self.ra_derived_r_parallel
        report = {
            'stated_tmr': self.tmr,
            'computed_tmr': self.computed_tmr,
            'tmr_gap': self.computed_tmr - self.tmr,
            'r_parallel': self.r_parallel,
            'ra_derived_r_parallel': derived,
            'r_parallel_gap': (self.r_parallel - derived) / self.r_parallel,
        }
        if abs(report['tmr_gap']) > 0.01:
            logger.debug("Stated TMR %.3f differs from resistances (%.4f)",
                         self.tmr, self.computed_tmr)
        return report


def mtj_resistance(state, params):
    """Resistance of a junction in the given magnetization state"""
    if state is MtjState.PARALLEL:
        return params.r_parallel
    if state is MtjState.ANTIPARALLEL:
        return params.r_antiparallel
    raise ValueError(f"unknown MTJ state: {state!r}")
