import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import pandas as pd
from sklearn.linear_model import LinearRegression

from config import MEASURED_ENERGY_PJ, SWEEP_FREQUENCIES_MHZ

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnergyModelCoeffs:
    """E(f) = A·f + B/f + Γ with f in MHz and E in pJ"""
    adiabatic_coeff_A: float = 0.0
    leakage_coeff_B: float = 0.0
    constant_gamma: float = 0.0

    def __post_init__(self):
        for name in ('adiabatic_coeff_A', 'leakage_coeff_B', 'constant_gamma'):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    @property
    def optimum_frequency(self):
        """Frequency of minimum energy, sqrt(B/A), when both terms are present"""
        if self.adiabatic_coeff_A > 0 and self.leakage_coeff_B > 0:
            return math.sqrt(self.leakage_coeff_B / self.adiabatic_coeff_A)
        return None


def energy_per_cycle(coeffs, f):
    """Energy per cycle in pJ at f MHz (scalar or array)"""
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0):
        raise ValueError("frequency must be positive")
    e = coeffs.adiabatic_coeff_A * f_arr + coeffs.leakage_coeff_B / f_arr + coeffs.constant_gamma
    return float(e) if e.ndim == 0 else e


class EnergyModel:
    """Least-squares fit of the per-cycle energy model"""

    def __init__(self, fit_adiabatic=True, fit_leakage=True, fit_constant=True):
        if not (fit_adiabatic or fit_leakage or fit_constant):
            raise ValueError("at least one term must be fitted")
        self.fit_adiabatic = fit_adiabatic
        self.fit_leakage = fit_leakage
        self.fit_constant = fit_constant
        self.model = None
        self.coeffs = None

    @property
    def n_params(self):
        return int(self.fit_adiabatic) + int(self.fit_leakage) + int(self.fit_constant)

    def _features(self, freqs):
        """Design matrix for the fitted frequency terms"""
        freqs = np.asarray(freqs, dtype=float)
        columns = {}
        if self.fit_adiabatic:
            columns['f'] = freqs
        if self.fit_leakage:
            columns['inv_f'] = 1.0 / freqs
        return pd.DataFrame(columns)

    def fit(self, points):
        """Fit on (MHz, pJ) pairs; exact when there are as many points as terms"""
        df = pd.DataFrame(list(points), columns=['freq_mhz', 'energy_pj'])
        if len(df) < self.n_params:
            raise ValueError(f"need at least {self.n_params} points, got {len(df)}")
        if df['freq_mhz'].duplicated().any():
            raise ValueError("duplicate frequencies in calibration points")
        if (df['freq_mhz'] <= 0).any():
            raise ValueError("calibration frequencies must be positive")
        if (df['energy_pj'] < 0).any():
            raise ValueError("calibration energies must be non-negative")

        X = self._features(df['freq_mhz'])
        y = df['energy_pj'].to_numpy()
        if X.shape[1] == 0:
            # Constant-only model
            self.coeffs = EnergyModelCoeffs(constant_gamma=float(y.mean()))
            return self

        self.model = LinearRegression(fit_intercept=self.fit_constant, positive=True)
        self.model.fit(X, y)
        terms = dict(zip(X.columns, self.model.coef_))
        gamma = float(self.model.intercept_) if self.fit_constant else 0.0
        if gamma < 0:
            raise ValueError(f"fit produced a negative constant term ({gamma:.4g} pJ)")
        self.coeffs = EnergyModelCoeffs(
            adiabatic_coeff_A=float(terms.get('f', 0.0)),
            leakage_coeff_B=float(terms.get('inv_f', 0.0)),
            constant_gamma=gamma,
        )
        residual = y - energy_per_cycle(self.coeffs, df['freq_mhz'].to_numpy())
        logger.debug("Energy model fitted: %s (max residual %.3g pJ)",
                     self.coeffs, float(np.max(np.abs(residual))))
        return self

    def predict(self, freqs):
        if self.coeffs is None:
            raise RuntimeError("energy model not fitted yet")
        return energy_per_cycle(self.coeffs, freqs)


def calibrate_energy_model(points, fit_adiabatic=True, fit_constant=True):
    """
    Fit EnergyModelCoeffs to (MHz, pJ) points.

    Three points give an exact A/B/Γ interpolation. Two-coefficient fits pin
    either A (fit_adiabatic=False, conventional logic) or Γ (fit_constant=False)
    to zero.
    """
    return EnergyModel(fit_adiabatic=fit_adiabatic, fit_constant=fit_constant).fit(points).coeffs


@lru_cache(maxsize=None)
def default_coeffs(family):
    """Coefficients calibrated on the measured per-cycle energies"""
    table = MEASURED_ENERGY_PJ[family]
    if family == 'cmos':
        points = [(f, table[f]) for f in (5.0, 50.0)]
        return calibrate_energy_model(points, fit_adiabatic=False)
    points = [(f, table[f]) for f in (5.0, 12.5, 50.0)]
    return calibrate_energy_model(points)


def reduction_pct(cmos_pj, adiabatic_pj):
    return 100.0 * (cmos_pj - adiabatic_pj) / cmos_pj


def energy_sweep(freqs_mhz=None, cmos=None, adiabatic=None):
    """Energy per cycle of both families and the relative saving"""
    freqs = np.asarray(freqs_mhz if freqs_mhz is not None else SWEEP_FREQUENCIES_MHZ, dtype=float)
    if freqs.size == 0:
        raise ValueError("at least one frequency is required")
    cmos = cmos or default_coeffs('cmos')
    adiabatic = adiabatic or default_coeffs('adiabatic-mtj')
    df = pd.DataFrame({'freq_mhz': freqs})
    df['cmos_pj'] = energy_per_cycle(cmos, freqs)
    df['adiabatic_pj'] = energy_per_cycle(adiabatic, freqs)
    df['reduction_pct'] = reduction_pct(df['cmos_pj'], df['adiabatic_pj'])
    return df
