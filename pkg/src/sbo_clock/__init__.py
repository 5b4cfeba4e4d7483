"""Floquet-driven optical lattice clock: SBO spectroscopy and gravimetry."""

__version__ = "0.1.0"

from .ensemble import (ModePoint, ThermalEnsemble, build_ensemble,
                       shift_ensemble_energy_reference)
from .errors import (ConfigError, DegeneratePreparationError, DomainError,
                     GridSizeError, NumericsError, QuadratureError,
                     SboClockError, SboValidityWarning)
from .floquet import (bessel_j, detuning_amplitude, dispersion, effective_f1,
                      effective_hopping, generalized_detuning, hopping_factor,
                      hopping_factor_quadrature, rabi_factor,
                      rabi_factor_quadrature, wrap_angle)
from .kernels import backend_name
from .metrology import (FisherQuery, FisherScanResult, GravityResult,
                        OptimalTime, endpoint_accuracy, find_optimal_time,
                        fisher_information, fisher_scan,
                        force_freq_from_gravity, gravity_convert)
from .params import (AtomSpecies, CosineWave, DriveConfig,
                     LatticeEnsembleConfig, PulseConfig, TabulatedWave,
                     strontium_87)
from .spectroscopy import (PreparedState, ProtocolConfig, ProtocolEvaluator,
                           Spectrum, TimeTrace, prepare, protocol_pg,
                           quasimomentum_shift, rabi_excitation,
                           thermal_spectrum)

__all__ = [
    "__version__",
    "AtomSpecies", "CosineWave", "TabulatedWave", "DriveConfig",
    "LatticeEnsembleConfig", "PulseConfig", "strontium_87",
    "bessel_j", "hopping_factor", "hopping_factor_quadrature", "rabi_factor",
    "rabi_factor_quadrature", "effective_f1", "effective_hopping",
    "dispersion", "detuning_amplitude", "generalized_detuning", "wrap_angle",
    "ModePoint", "ThermalEnsemble", "build_ensemble",
    "shift_ensemble_energy_reference",
    "Spectrum", "TimeTrace", "PreparedState", "ProtocolConfig",
    "ProtocolEvaluator", "rabi_excitation", "thermal_spectrum", "prepare",
    "quasimomentum_shift", "protocol_pg",
    "FisherQuery", "FisherScanResult", "OptimalTime", "GravityResult",
    "fisher_information", "fisher_scan", "find_optimal_time",
    "gravity_convert", "force_freq_from_gravity", "endpoint_accuracy",
    "backend_name",
    "SboClockError", "ConfigError", "DomainError", "QuadratureError",
    "NumericsError", "DegeneratePreparationError", "GridSizeError",
    "SboValidityWarning",
]
