"""Phase-stabilized optical lattice fields, Bloch-band tunneling widths and
Voigt-composite Rayleigh-peak fitting for single trapped atoms."""

__version__ = "0.1.0"

from .band_structure import (BlochBand, LatticeDepth, band_energies, bandwidth, bloch_band,
                             depth_from_oscillation, tunneling_linewidths)
from .fitting import (FitConfig, FitResult, JointFitResult, Spectrum, derived_parameters,
                      fit_constant_depletion, fit_single_atom, fwhm_curve, synth_spectrum)
from .lattice_field import (BeamConfig, beam_field, characterize_well, envelope, find_minima,
                            intensity, potential_grid, total_field, verify_factorization)
from .lineshape import (ComponentParams, CompositeParams, compose_gamma, compose_sigma, fwhm,
                        gaussian, lorentzian, model_fwhm, olivero_fwhm, rayleigh_lineshape, voigt,
                        voigt_fwhm)
from .population import (PopulationWeights, TemperatureModel, composite_weights,
                         population_ratio, temperature)
