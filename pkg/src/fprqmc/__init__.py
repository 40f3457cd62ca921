"""Fokker-Planck particle method for rarefied gases with Array-RQMC sampling.

A 1-D kinetic particle simulator built on a linear drift / scalar diffusion
relaxation model, six interchangeable noise-sampling strategies (including
Array-RQMC with Morton-ordered Sobol' points), the four benchmark scenarios,
and a statistics harness measuring averaged-RMSE convergence versus particle
count.
"""

from .dynamics import (FPCoefficients, GasModel, Stepper, WallSpec,
                       em_update, equilibrium_coefficients, free_flight,
                       ou_update, relaxation_time, wall_interaction)
from .ensemble import (CellMoments, Grid1D, ParticleEnsemble, compute_moments,
                       initialize_anisotropic_cut, initialize_maxwellian,
                       moments_by_cell, reassign_cells)
from .morton import (grid_resolution, morton_decode, morton_encode,
                     normalize_velocity, radix_sort_keys)
from .rng import (PseudoStream, SobolGenerator, apply_digital_shift,
                  inverse_normal_cdf, pseudo_normal_block, shuffle,
                  sobol_next_block)
from .scenarios import (QUANTITIES, TABLE_QUANTITIES, ReferenceSolution,
                        ScenarioConfig, build_reference_inhomogeneous,
                        convergence_sweep, load_reference, make_config,
                        reference_relax_const, reference_relax_mckean,
                        run_repetition, run_scenario, run_uniform_demo,
                        save_reference)
from .stats import (ConvergenceRecord, averaged_rmse, build_record, fit_slope,
                    rmse_field)
from .strategies import (STRATEGY_NAMES, NoiseRequest, make_strategy)

__version__ = "0.1.0"
