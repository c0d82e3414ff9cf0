"""Exact disorder-averaged spectra for tight-binding graphs and a single-mode
cavity, built on the Cauchy-noise identity: ensemble-averaging the resolvent
over independent Cauchy site energies equals one deterministic evaluation of
the clean Hamiltonian with -i*gamma on the disordered diagonal."""

from .cavity import (CavityParams, PolaritonPoles, absorption, delta_rho_m,
                     delta_rho_t, g_cc, g_mol_mol, polariton_poles, rho_c,
                     self_energy)
from .engine import (EigenSystem, GreensEvaluation, SpectralGrid,
                     averaged_greens, default_eta, diagonalize, site_dos,
                     solve_greens, total_dos)
from .lattice import (DisorderSpec, Distribution, Family, HamiltonianSpec,
                      Topology, adjacency, assemble_cavity, assemble_huckel,
                      build_topology)
from .montecarlo import (EnsembleConfig, EnsembleResult, ensemble_average,
                         estimate_peak_width, make_rng, sample_disorder)
from .quadrature import (Window, auto_window, find_peaks, integrate_trapezoid)

__version__ = "0.1.0"

__all__ = [
    "CavityParams", "PolaritonPoles", "absorption", "delta_rho_m",
    "delta_rho_t", "g_cc", "g_mol_mol", "polariton_poles", "rho_c",
    "self_energy",
    "EigenSystem", "GreensEvaluation", "SpectralGrid", "averaged_greens",
    "default_eta", "diagonalize", "site_dos", "solve_greens", "total_dos",
    "DisorderSpec", "Distribution", "Family", "HamiltonianSpec", "Topology",
    "adjacency", "assemble_cavity", "assemble_huckel", "build_topology",
    "EnsembleConfig", "EnsembleResult", "ensemble_average",
    "estimate_peak_width", "make_rng", "sample_disorder",
    "Window", "auto_window", "find_peaks", "integrate_trapezoid",
    "__version__",
]
