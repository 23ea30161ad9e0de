"""Time evolution for the Schrodinger, fluid, geodesic and filament systems."""

from .trajectory import SolverError, Trajectory, rk4_step, step_schedule
from .schrodinger import (
    NLSParams,
    Nonlinearity,
    barotropic_nls_hamiltonian,
    kinetic_gap,
    nls_evolve,
    nls_hamiltonian,
)
from .hydro import hydro_evolve, hydro_hamiltonian
from .geodesics import (
    GeodesicState,
    HS2State,
    hs2_evolve,
    hs2_from_sfr,
    lenells_map,
    sfr_geodesic_evolve,
)
from .filament import (
    ClosedCurve3D,
    FrenetData,
    ImmersionError,
    TorsionWindingError,
    filament_evolve,
    frenet,
    hasimoto,
    willmore_energy,
)
from .compressible import (
    CompressibleState,
    InternalEnergy2,
    compressible2_evolve,
    fluid_hamiltonian,
    spinor_evolve,
    spinor_hamiltonian,
)
