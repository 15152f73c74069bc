"""latgauge: a 2D periodic lattice gauge toy model as a verifiable
numerical library.

Subpackage map:

- ``grid``: lattice geometry, field containers, discrete calculus
- ``spectral``: DFT convention, wave vectors, kernels G and D
- ``dynamics``: Hamiltonian, equations of motion, leapfrog, gauge moves
- ``gaussian``: Gaussian ground states, Coulomb background, energies
- ``matter``: qubit-per-site charges and ladder moves
- ``algebra``: exact operator algebra, local centers, edge terms
- ``fme``: the field-mediated entanglement protocol
- ``continuum``: large-lattice convergence checks
- ``cli``: the ``latgauge`` executable
"""

from .grid import (
    GridSpec,
    ScalarField,
    VectorField,
    curl_z,
    dbar,
    divergence,
    sum_by_parts_residual,
)
from .spectral import (
    FourierField,
    KernelTable,
    NonRealResult,
    WaveVector,
    build_kernels,
    dft_forward,
    dft_inverse,
    wave_vector,
)
from .dynamics import (
    PhaseSpaceState,
    SourceConfig,
    UnstableStep,
    constraint_residual,
    energy,
    eom_rhs,
    gauge_transform,
    step_leapfrog,
)
from .gaussian import (
    EnergyReport,
    GaussianFieldState,
    NonNeutralWarning,
    coulomb_energy_shift,
    coulomb_momentum,
    displace,
    evolve_phase,
    ground_energy,
    log_amplitude_p,
)
from .matter import (
    AnnihilatedState,
    MatterConfig,
    MatterSuperposition,
    apply_ladder,
    density,
    enumerate_sector,
)
from .algebra import (
    GeneratorSet,
    Label,
    LinearOperator,
    Region,
    b_operator,
    center_basis,
    commutator_scalar,
    constraint_operator,
    gauge_invariant_nullspace,
    is_gauge_invariant,
    local_generators,
    sector_label,
)
from .fme import (
    BranchState,
    NotDensityMatrix,
    NotSeparable,
    ProtocolSpec,
    ProtocolTrace,
    dressed_move,
    embezzlement_null_test,
    entanglement_increase,
    run_protocol,
    vn_entropy,
)
from .continuum import (
    ConvergenceSeries,
    d_log_check,
    g_scaling_check,
    kvec_convergence,
)

__version__ = "0.1.0"
