"""rsedlab: simulation and verification toolkit for random subsystem-embedded
dynamics (RSED) -- pseudochaotic unitaries, their OTOCs, level statistics,
spectral form factors, coherence, and pseudorandom-state diagnostics."""

__version__ = "0.1.0"

from .bitcore import SystemShape, flip_bit, get_bit, join, split
from .randomness import (
    SignFunction,
    SubsetPermutation,
    bitflip_partner,
    count_seed_fixed_points,
    identity_permutation,
    load_permutation,
    sample_permutation,
    sample_sign_function,
    save_permutation,
    zero_sign_function,
)
from .rng import RngSeed
from .rsed import (
    PauliString,
    RsedOperator,
    StateVector,
    apply,
    apply_pauli,
    apply_power,
    dense_matrix,
    evolve_basis_state,
)
from .subsystem import (
    SubHamiltonian,
    SubUnitary,
    element_magnitude_stats,
    evolve,
    hadamard_layer,
    hadamard_sign_power,
    parent_hamiltonian,
    pauli_syk,
    random_sign_diag,
    random_sign_hadamard,
    unitary_power,
)
from .otoc import (
    OtocEstimate,
    early_time_slope,
    otoc_finite_temperature,
    otoc_pauli,
    otoc_zz_exact,
    otoc_zz_f_average,
    otoc_zz_f_variance_hadamard,
    otoc_zz_sampled,
    poisson_bracket,
)
from .spectra import (
    SpectrumReport,
    embed_spectrum,
    ks_distance,
    level_spacing_stats,
    rsed_sff,
    spectral_form_factor,
    wigner_dyson_pdf,
)
from .prs import (
    DensityMatrix,
    HadamardLayer,
    RandomClifford,
    TLayer,
    TypeVector,
    append_layer,
    coherence_rel_entropy,
    design_variance_condition,
    element_condition_check,
    entanglement_entropy,
    hybrid3_state,
    subset_phase_state,
    sym_projector_state,
    trace_distance,
)
from .circuits import (
    CircuitManifest,
    GateCircuit,
    build_manifest,
    parse,
    serialize,
    simulate_circuit,
    synthesize_rsed_circuit,
)
