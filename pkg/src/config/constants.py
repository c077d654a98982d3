"""Application constants and numerical defaults."""

# Tolerances: structural identities at double-precision noise, then one
# order of magnitude per derivative level.
TOLERANCES = {
    'structural': 1e-10,
    'first_derivative': 1e-7,
    'second_derivative': 1e-6,
    'reeb_conditions': 1e-12,
    'flat_outside': 1e-12,
    'momentum': 1e-6,
    'divergence': 1e-8,
    'symmetry': 1e-8,
    'return_map': 1e-6,
    'return_time': 1e-9,
    'area': 1e-8,
    'gauge_residual': 1e-7,
    'gauge_potential': 1e-8,
    'cohomology': 1e-9,
    'closed': 1e-10,
    'vanishing': 1e-12,
    'finite_difference': 1e-6,
}

SAMPLE_COUNTS = {
    'first_order': 10_000,
    'second_order': 1_000,
    'positivity': 100_000,
    'outside': 1_000,
    'seeds': 100,
}

# Default nested tori on the flat 3-torus, centered on the circle (1/2, 1/2) x S^1.
DEFAULT_RADII = {
    'r0': 0.15,
    'rT': 0.25,
    'r1': 0.35,
    'rD0': 0.12,
    'center': (0.5, 0.5),
}

INTEGRATOR_DEFAULTS = {
    'method': 'DOP853',
    'rtol': 1e-9,
    'atol': 1e-9,
    'transversality_margin': 1e-6,
    'max_period_factor': 10.0,
}

DEFAULT_VISCOSITIES = (0.0, 0.1, 1.0)

# Finite-difference step for the derivative cross-check.
FD_STEP = 1e-5

# Gauss-Legendre nodes for line integrals of 1-forms.
QUADRATURE_NODES = 48

# What each named check certifies; embedded in every report.
CERTIFIES = {
    'cosymplectic': 'closed pair (alpha, beta) with alpha ^ beta a volume form',
    'deformation': 'beta_tilde closed, equal to beta outside T, alpha ^ beta_tilde > 0',
    'metric': 'star_g alpha = beta_tilde and g equals the ambient metric outside T',
    'harmonicity': 'alpha and star alpha closed, hence alpha harmonic',
    'ns': 'harmonic field solves stationary Navier-Stokes with p = -|X|^2/2 for every viscosity',
    'symmetry': 'd alpha = 0 gives g(nabla_Y X, Z) = g(nabla_Z X, Y) and nabla_X X = grad |X|^2/2',
    'return-map': 'time-c return map of the Reeb field to D0 x {0} equals the disk map',
    'gauge': 'G(q, t) = (q, t + g/c) pulls c dt back to alpha with det DG > 0',
    'area': 'the time-one Hamiltonian disk map preserves area',
    'equivalence': 'machine halts with output t iff the orbit enters the halting region',
    'locality': 'g_tilde, beta_tilde, X_tilde and p agree with the ambient values outside T',
}

# CLI exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_STILL_RUNNING = 2

# Input file limits
INPUT_LIMITS = {
    'max_file_size': 5 * 1024 * 1024,
    'max_states': 4096,
    'max_tape_cells': 1_000_000,
}
