"""Active-RIS secure transmission: power-minimizing beamformer and reflection design.

Subpackages cover seeded channel simulation, deterministic rate/power
evaluation, a dense Hermitian SDP solver, the two penalty-based SCA
subproblem solvers, the alternating-minimization outer loop, and the
scenario harness behind the ``ris-secrecy`` command.
"""

__version__ = "0.1.0"
