"""Certified computation of all real Z- and H-eigenvalues of real tensors."""

__version__ = "0.1.0"

from .driver import (Eigenpair, Spectrum, SweepOptions, Termination,
                     check_isolated, full_sweep, h_count_bound, h_system,
                     next_eigenvalue, polish_eigenpair, smallest_eigenvalue,
                     z_system)
from .extract import AtomicMeasure, ExtractionError, extract_atoms, flat_truncation, numerical_rank
from .momentsdp import (ConicProblem, MomentVector, assemble_matrix,
                        build_max_relaxation, build_min_relaxation,
                        localizing_structure, moment_structure,
                        moment_vector_of_point)
from .oracle import OracleResult, brute_h_n2, brute_z_n2, companion_roots
from .poly import Polynomial, basis_size, monomial_rank, monomial_unrank, tensor_to_poly, tensor_to_poly_vector
from .sdpsolver import ConicSolution, SolveStatus, SolverOptions, solve, verify_solution
from .tensor import (Tensor, TensorFormatError, contract_full,
                     contract_partial, identity_tensor, parse_tensor,
                     serialize_tensor)
