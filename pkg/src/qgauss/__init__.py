"""Numerics for q-Gaussian processes: q-Fock space, Wick products, q-Hermite
polynomials, transition kernels and a path sampler for the classical version."""
from .fock import FockBasis, FockOperator, annihilation, creation, gram, moment, omega, vacuum_expectation
from .kernels import FermionicKernel, TransitionKernel, alpha, fermionic_kernel
from .processes import CovarianceSpec, as_covariance, embed, is_markov, lambdas
from .qcore import pochhammer, q_binomial, q_factorial, q_int
from .qhermite import gauss_quadrature, hermite, mehler, nu_density
from .sampler import PathEnsemble, classical_version_report, sample_marginal, sample_paths
from .wick import wick_from_splittings, wick_power, wick_recursive

__all__ = [
    "FockBasis", "FockOperator", "annihilation", "creation", "gram", "moment", "omega",
    "vacuum_expectation", "FermionicKernel", "TransitionKernel", "alpha", "fermionic_kernel",
    "CovarianceSpec", "as_covariance", "embed", "is_markov", "lambdas", "pochhammer", "q_binomial",
    "q_factorial", "q_int", "gauss_quadrature", "hermite", "mehler", "nu_density", "PathEnsemble",
    "classical_version_report", "sample_marginal", "sample_paths", "wick_from_splittings",
    "wick_power", "wick_recursive",
]
