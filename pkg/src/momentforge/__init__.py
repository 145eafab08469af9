"""momentforge: solve and verify truncated matricial Hamburger moment problems.

Core modules:
  matkit      pseudoinverse and matrix predicates
  seqkit      matrix sequences, block Hankel structure, the algebraic
              Schur-type algorithm, membership tests
  measures    finitely atomic matrix measures (exact oracles)
  herglotz    evaluable upper-half-plane matrix functions
  transforms  function-side transform pair, resolvent products, LFTs
  solver      solution-set parametrization, determinacy, parameter recovery
  verify      asymptotic residual checks and moment extraction

Frontends: ``momentforge.service`` (FastAPI app) and ``momentforge.cli``
(thin client over the service).
"""

from .errors import (
    ContractError,
    DomainError,
    MomentForgeError,
    NotExtendableError,
    NumericFailure,
    ShapeError,
    SingularLftError,
)
from .measures import MolecularMeasure, dirac, random_measure, zero_measure
from .seqkit import MatrixSeq, random_extendable_seq
from .solver import Problem, determinate_solution, open_problem, recover_parameter, solve
from .tolerances import DEFAULT, PROFILES, Tolerances

__version__ = "0.1.0"

__all__ = [
    "MomentForgeError",
    "ShapeError",
    "DomainError",
    "NumericFailure",
    "SingularLftError",
    "NotExtendableError",
    "ContractError",
    "MolecularMeasure",
    "dirac",
    "zero_measure",
    "random_measure",
    "MatrixSeq",
    "random_extendable_seq",
    "Problem",
    "open_problem",
    "solve",
    "determinate_solution",
    "recover_parameter",
    "Tolerances",
    "DEFAULT",
    "PROFILES",
    "__version__",
]
