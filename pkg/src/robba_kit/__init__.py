"""Exact truncated p-adic series, sigma-modules, Frobenius solvers and a
constructive Quillen-Suslin engine over Tate algebras."""
from .errors import RobbaError
from .padic import AtLeast, OElem, RingConfig, guard_digits, sigma0_coeff, teichmuller
from .laurent import LaurentSeries, SigmaAction, Tag
from .sigma_module import NewtonEstimate, SigmaModule, newton_slopes
from .frobenius import SplitCertificate, TwistedSolution, solve_twisted, split_extension
from .tate import PolyRadius, Preparation, TateSeries, TjMap, tj_find, tj_transform, weierstrass_prepare
from .quillen_suslin import (KernelBasis, ReductionCertificate, complete_to_square, kernel_free_basis,
                             unimodular_reduce, verify_certificate)

__all__ = [
    "AtLeast",
    "KernelBasis",
    "LaurentSeries",
    "NewtonEstimate",
    "OElem",
    "PolyRadius",
    "Preparation",
    "ReductionCertificate",
    "RingConfig",
    "RobbaError",
    "SigmaAction",
    "SigmaModule",
    "SplitCertificate",
    "Tag",
    "TateSeries",
    "TjMap",
    "TwistedSolution",
    "complete_to_square",
    "guard_digits",
    "kernel_free_basis",
    "newton_slopes",
    "sigma0_coeff",
    "solve_twisted",
    "split_extension",
    "teichmuller",
    "tj_find",
    "tj_transform",
    "unimodular_reduce",
    "verify_certificate",
    "weierstrass_prepare",
]
__version__ = "0.1.0"
