"""Pseudospectral lower bounds on the transient growth of matrix semigroups.

Core objects live in :mod:`.linop` (operators, eigensolver, exponential,
resolvents) and :mod:`.growth` (envelopes and resolvent bounds). The model
catalog, the discrete critical Schrodinger family, eigenvector-span
restrictions and the regularised family sit in their own modules.
"""
from .errors import *  # noqa: F401,F403
from .linop import (
    EigenDecomposition,
    MatrixOperator,
    expm,
    op_norm,
    resolvent,
    resolvent_norm,
    resolvent_norms,
    symtri_eig,
)
from .growth import (
    NormCurve,
    ResolventProfile,
    c_profile,
    concave_envelope,
    dyadic_grid,
    growth_constants,
    hat_c_bound,
    kreiss_constant,
    legendre,
    legendre_invert,
    log_norm,
    lower_bound_curve,
    lower_bound_single,
    pseudo_abscissa,
    running_sup,
    spectral_abscissa,
    tw_lower_bound,
)
from .models import MODEL_IDS, SemigroupModel, get_model

__version__ = "0.1.0"
