"""Carleson-measure certificates for spaces of weighted discrete Hilbert transforms.

The engine evaluates boundedness, compactness and Hilbert-Schmidt criteria
for a measure described by finitely many components, and checks each
certificate against a brute-force embedding matrix.
"""

__version__ = "0.1.0"

from .criteria import (CheckOptions, Verdict, carleson_check, compactness_check,
                       corollary_regime, hs_check, quantity_sequences)
from .errors import (CarlesonError, EmptyRangeError, EvaluationError,
                     InvalidInstanceError, ParseError, PointOnGammaError)
from .measure import (Atom, AtomFamily, CircleUniform, Measure, RadialPower,
                      discretize, int_inv_sq_dist, int_inv_sq_modulus, mass)
from .oracle import build_embedding, spectral_summary, validate
from .space import (AnnulusPartition, CoefficientVector, Flag, GammaSequence,
                    SpacePair, WeightSequence, admissibility_report, annulus_of,
                    evaluate, kernel_eval, kernel_norm_sq, sparseness_report)
