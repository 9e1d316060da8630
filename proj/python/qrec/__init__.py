"""Python interface to the qrec toolkit."""

import json

from ._qrec import (
    CapExceeded,
    UsageError,
    VerificationError,
    __version__,
    certify_companion,
    determinant,
    experiments,
    fleeing_certificate,
    gamma0_identity,
    golden_convergent,
    hnf,
    hyperplane_fleeing,
    invariant_factors,
    mult_complexity,
    poly_sum_magnitude,
    qbound,
    quadform_image,
    rational_rank,
)
from ._qrec import run_json as _run_json


def run(experiment, **params):
    """Run a registered experiment and return its report as a dict."""
    return json.loads(_run_json(experiment, json.dumps(params)))


__all__ = [
    "CapExceeded",
    "UsageError",
    "VerificationError",
    "__version__",
    "certify_companion",
    "determinant",
    "experiments",
    "fleeing_certificate",
    "gamma0_identity",
    "golden_convergent",
    "hnf",
    "hyperplane_fleeing",
    "invariant_factors",
    "mult_complexity",
    "poly_sum_magnitude",
    "qbound",
    "quadform_image",
    "rational_rank",
    "run",
]
