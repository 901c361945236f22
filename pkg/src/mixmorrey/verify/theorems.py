"""Registry of the boundedness statements checked by the harness.

Each statement lists operator configurations with a matched ``(phi1, phi2)``
pair and one violated pair used as a negative control.  The 1-D setting
uses ``q = 1.5`` and power families ``phi(r) = r^{-lambda}``; the symbol is
``b = ln|x|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PreconditionError
from ..gridfn import GridFunction, sample
from ..phicond import PhiFamily
from .corpus import CorpusSpec
from .harness import OperatorConfig, run_domination_check, run_theorem_check
from .report import VerificationReport

Q = 1.5
ALPHA = 0.25
#: lambda matched to the q-scaling of the source space
LAMBDA_1 = 0.5


@dataclass(frozen=True)
class Check:
    kind: str
    alpha: float
    lambda_2: float
    lambda_2_violated: float

    @property
    def is_commutator(self) -> bool:
        return self.kind.startswith("commutator")


THEOREMS: dict[str, tuple[Check, ...]] = {
    "maximal_and_cz": (
        Check("maximal", 0.0, LAMBDA_1, 0.0),
        Check("pv_kernel", 0.0, LAMBDA_1, 0.0),
    ),
    "maximal_and_cz_commutators": (
        Check("commutator_maximal", 0.0, LAMBDA_1, 0.0),
        Check("commutator_pv", 0.0, LAMBDA_1, 0.0),
    ),
    "riesz": (Check("riesz_potential", ALPHA, LAMBDA_1 - ALPHA, 0.75),),
    "riesz_commutator": (Check("commutator_riesz", ALPHA, LAMBDA_1 - ALPHA, 0.75),),
    "fractional_maximal": (
        Check("frac_maximal", ALPHA, LAMBDA_1 - ALPHA, 0.75),
        Check("commutator_maximal", ALPHA, LAMBDA_1 - ALPHA, 0.75),
    ),
}

#: Statements that also carry the pointwise ``M_alpha <= C I_alpha |.|`` check.
DOMINATION = {"fractional_maximal"}


def log_symbol(corpus: CorpusSpec) -> GridFunction:
    """``ln|x|`` (1-D) or ``ln|x_1|`` on the corpus base grid."""
    return sample(lambda *xs: np.log(np.abs(xs[0])), corpus.box, corpus.resolution)


def run_theorem(theorem_id: str, corpus: CorpusSpec | None = None, negative: bool = False) -> list[VerificationReport]:
    """All checks of one statement; ``negative`` swaps in the violated ``phi2``."""
    if theorem_id not in THEOREMS:
        raise PreconditionError(f"unknown theorem id {theorem_id!r}; known: {sorted(THEOREMS)}")
    corpus = corpus or CorpusSpec()
    symbol = None
    reports = []
    for chk in THEOREMS[theorem_id]:
        if chk.is_commutator and symbol is None:
            symbol = log_symbol(corpus)
        op = OperatorConfig(chk.kind, chk.alpha, symbol if chk.is_commutator else None)
        lam2 = chk.lambda_2_violated if negative else chk.lambda_2
        tag = "negative" if negative else "matched"
        rid = f"{theorem_id}:{chk.kind}:alpha={chk.alpha:g}:{tag}"
        reports.append(run_theorem_check(rid, op, Q, PhiFamily.power(LAMBDA_1), PhiFamily.power(lam2), corpus))
    if theorem_id in DOMINATION and not negative:
        reports.append(run_domination_check(f"{theorem_id}:domination:alpha={ALPHA:g}", ALPHA, corpus))
    return reports
