"""
Queries limited to what observers comprehend
============================================

Conditional tables sit on models.  A query is answered only when the query,
the evidence and everything they depend on lie inside valid regions.
"""

from pathlib import Path

import potx
from potx.errors import OpaqueQuery
from potx.inference import brute_force_joint, infer

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

##############################################################################
# A two-state chain
# -----------------

chain = potx.load((CORPUS / "chain.potx").read_text())
print("P(B)          ", infer(chain, ["analyst"], {}, "B"))
print("P(A | B=high) ", infer(chain, ["analyst"], {"B": "high"}, "A"))
print("enumerated    ", brute_force_joint(chain, {}, "B"))

##############################################################################
# Engagement given fatigue
# ------------------------

graph = potx.load((CORPUS / "fig2.potx").read_text())
everyone = sorted(graph.observers)
print(infer(graph, everyone, {"physiological_fatigue": "tired"}, "work_engagement"))

##############################################################################
# Without h the same question has no answer.

try:
    infer(graph, ["g", "i"], {}, "work_engagement")
except OpaqueQuery as exc:
    print("refused:", exc)
