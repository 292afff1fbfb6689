"""
Walking through a perspective landscape
=======================================

Load the fatigue landscape from the corpus, classify it, list what each
observer comprehends and see which nodes drop out without the L4 observer.
"""

from pathlib import Path

import potx
from potx.classify import classify_all
from potx.transparency import check_all, opacity_map, transparent_region

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
graph = potx.load((CORPUS / "fig2.potx").read_text())

##############################################################################
# Perspectives and required levels
# --------------------------------
# Physical states sit on the extero side, nonphysical ones on the intro side.
# A model touching both is a bridge.

classes = classify_all(graph)
for mid, cls in classes.model_classes.items():
    print(f"{mid:<24} {cls.value:<7} needs L{classes.levels[mid]}")

##############################################################################
# Observers
# ---------
# Three observers are declared.  ``i`` sits inside ``g``, so its bridge is
# judged together with g's level 3.

for oid in sorted(graph.observers):
    region = transparent_region(graph, oid)
    print(oid, sorted(region.nodes))
print("violations:", check_all(graph))

##############################################################################
# Deploying only g and i
# ---------------------------

opacity = opacity_map(graph, ["g", "i"])
print("opaque:", sorted(opacity.opaque()))
