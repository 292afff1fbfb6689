"""
Finding and closing transparency gaps
=====================================

Both scenario fixtures deploy observers that stop at level 3 or below, so
their intro targets come out as gaps.
"""

from pathlib import Path

import potx
from potx.recipe import analyze_gaps, apply_suggestions, machine_lines

CORPUS = Path(__file__).resolve().parents[1] / "corpus"

##############################################################################
# Machine training
# ----------------

learning = potx.load((CORPUS / "scenario1.potx").read_text())
report = analyze_gaps(learning, ["supervisor_l3"])
for gap, s in zip(report.gaps, report.suggestions):
    print(f"{gap.node}: needs L{gap.required}, suggest cover {', '.join(s.candidate_cover)}")
    print("  abilities:", s.abilities)

##############################################################################
# Robot-assisted work
# -------------------
# The matching tool is deployed as well, so only the overburden target is
# left.  The machine lines are what a shell harness would grep for.

teaming = potx.load((CORPUS / "scenario2.potx").read_text())
report = analyze_gaps(teaming, ["matching_tool", "technical_system"])
print("\n".join(machine_lines(report)))

##############################################################################
# Closing the gaps
# ----------------
# Adding every suggested observer and analysing again leaves nothing open.

grown, added = apply_suggestions(teaming, report)
print("added:", added)
print("gaps left:", analyze_gaps(grown, ["matching_tool", "technical_system", *added]).gaps)
