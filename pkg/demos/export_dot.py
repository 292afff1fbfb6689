"""
Rendering a landscape with Graphviz
===================================

Writes ``fig2.dot`` into the current directory.  Render it with
``dot -Tsvg fig2.dot -o fig2.svg`` if Graphviz is installed.
"""

from pathlib import Path

import potx
from potx.dot import to_dot

HERE = Path(__file__).resolve().parent
graph = potx.load((HERE.parent / "corpus" / "fig2.potx").read_text())

text = to_dot(graph)
Path("fig2.dot").write_text(text)
print(text)
