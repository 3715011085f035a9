"""Bundled GNN hyperparameter space and its baseline defaults.

The space covers the two architecture groups of a graph neural network
for molecular property regression:

* graph-layer group: number of graph-convolution layers ``n_g``, their
  sizes ``s_g`` (one per layer), and the dense molecular-embedding size
  ``s_d``;
* task-layer group: number of fully connected layers ``n_f``, their
  sizes ``s_f``, and the activation ``a``.

``s_g``/``s_f`` are dynamic lists controlled by ``n_g``/``n_f``. The same
definition ships as ``tables/table1.space`` for the CLI.

The baseline setting is the stock configuration the tuned results are
compared against: two 128-wide graph layers, a 256 dense embedding, and
no hidden task layers at all (``n_f = 0`` sentinel, empty ``s_f``, no
activation) -- only representable in defaults and mode masks, never
produced by decoding.
"""

from __future__ import annotations

from .space import SearchSpace, Setting, parse_space

__all__ = ["GRAPH_GROUP", "TASK_GROUP", "SPACE_YAML", "gnn_space", "baseline_setting"]

GRAPH_GROUP = ("n_g", "s_g", "s_d")
TASK_GROUP = ("n_f", "s_f", "a")

SPACE_YAML = """\
# GNN hyperparameter search space: graph-layer and task-layer groups.
params:
  - name: n_g
    type: int
    lo: 1
    hi: 6
    step: 1
  - name: s_g
    type: int
    lo: 32
    hi: 512
    step: 32
    list_of: n_g
    max_len: 6
  - name: s_d
    type: int
    lo: 64
    hi: 1024
    step: 64
  - name: n_f
    type: int
    lo: 1
    hi: 6
    step: 1
  - name: s_f
    type: int
    lo: 64
    hi: 1024
    step: 64
    list_of: n_f
    max_len: 6
  - name: a
    type: categorical
    options: [sigmoid, relu, tanh]
"""


def gnn_space() -> SearchSpace:
    """The bundled 6-parameter, 16-axis GNN space."""
    return parse_space(SPACE_YAML)


def baseline_setting() -> Setting:
    """Stock configuration: graph defaults, output layer only."""
    return Setting(
        {"n_g": 2, "s_g": [128, 128], "s_d": 256, "n_f": 0, "s_f": [], "a": None}
    )
