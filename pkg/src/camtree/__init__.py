"""camtree: tree-model inference on tiled analog CAM arrays.

Compiles binary decision trees into content-addressable-memory arrays of
interval cells and simulates four processing strategies (raw, feature
reordering, matchline-monotonicity-only, and the combined
monotonicity+sparsity scheme), with a calibratable energy/delay model and
a reproduction harness for the sparsity, corner, scalability, and dataset
experiments.
"""

from .tree_model import (
    TreeModel,
    TreeNode,
    TreeSchemaError,
    TreeStructureError,
    balance,
    load_tree,
    loads_tree,
    predict,
    random_tree,
    serialize,
)
from .array_compiler import (
    CamArray,
    Cell,
    InconsistentTreeError,
    classify,
    compile_tree,
    load_array,
    match_all_rows,
    match_row,
    normalize_queries,
    quantize,
    save_array,
    sparsity,
    unit_bounds,
)
from .synthetic_gen import SparsitySpec, generate, generate_with_empty_fraction
from .reorder import Reordering, feature_reorder, map_back
from .tile_engine import (
    MatchlineRegister,
    OpCounts,
    Strategy,
    TileConfig,
    schedule,
    simulate,
    trace_energized,
)
from .energy_model import (
    EnergyParams,
    SimReport,
    account,
    apply_corner,
    default_params,
    gops_per_watt,
    load_params,
)

__version__ = "0.1.0"
