"""Two-prover games, derandomized parallel repetition and fortification."""

from .game import (
    Game,
    Strategy,
    ValueResult,
    induced_subgame,
    rect_subgame,
    satisfied_count,
    strategy_value,
    value_exact,
    value_local_search,
)
from .repetition import (
    RepeatedGame,
    RepStrategy,
    SchemeSpec,
    apply_scheme,
    blowup,
    full_power,
    uniform_marginals_check,
    winning_set,
)

__version__ = "0.1.0"

__all__ = [
    "Game",
    "RepStrategy",
    "RepeatedGame",
    "SchemeSpec",
    "Strategy",
    "ValueResult",
    "apply_scheme",
    "blowup",
    "full_power",
    "induced_subgame",
    "rect_subgame",
    "satisfied_count",
    "strategy_value",
    "uniform_marginals_check",
    "value_exact",
    "value_local_search",
    "winning_set",
]
