"""Typing annotation utils."""

import os
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

# Accept both `str` and `pathlib.Path`-like
PathLike = Union[str, os.PathLike]

FloatArray = npt.NDArray[np.float64]
ArrayLike = Union[Sequence[float], FloatArray]

# Graph vertex ids are nonnegative; the virtual source / sink use negative ids.
VertexId = int
Arc = Tuple[VertexId, VertexId]

JsonValue = Union[str, bool, int, float, None, List['JsonValue'], Dict[str, 'JsonValue']]
Json = Dict[str, JsonValue]
