from ._reversemath import (
    build_intermediate,
    difficulty,
    equivalent,
    extract_final,
    extract_values,
    jaccard,
    mann_whitney_one_sided,
    mask_value,
    normalize,
    success_rate,
)

__all__ = [
    "build_intermediate",
    "difficulty",
    "equivalent",
    "extract_final",
    "extract_values",
    "jaccard",
    "mann_whitney_one_sided",
    "mask_value",
    "normalize",
    "success_rate",
]
