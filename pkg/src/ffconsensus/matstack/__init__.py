from .core import (
    as_mat,
    backend,
    block_diag,
    eigvals,
    is_positive_definite,
    is_positive_semidefinite,
    matrix_rank,
    max_singular_value,
    pseudo_inverse,
    set_backend,
    singular_values,
    solve_linear,
    spectral_radius,
    symmetric_eigvals,
    use_backend,
)

__all__ = [
    "as_mat",
    "backend",
    "block_diag",
    "eigvals",
    "is_positive_definite",
    "is_positive_semidefinite",
    "matrix_rank",
    "max_singular_value",
    "pseudo_inverse",
    "set_backend",
    "singular_values",
    "solve_linear",
    "spectral_radius",
    "symmetric_eigvals",
    "use_backend",
]
