from .model import (  # noqa: F401
    FemModel,
    MaterialParams,
    SpringAttachment,
    SolveReport,
)
from .kernels import backend_name  # noqa: F401
