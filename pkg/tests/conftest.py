import numpy as np
import pytest

from torustwist import kernels, maps


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile every jit kernel once so timed tests measure math, not LLVM."""
    z = np.zeros(2)
    for fam in (maps.builtin_standard(1.0),
                maps.builtin_standard_shifted(1.0),
                maps.builtin_saddle_center(1.5, 1.0),
                maps.builtin_circle_diffeo(0.2, 0.5)):
        kernels.advance(fam.kind, fam.kernel_params,
                        z + 0.1, z + 0.2, z.copy(), z.copy(), 2)
        kernels.advance(fam.kind, fam.kernel_params,
                        z + 0.1, z + 0.2, z.copy(), z.copy(), -2)
        kernels.hit_times(fam.kind, fam.kernel_params,
                          z + 0.1, z + 0.2, z.copy(), z.copy(), 2, 2.0, -1.0)
    kernels.trajectory(maps.builtin_standard(1.0).kind,
                       maps.builtin_standard(1.0).kernel_params,
                       0.1, 0.2, 0.0, 0.0, 2)
