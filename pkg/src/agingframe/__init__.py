"""agingframe: pilot spacing and power design for aging Rician channels.

Library layout:

- :mod:`agingframe.corrmodel` -- channel statistics (correlations,
  covariances, autoregressive representation, LoS mean)
- :mod:`agingframe.framelayout` -- multi-frame slot structure, power splits
- :mod:`agingframe.channelsim` -- seeded trajectory/observation sampling
- :mod:`agingframe.estimator` -- pilot-window LMMSE estimation
- :mod:`agingframe.receiver` -- aging-aware MMSE combining, instantaneous SINR
- :mod:`agingframe.deteq` -- deterministic-equivalent SE and ASE
- :mod:`agingframe.optimizer` -- frame enumeration + power ascent
- :mod:`agingframe.harness` -- commands, Monte Carlo validation, reports
"""

__version__ = "0.1.0"

import os as _os

# The linear algebra here is many small Hermitian factorizations (tens to a
# few hundred rows); multithreaded BLAS only adds spin-wait overhead at these
# sizes.  Parallelism belongs to trial/candidate level (AGING_THREADS).
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    _os.environ.setdefault(_var, "1")
try:
    import threadpoolctl as _threadpoolctl

    _threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except ImportError:  # env vars above already cover the common case
    pass

from .framelayout import build_layout, parse_layout, split_powers  # noqa: F401
from .scenario import Scenario, UserConfig, load_scenario, save_scenario  # noqa: F401
